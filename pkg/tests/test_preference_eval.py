import pytest
from hypothesis import given
from hypothesis import strategies as st

from pirmetrics import (
    EmptySweep,
    IdealGainZero,
    JudgmentSet,
    ListPair,
    MetricKind,
    NoPreferences,
    RankedList,
    SweepGrid,
    Verdict,
    best_threshold,
    metric_delta,
    oracle_pir,
    pir,
    pir_profile,
    threshold_sweep,
)
from pirmetrics.preference_eval import pir_terms, threshold_values

F, S, T = Verdict.FIRST, Verdict.SECOND, Verdict.TIE

FIXTURE_DELTAS = {"q1": 0.4, "q2": -0.3, "q3": 0.05}
FIXTURE_PREFS = {"q1": F, "q2": F, "q3": S}

delta_st = st.sampled_from([-1.0, -0.5, -0.25, -0.1, -0.05, 0.0, 0.05, 0.1, 0.25, 0.5, 1.0])
verdict_st = st.sampled_from([F, S, T])
instance_st = st.dictionaries(
    st.text("abcdefgh", min_size=1, max_size=3), st.tuples(delta_st, verdict_st), min_size=1, max_size=12
)


def split(instance):
    return {q: d for q, (d, _) in instance.items()}, {q: v for q, (_, v) in instance.items()}


def make_pair(query_id, first_grades, second_grades):
    grades = {}
    first, second = [], []
    for i, g in enumerate(first_grades):
        grades[(query_id, f"a{i}")] = g
        first.append(f"a{i}")
    for i, g in enumerate(second_grades):
        grades[(query_id, f"b{i}")] = g
        second.append(f"b{i}")
    pair = ListPair(query_id, RankedList(query_id, "A", first), RankedList(query_id, "B", second))
    return pair, grades


def study(spec):
    """spec: {query: (first_grades, second_grades, verdict)}"""
    pairs, grades, prefs = [], {}, {}
    for q, (a, b, verdict) in spec.items():
        pair, g = make_pair(q, a, b)
        pairs.append(pair)
        grades.update(g)
        prefs[q] = verdict
    return pairs, JudgmentSet(grades), prefs


# --- metric_delta -----------------------------------------------------------

def test_delta_identical_lists_is_zero():
    pair, grades = make_pair("q", [1.0, 0.2], [1.0, 0.2])
    assert metric_delta(pair, JudgmentSet(grades), MetricKind("ndcg"), 2) == 0.0


def test_delta_antisymmetric():
    pair, grades = make_pair("q", [0.2, 1.0, 0.4], [0.8, 0.0, 0.6])
    judgments = JudgmentSet(grades)
    for name in ("precision", "ap", "cg", "dcg", "ndcg"):
        kind = MetricKind(name)
        assert metric_delta(pair.swapped(), judgments, kind, 3) == -metric_delta(pair, judgments, kind, 3)


def test_delta_precision_example():
    pair, grades = make_pair("q", [1, 1, 1], [0, 0, 0])
    assert metric_delta(pair, JudgmentSet(grades), MetricKind("precision"), 3) == 1.0


def test_delta_snaps_summation_noise():
    # same multiset of grades, different order: precision sums differ in the last ulp
    pair, grades = make_pair("q", [0.2, 0.4, 0.6, 0.8, 0.2], [0.8, 0.6, 0.2, 0.4, 0.2])
    assert metric_delta(pair, JudgmentSet(grades), MetricKind("precision"), 5) == 0.0


def test_delta_pool_spans_both_lists():
    pair, grades = make_pair("q", [0.2], [1.0])
    delta = metric_delta(pair, JudgmentSet(grades), MetricKind("ndcg"), 1)
    assert delta == pytest.approx(0.2 - 1.0)


def test_delta_propagates_ideal_gain_zero():
    pair, grades = make_pair("q", [0, 0], [0, 0])
    with pytest.raises(IdealGainZero):
        metric_delta(pair, JudgmentSet(grades), MetricKind("ndcg"), 2)


def test_list_pair_invariants():
    a = RankedList("q", "A", ["x"])
    with pytest.raises(ValueError):
        ListPair("q", a, RankedList("other", "B", ["x"]))
    with pytest.raises(ValueError):
        ListPair("q", a, RankedList("q", "A", ["y"]))


# --- pir --------------------------------------------------------------------

def test_pir_fixture():
    assert pir(FIXTURE_DELTAS, FIXTURE_PREFS, 0.1) == pytest.approx(0.0, abs=1e-12)
    assert pir(FIXTURE_DELTAS, FIXTURE_PREFS, 0.0) == pytest.approx(-1 / 3, abs=1e-12)


def test_pir_endpoints():
    deltas = {"a": 0.3, "b": -0.2, "c": 0.9}
    right = {"a": F, "b": S, "c": F}
    wrong = {q: v.flipped() for q, v in right.items()}
    assert pir(deltas, right, 0) == 1.0
    assert pir(deltas, wrong, 0) == -1.0
    assert pir({q: 0.0 for q in deltas}, right, 0) == 0.0


def test_pir_boundary_counts():
    assert pir({"a": 0.25}, {"a": F}, 0.25) == 1.0
    assert pir({"a": 0.25}, {"a": F}, 0.26) == 0.0


def test_pir_ties():
    deltas = {"a": 0.5, "b": 0.5}
    assert pir(deltas, {"a": F, "b": T}, 0) == 1.0
    assert pir(deltas, {"a": F, "b": T}, 0, ties_in_denominator=True) == 0.5
    with pytest.raises(NoPreferences):
        pir(deltas, {"a": T, "b": T}, 0)
    with pytest.raises(NoPreferences):
        pir({}, {}, 0)


def test_pir_missing_delta():
    with pytest.raises(KeyError):
        pir({}, {"a": F}, 0)


@given(instance_st, st.sampled_from([0.0, 0.05, 0.1, 0.25, 0.5, 1.0]), st.booleans())
def test_pir_matches_oracle(instance, t, ties_in_denominator):
    deltas, prefs = split(instance)
    try:
        expected = oracle_pir(deltas, prefs, t, ties_in_denominator)
    except NoPreferences:
        with pytest.raises(NoPreferences):
            pir(deltas, prefs, t, ties_in_denominator)
        return
    value = pir(deltas, prefs, t, ties_in_denominator)
    assert value == expected
    assert -1.0 <= value <= 1.0


@given(instance_st, st.sampled_from([0.0, 0.05, 0.1, 0.5]))
def test_swap_antisymmetry(instance, t):
    deltas, prefs = split(instance)
    if all(v is T for v in prefs.values()):
        return
    base = pir(deltas, prefs, t)
    flipped = {q: v.flipped() for q, v in prefs.items()}
    negated = {q: -d for q, d in deltas.items()}
    assert pir(negated, flipped, t) == base
    assert pir(deltas, flipped, t) == -base


@given(instance_st, st.integers(1, 5))
def test_tie_neutrality(instance, extra):
    deltas, prefs = split(instance)
    if all(v is T for v in prefs.values()):
        return
    more_deltas = dict(deltas)
    more_prefs = dict(prefs)
    for i in range(extra):
        more_deltas[f"tie{i}"] = 0.7
        more_prefs[f"tie{i}"] = T
    assert pir(more_deltas, more_prefs, 0.05) == pir(deltas, prefs, 0.05)


@given(instance_st)
def test_support_non_increasing_in_threshold(instance):
    deltas, prefs = split(instance)
    previous = None
    for t in threshold_values(0.01, 1.0):
        support = sum(1 for term in pir_terms(deltas, prefs, t).values() if term)
        if previous is not None:
            assert support <= previous
        previous = support


# --- sweep ------------------------------------------------------------------

def test_threshold_values():
    assert threshold_values(0.01, 1.0)[:3] == [0.0, 0.01, 0.02]
    assert len(threshold_values(0.01, 1.0)) == 101
    assert threshold_values(0.01, 1.0)[7] == 0.07
    assert threshold_values(0.05, 0.2) == [0.0, 0.05, 0.1, 0.15, 0.2]


def test_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid([MetricKind("ap")], [0])
    with pytest.raises(ValueError):
        SweepGrid([MetricKind("ap")], [1], threshold_step=0)
    with pytest.raises(ValueError):
        SweepGrid([], [1])


def fixture_study():
    # precision@1 deltas reproduce the hand fixture: +0.4, -0.4 (pref FIRST), +0.2 (pref SECOND)
    return study({
        "q1": ([0.8], [0.4], F),
        "q2": ([0.2], [0.6], F),
        "q3": ([0.6], [0.4], S),
    })


def test_threshold_sweep_brute_force():
    pairs, judgments, prefs = fixture_study()
    grid = SweepGrid([MetricKind("precision")], [1], threshold_step=0.05)
    sweep = threshold_sweep(pairs, judgments, prefs, MetricKind("precision"), 1, grid)
    deltas = {"q1": 0.4, "q2": -0.4, "q3": 0.2}
    assert list(sweep) == threshold_values(0.05, 1.0)
    for t, value in sweep.items():
        assert value == oracle_pir(deltas, prefs, t)
    assert sweep[0.0] == pytest.approx(-1 / 3)
    assert sweep[0.2] == pytest.approx(-1 / 3)
    assert sweep[0.25] == 0.0
    assert sweep[0.4] == 0.0
    assert sweep[0.45] == 0.0


def test_threshold_sweep_saturates_to_zero():
    pairs, judgments, prefs = fixture_study()
    grid = SweepGrid([MetricKind("precision")], [1], threshold_max=1.0)
    sweep = threshold_sweep(pairs, judgments, prefs, MetricKind("precision"), 1, grid)
    assert all(v == 0.0 for t, v in sweep.items() if t > 0.4)


def test_threshold_sweep_unbounded_metric_uses_observed_max():
    pairs, judgments, prefs = study({
        "q1": ([1.0, 1.0, 1.0], [0.0, 0.0, 0.0], F),
        "q2": ([0.0], [0.4], S),
    })
    grid = SweepGrid([MetricKind("cg")], [3])
    sweep = threshold_sweep(pairs, judgments, prefs, MetricKind("cg"), 3, grid)
    assert max(sweep) == 3.0
    assert sweep[3.0] == 0.5
    assert sweep[0.4] == 1.0
    assert sweep[0.41] == 0.5


def test_best_threshold():
    assert best_threshold({0.0: 0.2, 0.1: 0.5, 0.2: 0.5}) == (0.1, 0.5)
    assert best_threshold({0.3: -0.1}) == (0.3, -0.1)
    assert best_threshold({0.0: 0.4, 0.01: 0.4, 0.02: 0.4}) == (0.0, 0.4)
    with pytest.raises(EmptySweep):
        best_threshold({})


def test_profile_single_cell_wraps_sweep():
    pairs, judgments, prefs = fixture_study()
    kind = MetricKind("precision")
    grid = SweepGrid([kind], [1])
    result = pir_profile(pairs, judgments, prefs, grid)
    sweep = threshold_sweep(pairs, judgments, prefs, kind, 1, grid)
    assert result.sweep(kind, 1) == sweep
    assert result.best[(kind, 1)] == best_threshold(sweep)


def test_profile_shape_and_determinism():
    pairs, judgments, prefs = study({
        "q1": ([1.0, 0.2, 0.6], [0.0, 0.4, 0.8], F),
        "q2": ([0.2, 0.0, 0.0], [0.6, 0.4, 0.0], S),
        "q3": ([0.4, 0.4, 0.4], [0.4, 0.4, 0.4], T),
        "q4": ([0.0, 0.0], [0.0, 0.0], F),
    })
    kinds = [MetricKind("precision"), MetricKind("ap"), MetricKind("ndcg")]
    grid = SweepGrid(kinds, [1, 2, 3], threshold_step=0.01, threshold_max=1.0)
    first = pir_profile(pairs, judgments, prefs, grid)
    second = pir_profile(pairs, judgments, prefs, grid)
    assert len(first.cells) == 3 * 3 * 101
    assert first.cells == second.cells and first.best == second.best
    # q4 has no relevance signal: dropped for AP and nDCG, kept for precision
    assert first.dropped[(MetricKind("ndcg"), 2)] == 1
    assert first.dropped[(MetricKind("precision"), 2)] == 0
    for (kind, k), (t, value) in first.best.items():
        assert value == max(first.sweep(kind, k).values())


def test_profile_records_cell_errors():
    pairs, judgments, prefs = study({
        "q1": ([0.0], [0.0], F),
        "q2": ([0.8], [0.2], F),
    })
    grid = SweepGrid([MetricKind("ndcg")], [1])
    prefs_only_dead = {"q1": F, "q2": T}
    result = pir_profile(pairs, judgments, prefs_only_dead, grid)
    assert (MetricKind("ndcg"), 1) in result.errors
    assert not result.cells
    result = pir_profile(pairs, judgments, prefs, SweepGrid([MetricKind("ndcg"), MetricKind("precision")], [1]))
    assert result.best[(MetricKind("ndcg"), 1)] == (0.0, 1.0)
    assert result.best[(MetricKind("precision"), 1)] == (0.0, 0.5)


def test_profile_requires_preferences_for_all_pairs():
    pairs, judgments, prefs = fixture_study()
    del prefs["q2"]
    with pytest.raises(KeyError):
        pir_profile(pairs, judgments, prefs, SweepGrid([MetricKind("precision")], [1]))
