"""Preference Identification Ratio (PIR) and the threshold / cutoff sweep.

For each query with an explicit preference between two result lists, a
metric "predicts" the preference through the sign of its value difference,
but only when that difference reaches the threshold ``t``. PIR is the number
of correct predictions minus inverted ones, over the number of
preference-bearing queries.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import EmptySweep, IdealGainZero, NoPreferences
from .metrics_core import JudgmentSet, MetricKind, RankedList, count_unjudged, metric_eval

log = logging.getLogger(__name__)

# Deltas are rounded to this many decimals so float noise from summation
# order neither fakes a preference nor shifts a value across a grid threshold.
DELTA_DECIMALS = 12


class Verdict(enum.Enum):
    FIRST = "FIRST"
    SECOND = "SECOND"
    TIE = "TIE"

    @property
    def sign(self) -> int:
        return {Verdict.FIRST: 1, Verdict.SECOND: -1, Verdict.TIE: 0}[self]

    def flipped(self) -> "Verdict":
        return {Verdict.FIRST: Verdict.SECOND, Verdict.SECOND: Verdict.FIRST, Verdict.TIE: Verdict.TIE}[self]


@dataclass(frozen=True)
class ListPair:
    query_id: str
    first: RankedList
    second: RankedList

    def __post_init__(self) -> None:
        if self.first.query_id != self.query_id or self.second.query_id != self.query_id:
            raise ValueError(f"pair {self.query_id!r} mixes lists from different queries")
        if self.first.list_id == self.second.list_id:
            raise ValueError(f"pair {self.query_id!r} compares list {self.first.list_id!r} with itself")

    def swapped(self) -> "ListPair":
        return ListPair(self.query_id, self.second, self.first)

    def candidate_docs(self) -> frozenset[str]:
        """Every document shown in either list.

        Zero-grade documents never change an ideal ranking's value, so this
        pool gives the same normalizers as the judged documents of both lists
        while keeping nDCG and AP bounded when unjudged docs carry a
        nonzero default grade.
        """
        return frozenset(self.first.docs) | frozenset(self.second.docs)


def metric_delta(pair: ListPair, judgments: JudgmentSet, kind: MetricKind, k: int) -> float:
    pool = pair.candidate_docs()
    first = metric_eval(kind, pair.first, judgments, k, pool)
    second = metric_eval(kind, pair.second, judgments, k, pool)
    return round(first - second, DELTA_DECIMALS) + 0.0


def _sgn(x: float) -> int:
    return (x > 0) - (x < 0)


def pir_terms(
    deltas: Mapping[str, float],
    prefs: Mapping[str, Verdict],
    t: float,
) -> dict[str, int]:
    """Per-query contribution (-1, 0 or +1) for every non-TIE query."""
    if t < 0:
        raise ValueError(f"threshold must be >= 0, got {t!r}")
    terms: dict[str, int] = {}
    for query_id, verdict in prefs.items():
        if verdict is Verdict.TIE:
            continue
        try:
            delta = deltas[query_id]
        except KeyError:
            raise KeyError(f"no metric delta for preference-bearing query {query_id!r}") from None
        terms[query_id] = _sgn(delta) * verdict.sign if abs(delta) >= t else 0
    return terms


def pir(
    deltas: Mapping[str, float],
    prefs: Mapping[str, Verdict],
    t: float,
    ties_in_denominator: bool = False,
) -> float:
    """PIR over the preference-bearing queries of ``prefs``.

    TIE queries are skipped entirely by default. With
    ``ties_in_denominator`` they still contribute nothing to the numerator
    but are counted in the denominator.
    """
    terms = pir_terms(deltas, prefs, t)
    if not terms:
        raise NoPreferences("no query carries a FIRST/SECOND preference")
    denominator = len(prefs) if ties_in_denominator else len(terms)
    return sum(terms.values()) / denominator


@dataclass(frozen=True)
class SweepGrid:
    """Metrics x cutoffs x thresholds.

    With ``threshold_max=None`` unit-range metrics sweep up to 1.0 and CG/DCG
    up to the largest observed ``|delta|`` of the cell.
    """

    metrics: tuple[MetricKind, ...]
    cutoffs: tuple[int, ...]
    threshold_step: float = 0.01
    threshold_max: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "cutoffs", tuple(self.cutoffs))
        if not self.metrics or not self.cutoffs:
            raise ValueError("sweep grid needs at least one metric and one cutoff")
        if any(isinstance(k, bool) or not isinstance(k, int) or k < 1 for k in self.cutoffs):
            raise ValueError(f"cutoffs must be positive integers, got {self.cutoffs!r}")
        if not self.threshold_step > 0:
            raise ValueError(f"threshold step must be > 0, got {self.threshold_step!r}")
        if self.threshold_max is not None and not self.threshold_max > 0:
            raise ValueError(f"threshold max must be > 0, got {self.threshold_max!r}")

    def thresholds(self, kind: MetricKind, max_abs_delta: float = 0.0) -> list[float]:
        if self.threshold_max is not None:
            upper = self.threshold_max
        elif kind.unit_range:
            upper = 1.0
        else:
            upper = max_abs_delta
        return threshold_values(self.threshold_step, upper)


def threshold_values(step: float, upper: float) -> list[float]:
    """``0, step, 2*step, ...`` up to and including ``upper``, decimal-rounded."""
    count = int(upper / step + 1e-9)
    return [round(i * step, DELTA_DECIMALS) for i in range(count + 1)]


@dataclass
class CellDeltas:
    deltas: dict[str, float]
    dropped: list[str]


def cell_deltas(
    pairs: Iterable[ListPair],
    judgments: JudgmentSet,
    kind: MetricKind,
    k: int,
) -> CellDeltas:
    """Deltas for every pair; queries without relevance signal are dropped."""
    deltas: dict[str, float] = {}
    dropped: list[str] = []
    for pair in pairs:
        try:
            deltas[pair.query_id] = metric_delta(pair, judgments, kind, k)
        except IdealGainZero:
            dropped.append(pair.query_id)
    return CellDeltas(deltas, dropped)


def _sweep_from_deltas(
    cell: CellDeltas,
    prefs: Mapping[str, Verdict],
    thresholds: Sequence[float],
    ties_in_denominator: bool,
) -> dict[float, float]:
    dropped = set(cell.dropped)
    kept = {q: v for q, v in prefs.items() if q not in dropped}
    return {t: pir(cell.deltas, kept, t, ties_in_denominator) for t in thresholds}


def threshold_sweep(
    pairs: Sequence[ListPair],
    judgments: JudgmentSet,
    prefs: Mapping[str, Verdict],
    kind: MetricKind,
    k: int,
    grid: SweepGrid,
    ties_in_denominator: bool = False,
) -> dict[float, float]:
    cell = cell_deltas(pairs, judgments, kind, k)
    max_abs = max((abs(d) for d in cell.deltas.values()), default=0.0)
    return _sweep_from_deltas(cell, prefs, grid.thresholds(kind, max_abs), ties_in_denominator)


def best_threshold(sweep: Mapping[float, float]) -> tuple[float, float]:
    """Maximal PIR; among maximizers the smallest threshold."""
    if not sweep:
        raise EmptySweep("cannot pick a threshold from an empty sweep")
    return min(sweep.items(), key=lambda item: (-item[1], item[0]))


@dataclass
class SweepResult:
    cells: dict[tuple[MetricKind, int, float], float] = field(default_factory=dict)
    best: dict[tuple[MetricKind, int], tuple[float, float]] = field(default_factory=dict)
    dropped: dict[tuple[MetricKind, int], int] = field(default_factory=dict)
    errors: dict[tuple[MetricKind, int], str] = field(default_factory=dict)
    queries: int = 0
    preference_queries: int = 0
    unjudged: int = 0

    def sweep(self, kind: MetricKind, k: int) -> dict[float, float]:
        return {t: v for (m, c, t), v in self.cells.items() if m == kind and c == k}


def pir_profile(
    pairs: Sequence[ListPair],
    judgments: JudgmentSet,
    prefs: Mapping[str, Verdict],
    grid: SweepGrid,
    ties_in_denominator: bool = False,
) -> SweepResult:
    """Full (metric x cutoff x threshold) PIR cube plus best thresholds.

    A cell that cannot be computed is recorded in ``errors`` and the
    remaining cells are still filled.
    """
    pairs = list(pairs)
    missing = [p.query_id for p in pairs if p.query_id not in prefs]
    if missing:
        raise KeyError(f"no preference recorded for queries: {', '.join(missing[:5])}")
    pair_queries = {p.query_id for p in pairs}
    prefs = {q: v for q, v in prefs.items() if q in pair_queries}

    result = SweepResult(
        queries=len(pairs),
        preference_queries=sum(v is not Verdict.TIE for v in prefs.values()),
        unjudged=count_unjudged([l for p in pairs for l in (p.first, p.second)], judgments),
    )
    if result.unjudged:
        log.warning("%d judged-list documents have no judgment; using default grade %s",
                    result.unjudged, judgments.default_grade)
    for kind in grid.metrics:
        for k in grid.cutoffs:
            cell = cell_deltas(pairs, judgments, kind, k)
            result.dropped[(kind, k)] = len(cell.dropped)
            max_abs = max((abs(d) for d in cell.deltas.values()), default=0.0)
            try:
                sweep = _sweep_from_deltas(
                    cell, prefs, grid.thresholds(kind, max_abs), ties_in_denominator
                )
            except NoPreferences as exc:
                result.errors[(kind, k)] = f"NoPreferences: {exc}"
                continue
            for t, value in sweep.items():
                result.cells[(kind, k, t)] = value
            result.best[(kind, k)] = best_threshold(sweep)
    return result
