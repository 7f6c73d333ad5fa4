"""Seeded synthetic side-by-side studies.

Every query gets ``docs_per_query`` documents with a latent relevance drawn
from a Beta distribution. The first list orders them by a noisy engine score
correlated with that relevance; the second is a uniform random permutation.
A simulated rater grades each document (latent relevance plus Gaussian
noise, snapped to the 0.2 grid of the six-point scale), and a simulated user
prefers whichever list has the higher utility, where utility is a metric
over the top ``persistence_depth`` ranks computed on the noise-free grades.

All distributions here are modelling choices for exercising the pipeline;
none of them is fitted to real study data.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import asdict, dataclass, field

import numpy as np

from .data_io import StudyBundle
from .errors import IdealGainZero, NoPreferences
from .metrics_core import JudgmentSet, MetricKind, RankedList
from .preference_eval import ListPair, Verdict, metric_delta

RNG_NAME = "numpy.random.PCG64"
FIRST_LIST = "original"
SECOND_LIST = "randomized"


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    num_queries: int = 50
    docs_per_query: int = 50
    grade_noise: float = 0.0
    persistence_depth: int = 10
    tie_margin: float = 0.0
    utility: str = "ndcg"
    log_base: float = 2.0
    relevance_a: float = 0.8
    relevance_b: float = 2.0
    engine_noise: float = 0.5

    def __post_init__(self) -> None:
        for name in ("num_queries", "docs_per_query", "persistence_depth"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        for name in ("grade_noise", "tie_margin", "engine_noise"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if not (self.relevance_a > 0 and self.relevance_b > 0):
            raise ValueError("Beta shape parameters must be > 0")
        MetricKind(self.utility, self.log_base)

    @property
    def utility_metric(self) -> MetricKind:
        return MetricKind(self.utility, self.log_base)

    def as_meta(self) -> dict[str, object]:
        return {"generator": RNG_NAME, **asdict(self)}


@dataclass
class GroundTruth:
    relevance: dict[tuple[str, str], float] = field(default_factory=dict)
    perceived: dict[tuple[str, str], float] = field(default_factory=dict)
    utility_delta: dict[str, float] = field(default_factory=dict)
    preferences: dict[str, Verdict] = field(default_factory=dict)


def quantize(x: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and snap to the nearest multiple of 0.2."""
    return np.rint(np.clip(x, 0.0, 1.0) * 5) / 5


def generate_study(config: SimConfig) -> tuple[StudyBundle, GroundTruth]:
    rng = np.random.Generator(np.random.PCG64(config.seed))
    width = len(str(config.num_queries))
    doc_width = len(str(config.docs_per_query))
    utility = config.utility_metric

    rater: dict[tuple[str, str], float] = {}
    truth = GroundTruth()
    pairs: list[ListPair] = []
    prefs: dict[str, Verdict] = {}

    for qi in range(1, config.num_queries + 1):
        query_id = f"q{qi:0{width}d}"
        docs = [f"d{j:0{doc_width}d}" for j in range(1, config.docs_per_query + 1)]
        relevance = rng.beta(config.relevance_a, config.relevance_b, size=len(docs))
        engine_score = relevance + rng.normal(0.0, config.engine_noise, size=len(docs))
        shuffled = rng.permutation(len(docs))
        noise = rng.normal(0.0, config.grade_noise, size=len(docs)) if config.grade_noise else 0.0
        perceived = quantize(relevance)
        graded = quantize(relevance + noise)

        for j, doc in enumerate(docs):
            truth.relevance[(query_id, doc)] = float(relevance[j])
            truth.perceived[(query_id, doc)] = float(perceived[j])
            rater[(query_id, doc)] = float(graded[j])

        # stable sort keeps ties deterministic
        original = np.argsort(-engine_score, kind="stable")
        pair = ListPair(
            query_id,
            RankedList(query_id, FIRST_LIST, tuple(docs[i] for i in original)),
            RankedList(query_id, SECOND_LIST, tuple(docs[i] for i in shuffled)),
        )
        pairs.append(pair)

        user_view = JudgmentSet({(query_id, d): float(perceived[j]) for j, d in enumerate(docs)})
        try:
            delta = metric_delta(pair, user_view, utility, config.persistence_depth)
        except IdealGainZero:
            delta = 0.0
        truth.utility_delta[query_id] = delta
        if delta == 0.0 or abs(delta) < config.tie_margin:
            verdict = Verdict.TIE
        else:
            verdict = Verdict.FIRST if delta > 0 else Verdict.SECOND
        prefs[query_id] = verdict

    truth.preferences = dict(prefs)
    return StudyBundle(JudgmentSet(rater), pairs, prefs), truth


def oracle_pir(
    deltas: Mapping[str, float],
    prefs: Mapping[str, Verdict],
    t: float,
    ties_in_denominator: bool = False,
) -> float:
    """Brute-force PIR for cross-checking; shares no code with the library path."""
    correct = 0
    inverted = 0
    with_preference = 0
    total = 0
    for query in prefs:
        total += 1
        verdict = prefs[query]
        if verdict == Verdict.TIE:
            continue
        with_preference += 1
        d = deltas[query]
        if d == 0 or abs(d) < t:
            continue
        metric_says_first = d > 0
        user_says_first = verdict == Verdict.FIRST
        if metric_says_first == user_says_first:
            correct += 1
        else:
            inverted += 1
    if with_preference == 0:
        raise NoPreferences("no preference-bearing queries")
    return (correct - inverted) / (total if ties_in_denominator else with_preference)
