"""Graded relevance metrics over a single ranked list.

All grades live in [0, 1]. Ranks past the end of a list contribute a gain
of 0 while the cutoff ``k`` stays fixed, so lists of unequal length remain
comparable. Unjudged documents resolve to ``JudgmentSet.default_grade``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import DuplicateDoc, EmptyQuerySet, IdealGainZero

PRECISION = "precision"
AP = "ap"
CG = "cg"
DCG = "dcg"
NDCG = "ndcg"

METRIC_NAMES = (PRECISION, AP, CG, DCG, NDCG)
DISCOUNTED = frozenset({DCG, NDCG})
# metrics whose values are bounded to [0, 1]
UNIT_RANGE = frozenset({PRECISION, AP, NDCG})

_ALIASES = {"map": AP, "p": PRECISION, "prec": PRECISION}


@dataclass(frozen=True)
class RankedList:
    query_id: str
    list_id: str
    docs: tuple[str, ...]

    def __post_init__(self) -> None:
        docs = tuple(self.docs)
        object.__setattr__(self, "docs", docs)
        if not docs:
            raise ValueError(f"ranked list {self.query_id}/{self.list_id} is empty")
        seen: set[str] = set()
        for doc in docs:
            if doc in seen:
                raise DuplicateDoc(
                    f"document {doc!r} appears twice in list {self.query_id}/{self.list_id}"
                )
            seen.add(doc)

    def __len__(self) -> int:
        return len(self.docs)


class JudgmentSet:
    """Mapping ``(query_id, doc_id) -> grade`` with a default for unjudged docs."""

    def __init__(
        self,
        grades: Mapping[tuple[str, str], float] | None = None,
        default_grade: float = 0.0,
    ) -> None:
        _check_grade(default_grade)
        self.default_grade = float(default_grade)
        self._grades: dict[tuple[str, str], float] = {}
        self._by_query: dict[str, set[str]] = {}
        for (query_id, doc_id), grade in (grades or {}).items():
            _check_grade(grade)
            self._grades[(query_id, doc_id)] = float(grade)
            self._by_query.setdefault(query_id, set()).add(doc_id)

    def grade(self, query_id: str, doc_id: str) -> float:
        return self._grades.get((query_id, doc_id), self.default_grade)

    def is_judged(self, query_id: str, doc_id: str) -> bool:
        return (query_id, doc_id) in self._grades

    def judged_docs(self, query_id: str) -> frozenset[str]:
        return frozenset(self._by_query.get(query_id, ()))

    def queries(self) -> list[str]:
        return sorted(self._by_query)

    def items(self):
        return self._grades.items()

    def __len__(self) -> int:
        return len(self._grades)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JudgmentSet):
            return NotImplemented
        return self._grades == other._grades and self.default_grade == other.default_grade

    def __repr__(self) -> str:
        return f"JudgmentSet({len(self)} grades, default_grade={self.default_grade})"


def _check_grade(grade: float) -> None:
    if not 0.0 <= grade <= 1.0:
        raise ValueError(f"relevance grade {grade!r} outside [0, 1]")


@dataclass(frozen=True)
class MetricKind:
    """A metric selector. ``log_base`` only applies to DCG and nDCG.

    Bases in (1, 2) are rejected: rank 1 would then fall in the discounted
    branch and divide by log_b(1) = 0.
    """

    name: str
    log_base: float | None = field(default=None)

    def __post_init__(self) -> None:
        name = _ALIASES.get(self.name.lower(), self.name.lower())
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {self.name!r}; expected one of {', '.join(METRIC_NAMES)}")
        object.__setattr__(self, "name", name)
        if name in DISCOUNTED:
            base = 2.0 if self.log_base is None else float(self.log_base)
            if not base >= 2.0 or math.isinf(base):
                raise ValueError(f"log base must be a finite value >= 2, got {self.log_base!r}")
            object.__setattr__(self, "log_base", base)
        else:
            object.__setattr__(self, "log_base", None)

    @property
    def label(self) -> str:
        if self.log_base is None or self.log_base == 2.0:
            return self.name
        return f"{self.name}_b{self.log_base:g}"

    @property
    def unit_range(self) -> bool:
        return self.name in UNIT_RANGE

    def __str__(self) -> str:
        return self.label


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValueError(f"cutoff must be a positive integer, got {k!r}")


def gains_at_k(ranked: RankedList, judgments: JudgmentSet, k: int) -> list[float]:
    """Grades of ranks 1..k, padded with zeros past the end of the list."""
    _check_k(k)
    gains = [judgments.grade(ranked.query_id, doc) for doc in ranked.docs[:k]]
    gains.extend([0.0] * (k - len(gains)))
    return gains


def _dcg(gains: Iterable[float], b: float) -> float:
    ln_b = math.log(b)
    total = 0.0
    for i, g in enumerate(gains, start=1):
        if i < b:
            total += g
        else:
            total += g / (math.log(i) / ln_b)
    return total


def candidate_pool(
    ranked: RankedList, judgments: JudgmentSet, candidate_docs: Iterable[str] | None
) -> frozenset[str]:
    if candidate_docs is not None:
        return frozenset(candidate_docs)
    return frozenset(ranked.docs) | judgments.judged_docs(ranked.query_id)


def ideal_ranking(query_id: str, judgments: JudgmentSet, candidate_docs: Iterable[str]) -> list[str]:
    """Candidates sorted by grade descending, ties by ascending doc id."""
    return sorted(candidate_docs, key=lambda d: (-judgments.grade(query_id, d), d))


def cumulated_gain_at_k(ranked: RankedList, judgments: JudgmentSet, k: int) -> float:
    return sum(gains_at_k(ranked, judgments, k))


def dcg_at_k(ranked: RankedList, judgments: JudgmentSet, k: int, b: float = 2.0) -> float:
    if not b >= 2.0:
        raise ValueError(f"log base must be >= 2, got {b!r}")
    return _dcg(gains_at_k(ranked, judgments, k), b)


def ideal_dcg_at_k(
    query_id: str,
    judgments: JudgmentSet,
    candidate_docs: Iterable[str],
    k: int,
    b: float = 2.0,
) -> float:
    _check_k(k)
    if not b >= 2.0:
        raise ValueError(f"log base must be >= 2, got {b!r}")
    order = ideal_ranking(query_id, judgments, candidate_docs)
    if not order:
        raise ValueError(f"empty candidate pool for query {query_id!r}")
    gains = [judgments.grade(query_id, d) for d in order[:k]]
    gains.extend([0.0] * (k - len(gains)))
    return _dcg(gains, b)


def ndcg_at_k(
    ranked: RankedList,
    judgments: JudgmentSet,
    k: int,
    b: float = 2.0,
    candidate_docs: Iterable[str] | None = None,
) -> float:
    pool = candidate_pool(ranked, judgments, candidate_docs)
    ideal = ideal_dcg_at_k(ranked.query_id, judgments, pool, k, b)
    if ideal == 0.0:
        raise IdealGainZero(f"query {ranked.query_id!r} has no relevant candidate documents")
    return dcg_at_k(ranked, judgments, k, b) / ideal


def precision_at_k(ranked: RankedList, judgments: JudgmentSet, k: int) -> float:
    return sum(gains_at_k(ranked, judgments, k)) / k


def ideal_relevance_mass(
    query_id: str, judgments: JudgmentSet, candidate_docs: Iterable[str], k: int
) -> float:
    """Sum of the k largest candidate grades; the graded count of relevant docs."""
    _check_k(k)
    grades = sorted((judgments.grade(query_id, d) for d in candidate_docs), reverse=True)
    return sum(grades[:k])


def average_precision_at_k(
    ranked: RankedList,
    judgments: JudgmentSet,
    k: int,
    candidate_docs: Iterable[str] | None = None,
) -> float:
    """Graded AP: each rank's grade weights the graded precision at that rank.

    The normalizer is the ideal relevance mass at ``k``, which reduces to
    ``min(R, k)`` for binary grades.
    """
    pool = candidate_pool(ranked, judgments, candidate_docs)
    mass = ideal_relevance_mass(ranked.query_id, judgments, pool, k)
    if mass == 0.0:
        raise IdealGainZero(f"query {ranked.query_id!r} has no relevant candidate documents")
    total = 0.0
    cum = 0.0
    for j, g in enumerate(gains_at_k(ranked, judgments, k), start=1):
        cum += g
        if g:
            total += g * (cum / j)
    return total / mass


def mean_over_queries(per_query_values: Mapping[str, float]) -> float:
    if not per_query_values:
        raise EmptyQuerySet("cannot average over an empty query set")
    return math.fsum(per_query_values.values()) / len(per_query_values)


def metric_eval(
    kind: MetricKind,
    ranked: RankedList,
    judgments: JudgmentSet,
    k: int,
    candidate_docs: Iterable[str] | None = None,
) -> float:
    if kind.name == PRECISION:
        return precision_at_k(ranked, judgments, k)
    if kind.name == AP:
        return average_precision_at_k(ranked, judgments, k, candidate_docs)
    if kind.name == CG:
        return cumulated_gain_at_k(ranked, judgments, k)
    if kind.name == DCG:
        return dcg_at_k(ranked, judgments, k, kind.log_base)
    return ndcg_at_k(ranked, judgments, k, kind.log_base, candidate_docs)


def count_unjudged(lists: Iterable[RankedList], judgments: JudgmentSet) -> int:
    """Number of (query, doc) occurrences that fall back to the default grade."""
    seen: set[tuple[str, str]] = set()
    for ranked in lists:
        for doc in ranked.docs:
            if not judgments.is_judged(ranked.query_id, doc):
                seen.add((ranked.query_id, doc))
    return len(seen)
