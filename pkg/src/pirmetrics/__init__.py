"""Graded relevance metrics and their meta-evaluation against user preferences."""

__version__ = "0.1.0"

from .errors import (
    DataError,
    DuplicateDoc,
    DuplicateJudgment,
    DuplicatePreference,
    DuplicateRank,
    EmptyQuerySet,
    EmptySweep,
    IdealGainZero,
    NoPreferences,
    OutOfScale,
    ParseError,
    PirMetricsError,
    RankGap,
)
from .metrics_core import (
    JudgmentSet,
    MetricKind,
    RankedList,
    average_precision_at_k,
    cumulated_gain_at_k,
    dcg_at_k,
    ideal_dcg_at_k,
    mean_over_queries,
    metric_eval,
    ndcg_at_k,
    precision_at_k,
)
from .preference_eval import (
    ListPair,
    SweepGrid,
    SweepResult,
    Verdict,
    best_threshold,
    metric_delta,
    pir,
    pir_profile,
    threshold_sweep,
)
from .data_io import (
    StudyBundle,
    convert_school_grade,
    load_bundle,
    parse_judgments,
    parse_preferences,
    parse_runs,
    save_bundle,
    write_report,
)
from .study_sim import GroundTruth, SimConfig, generate_study, oracle_pir
