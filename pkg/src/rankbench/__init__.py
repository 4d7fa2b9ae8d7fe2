"""Average ranking of incomplete algorithm rankings and its evaluation under missing meta-data."""

__version__ = "0.1.0"

from .aggregation import (
    AggregateEntry,
    AggregateRanking,
    aggregate_baseline_ar,
    aggregate_closed_form,
    aggregate_incremental,
    ranking_weight,
)
from .evaluation import (
    LossTimeCurve,
    MILConfig,
    MILReport,
    Method,
    aggregate_curves,
    build_loss_time_curve,
    loo_experiment,
    mean_interval_loss,
)
from .kernels import BACKEND
from .meta_data import (
    PerformanceMatrix,
    RunRecord,
    SyntheticSpec,
    generate_synthetic,
    load_matrix,
    save_matrix,
)
from .omission import Mode, OmissionSpec, apply_mta, apply_mtd
from .ranking import Ranking, characterize, rank_from_performance, spearman

__all__ = [
    "BACKEND",
    "AggregateEntry",
    "AggregateRanking",
    "LossTimeCurve",
    "MILConfig",
    "MILReport",
    "Method",
    "Mode",
    "OmissionSpec",
    "PerformanceMatrix",
    "Ranking",
    "RunRecord",
    "SyntheticSpec",
    "aggregate_baseline_ar",
    "aggregate_closed_form",
    "aggregate_curves",
    "aggregate_incremental",
    "apply_mta",
    "apply_mtd",
    "build_loss_time_curve",
    "characterize",
    "generate_synthetic",
    "load_matrix",
    "loo_experiment",
    "mean_interval_loss",
    "rank_from_performance",
    "ranking_weight",
    "save_matrix",
    "spearman",
]
