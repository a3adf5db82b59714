from .measures import (
    Entry,
    JudgedResultList,
    TargetedResultList,
    grade_distribution,
    macro_relevant_ratio,
    mean_graded_by_position,
    mean_reciprocal_rank,
    navigational_success_rate,
    overall_relevant_ratio,
    precision_at_k,
    success_at_n,
    url_overlap,
)
from .report import MetricsReport, build_report, write_exports
from .unpool import UnpoolError, unpool

__all__ = [
    "Entry",
    "JudgedResultList",
    "MetricsReport",
    "TargetedResultList",
    "UnpoolError",
    "build_report",
    "grade_distribution",
    "macro_relevant_ratio",
    "mean_graded_by_position",
    "mean_reciprocal_rank",
    "navigational_success_rate",
    "overall_relevant_ratio",
    "precision_at_k",
    "success_at_n",
    "unpool",
    "url_overlap",
    "write_exports",
]
