"""Replication management, estimators and deterministic seeding."""

from .estimators import (
    AUTO,
    BIG_JUMP,
    CRUDE,
    RATIO_COLUMNS,
    BatchStats,
    CrossingEstimator,
    EstimateResult,
    default_asymptote,
    estimate_crossing,
    estimate_weights,
    ratio_study,
    summarize,
    wilson_interval,
)
from .seeding import (
    SEED_SCHEME,
    batch_plan,
    replication_seed,
    replication_streams,
    resolve_master_seed,
)

__all__ = [
    "CRUDE",
    "BIG_JUMP",
    "AUTO",
    "RATIO_COLUMNS",
    "BatchStats",
    "EstimateResult",
    "CrossingEstimator",
    "estimate_crossing",
    "ratio_study",
    "estimate_weights",
    "default_asymptote",
    "summarize",
    "wilson_interval",
    "SEED_SCHEME",
    "batch_plan",
    "replication_seed",
    "replication_streams",
    "resolve_master_seed",
]
