"""Deterministic seed derivation for parallel replications.

Replication i of a study with master seed s and key prefix p is driven by
``SeedSequence(s, spawn_key=(*p, i))``, which is split into the tree, increment
and stop streams. The derivation depends on the global replication index only,
so the realised runs do not depend on how they are grouped into batches or on
the number of workers.
"""

from typing import Optional

import numpy as np

from ..utils.logging_utils import get_logger
from ..walk.engine import WalkStreams

logger = get_logger(__name__)

SEED_SCHEME = "numpy SeedSequence(master, spawn_key=(*prefix, replication)).spawn(3)"


def resolve_master_seed(seed: Optional[int]) -> int:
    """Return ``seed``, or fresh OS entropy (logged) when it is None."""
    if seed is not None:
        if seed < 0:
            raise ValueError(f"Master seed must be non-negative, got {seed}")
        return int(seed)
    fresh = int(np.random.SeedSequence().entropy)
    logger.info(f"No master seed given; using {fresh}")
    return fresh


def replication_seed(
    master_seed: int, replication: int, prefix: tuple[int, ...] = ()
) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(*prefix, replication))


def replication_streams(
    master_seed: int, replication: int, prefix: tuple[int, ...] = ()
) -> WalkStreams:
    """Tree, increment and stop streams of one replication."""
    return WalkStreams.from_seed(replication_seed(master_seed, replication, prefix))


def batch_plan(n_runs: int, batch_size: int) -> list[tuple[int, int, int]]:
    """
    Split ``n_runs`` replications into batches.

    Returns:
        List of (batch index, first replication, batch size)

    Example:
        >>> batch_plan(5, 2)
        [(0, 0, 2), (1, 2, 2), (2, 4, 1)]
    """
    if n_runs < 0:
        raise ValueError(f"n_runs must be non-negative, got {n_runs}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    return [
        (b, start, min(batch_size, n_runs - start))
        for b, start in enumerate(range(0, n_runs, batch_size))
    ]
