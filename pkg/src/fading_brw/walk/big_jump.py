"""Conditional Monte Carlo for the single-big-jump regime.

For a realised tree with edges e and increments xi_e, the crossing event
{R_mu^g > x} is split by the edge carrying the largest increment. Conditioning on
every increment except xi_e, the probability that xi_e is the largest increment
and the walk crosses is

    F̄(max(M_{-e}, t_e)),

where M_{-e} is the largest of the other increments and t_e is the smallest
value of xi_e that produces a crossing: minus infinity when some node outside
the subtree below e already exceeds x, and otherwise x - (sub_e - xi_e), with
sub_e the largest node value in that subtree. Summing over edges gives an
unbiased replication value Y with 0 <= Y <= number of edges, provided mu does
not look at the increments and the law has no atoms.
"""

import math
from typing import Optional

import numpy as np

from ..distributions.increments import IncrementLaw
from ..exceptions import HypothesisViolation
from ..utils.logging_utils import get_logger
from .engine import GenerationNodes, WalkRealization
from .stopping import StoppingRule

logger = get_logger(__name__)

CALIBRATION_TARGET = 0.1


def supports_exact_conditioning(stop: StoppingRule) -> bool:
    """True when mu is fixed before any increment is drawn."""
    return stop.decided_before_walk and stop.increment_independent


def check_big_jump_law(law: IncrementLaw) -> None:
    """
    Raises:
        HypothesisViolation: For laws with atoms or without a long tail
    """
    if law.is_lattice:
        raise HypothesisViolation("Big-jump estimator needs an atomless increment law")
    if not law.is_long_tailed():
        raise HypothesisViolation(f"Big-jump estimator needs a long-tailed law, got {law!r}")


def calibration_level(law: IncrementLaw, mean_edges: float) -> float:
    """Level where a single edge crosses with probability about 0.1 / E(number of edges)."""
    p = min(0.5, CALIBRATION_TARGET / max(1.0, mean_edges))
    return law.quantile(p)


def _segment_top_two(keys: np.ndarray, segments: np.ndarray, n_segments: int):
    """Per-segment largest value, its position and the runner-up (-inf if absent)."""
    order = np.lexsort((-keys, segments))
    counts = np.bincount(segments, minlength=n_segments)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    top_pos = np.full(n_segments, -1, dtype=np.int64)
    top = np.full(n_segments, -math.inf)
    second = np.full(n_segments, -math.inf)
    present = counts > 0
    top_pos[present] = order[starts[present]]
    top[present] = keys[top_pos[present]]
    pairs = counts > 1
    second[pairs] = keys[order[starts[pairs] + 1]]
    return top, top_pos, second


def _subtree_maxima(nodes: list[GenerationNodes]) -> list[np.ndarray]:
    """Largest node value in the subtree rooted at every node, bottom-up."""
    sub = [gen.values.copy() for gen in nodes]
    for n in range(len(nodes) - 1, 0, -1):
        np.maximum.at(sub[n - 1], nodes[n].parents, sub[n])
    return sub


def _outside_maxima(nodes: list[GenerationNodes], sub: list[np.ndarray]) -> list[np.ndarray]:
    """Largest node value outside the subtree of every node (root value 0 included)."""
    outside: list[np.ndarray] = []
    parent_out = np.array([-math.inf])
    parent_val = np.array([0.0])
    for n, gen in enumerate(nodes):
        n_parents = len(parent_val)
        top, top_pos, second = _segment_top_two(sub[n], gen.parents, n_parents)
        own = np.arange(len(gen.values))
        siblings = np.where(top_pos[gen.parents] == own, second[gen.parents], top[gen.parents])
        out = np.maximum(np.maximum(parent_out[gen.parents], parent_val[gen.parents]), siblings)
        outside.append(out)
        parent_out, parent_val = out, gen.values
    return outside


def conditional_crossing_probability(
    realization: WalkRealization, law: IncrementLaw, x: float
) -> float:
    """
    Replication value Y for P(R_mu^g > x) from one realised tree.

    Args:
        realization: Walk run with ``keep_tree=True`` and mu decided before the walk
        law: Increment law the tree was run with
        x: Level

    Returns:
        Y in [0, number of edges]; exactly 1 for x < 0
    """
    if x < 0:
        return 1.0
    if realization.nodes is None:
        raise ValueError("Big-jump replication needs the full tree (keep_tree=True)")
    mu = realization.mu
    depth = len(realization.nodes) if mu is None else min(int(mu), len(realization.nodes))
    nodes = realization.nodes[:depth]
    if not nodes:
        return 0.0

    sub = _subtree_maxima(nodes)
    outside = _outside_maxima(nodes, sub)
    xi = np.concatenate([gen.increments for gen in nodes])
    sub_all = np.concatenate(sub)
    out_all = np.concatenate(outside)

    order = np.argsort(xi)[::-1]
    first = xi[order[0]]
    second = xi[order[1]] if xi.size > 1 else -math.inf
    others = np.full(xi.size, first)
    others[order[0]] = second

    needed = np.where(np.maximum(out_all, 0.0) > x, -math.inf, x - (sub_all - xi))
    level = np.maximum(others, needed)
    finite = np.isfinite(level)
    probs = np.ones(level.size)
    probs[finite] = law.tail(level[finite])
    return float(np.sum(probs))


def big_jump_estimate(
    env,
    law: IncrementLaw,
    boundary,
    stop: StoppingRule,
    x: float,
    n_runs: int,
    rng: Optional[int] = None,
    **kwargs,
):
    """
    Estimate P(R_mu^g > x) with the conditional estimator, calibrated against crude runs.

    Thin wrapper over ``estimate_crossing(mode="big-jump")``; ``rng`` is the
    master seed. Extra keyword arguments are passed through.

    Raises:
        CalibrationFailed: If crude and big-jump estimates disagree at the calibration level
    """
    from ..montecarlo.estimators import estimate_crossing

    return estimate_crossing(
        env, law, boundary, stop, x, n_runs, mode="big-jump", master_seed=rng, **kwargs
    )
