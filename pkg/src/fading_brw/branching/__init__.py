"""Branching processes in varying environment with fading."""

from .environment import (
    CONVERGES,
    DIVERGES,
    ConstantTail,
    DegenerateTail,
    Environment,
    GeometricTail,
    GrowthFunction,
    PowerTail,
    TailRule,
    environment_from_spec,
)
from .offspring import DEGENERATE, OffspringLaw
from .trajectory import (
    BranchEvent,
    BranchingTrajectory,
    MomentEstimate,
    TrajectorySampler,
    empirical_moments,
    simulate_generations,
    simulate_trajectory,
)

__all__ = [
    "CONVERGES",
    "DIVERGES",
    "DEGENERATE",
    "OffspringLaw",
    "TailRule",
    "DegenerateTail",
    "GeometricTail",
    "PowerTail",
    "ConstantTail",
    "GrowthFunction",
    "Environment",
    "environment_from_spec",
    "BranchEvent",
    "BranchingTrajectory",
    "TrajectorySampler",
    "MomentEstimate",
    "simulate_trajectory",
    "simulate_generations",
    "empirical_moments",
]
