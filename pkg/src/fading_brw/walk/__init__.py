"""Boundaries, stopping rules and the branching random walk itself."""

from .big_jump import (
    big_jump_estimate,
    calibration_level,
    check_big_jump_law,
    conditional_crossing_probability,
    supports_exact_conditioning,
)
from .boundaries import Boundary, ClassCheck, boundary_from_spec, eval_boundary
from .engine import (
    DEFAULT_HORIZON_CAP,
    GenerationFront,
    GenerationNodes,
    WalkEngine,
    WalkRealization,
    WalkStreams,
    crossing_time,
    eta,
    rightmost_over_stop,
    run_walk,
)
from .enumeration import (
    enumerate_crossing_probability,
    enumerate_crossing_time_distribution,
    enumerate_generations,
)
from .stopping import (
    BOTH,
    HM,
    MO,
    Certificate,
    Decay,
    FadingTime,
    Fixed,
    FirstPassageBelow,
    GeometricMu,
    IndependentLaw,
    InfiniteHorizon,
    MuLaw,
    PowerMu,
    StoppingRule,
    TabulatedMu,
    light_tail_certificate,
    mu_z_certificate,
    realize_stop,
    stopping_from_spec,
)

__all__ = [
    "Boundary",
    "ClassCheck",
    "boundary_from_spec",
    "eval_boundary",
    "DEFAULT_HORIZON_CAP",
    "GenerationFront",
    "GenerationNodes",
    "WalkEngine",
    "WalkRealization",
    "WalkStreams",
    "run_walk",
    "rightmost_over_stop",
    "crossing_time",
    "eta",
    "big_jump_estimate",
    "calibration_level",
    "check_big_jump_law",
    "conditional_crossing_probability",
    "supports_exact_conditioning",
    "enumerate_crossing_probability",
    "enumerate_crossing_time_distribution",
    "enumerate_generations",
    "HM",
    "MO",
    "BOTH",
    "Certificate",
    "Decay",
    "MuLaw",
    "GeometricMu",
    "PowerMu",
    "TabulatedMu",
    "StoppingRule",
    "Fixed",
    "IndependentLaw",
    "FadingTime",
    "FirstPassageBelow",
    "InfiniteHorizon",
    "realize_stop",
    "mu_z_certificate",
    "light_tail_certificate",
    "stopping_from_spec",
]
