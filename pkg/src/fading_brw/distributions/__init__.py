"""Increment laws and their class diagnostics."""

from .classes import ClassReport, check_class_membership, convolution_tail, is_heavy_tailed
from .increments import (
    ExponentialLaw,
    IncrementLaw,
    LatticeLaw,
    LognormalLaw,
    ParetoLaw,
    WeibullLaw,
    law_from_spec,
)

__all__ = [
    "IncrementLaw",
    "ParetoLaw",
    "LognormalLaw",
    "WeibullLaw",
    "ExponentialLaw",
    "LatticeLaw",
    "law_from_spec",
    "ClassReport",
    "check_class_membership",
    "convolution_tail",
    "is_heavy_tailed",
]
