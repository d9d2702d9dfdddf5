"""Analytic tail asymptotics and H-series weights."""

from .asymptotics import (
    EtaEstimate,
    HSeriesResult,
    HSeriesSpec,
    beta_function,
    example2_constant,
    example2_integral,
    expected_eta,
    h_series,
    theorem2_limit,
    veraverbeke_limit,
)
from .weights import EmpiricalWeights, IndependentWeights, Weights, weights_for

__all__ = [
    "HSeriesSpec",
    "HSeriesResult",
    "EtaEstimate",
    "h_series",
    "veraverbeke_limit",
    "theorem2_limit",
    "beta_function",
    "example2_constant",
    "example2_integral",
    "expected_eta",
    "Weights",
    "IndependentWeights",
    "EmpiricalWeights",
    "weights_for",
]
