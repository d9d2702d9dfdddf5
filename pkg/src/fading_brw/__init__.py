"""Fading branching random walks - simulation, exact oracles and tail asymptotics."""

__version__ = "0.1.0"
