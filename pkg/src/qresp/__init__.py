"""Quantum reservoir computing with extended echo-state-property diagnostics."""

from . import benchmarks, espmetrics, qmat, reservoir, sweep

__all__ = ["benchmarks", "espmetrics", "qmat", "reservoir", "sweep"]
__version__ = "0.1.0"
