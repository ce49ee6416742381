"""Charge-density-wave soliton transport: single-chain quantum steppers,
Peierls-coupled pendulum chains, the sine-Gordon continuum limit and
Gaussian-wavefunctional tunneling."""

from .core import BlowUpError, CDWError, ComplexField, Grid, PhaseField, RegimeError, TimeSeries, average_phase, winding_number

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CDWError",
    "ComplexField",
    "Grid",
    "PhaseField",
    "RegimeError",
    "TimeSeries",
    "average_phase",
    "winding_number",
]
