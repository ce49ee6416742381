"""Grids, field containers, observables and topological diagnostics.

All quantities are dimensionless with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

TWO_PI = 2.0 * np.pi

Boundary = Literal["periodic", "fixed"]


class CDWError(Exception):
    """Base class for errors raised by the simulation modules."""


class BlowUpError(CDWError):
    """Raised when a run leaves its stability envelope."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class RegimeError(CDWError):
    """Raised when parameters fall outside the regime an operation requires."""


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid with ``n_points`` sites spaced ``dx`` apart, starting at ``x0``."""

    n_points: int
    dx: float
    boundary: Boundary = "fixed"
    x0: float = 0.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError(f"n_points must be an integer >= 3, got {self.n_points}")
        if not self.dx > 0:
            raise ValueError(f"dx must be > 0, got {self.dx}")
        if self.boundary not in ("periodic", "fixed"):
            raise ValueError(f"boundary must be 'periodic' or 'fixed', got {self.boundary!r}")

    @classmethod
    def spanning(cls, lo: float, hi: float, n_points: int, boundary: Boundary = "fixed") -> "Grid":
        """Grid whose first and last sites sit exactly on ``lo`` and ``hi``."""
        return cls(n_points, (hi - lo) / (n_points - 1), boundary, lo)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n_points)

    @property
    def length(self) -> float:
        return self.dx * (self.n_points - 1)


@dataclass
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(
                f"values has shape {self.values.shape}, expected ({self.grid.n_points},)"
            )

    def norm2(self) -> float:
        """Discrete L2 norm squared, sum |psi_j|^2 dx."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dx)

    def normalized(self) -> "ComplexField":
        return ComplexField(self.grid, self.values / np.sqrt(self.norm2()))


@dataclass
class PhaseField:
    grid: Grid
    phases: np.ndarray
    velocities: np.ndarray = field(default=None)

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        if self.velocities is None:
            self.velocities = np.zeros_like(self.phases)
        self.velocities = np.asarray(self.velocities, dtype=float)
        n = self.grid.n_points
        if self.phases.shape != (n,) or self.velocities.shape != (n,):
            raise ValueError(f"phases and velocities must both have shape ({n},)")

    def copy(self) -> "PhaseField":
        return PhaseField(self.grid, self.phases.copy(), self.velocities.copy())


class TimeSeries:
    """Named real-valued records sampled at strictly increasing times."""

    def __init__(self, times, columns: dict[str, np.ndarray]):
        self.times = np.asarray(times, dtype=float)
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        self.columns = {}
        for name, col in columns.items():
            col = np.asarray(col)
            if col.shape != self.times.shape:
                raise ValueError(f"column {name!r} has {col.size} records, expected {self.times.size}")
            self.columns[name] = col

    def __len__(self):
        return self.times.size

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    @property
    def records(self) -> list[dict[str, float]]:
        return [{k: v[i] for k, v in self.columns.items()} for i in range(len(self))]


def wrap_phase(dphi):
    """Map phase increments to the nearest branch, (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(dphi), TWO_PI)


def winding_number(field: PhaseField) -> int:
    """Topological charge of a phase profile.

    Fixed grids count the net end-to-end advance in units of 2*pi. Periodic
    grids sum nearest-branch increments around the ring, which assumes no
    cell jumps by more than pi (resolve kink cores with >= 8 cells).
    """
    phi = field.phases
    if field.grid.boundary == "periodic":
        total = np.sum(wrap_phase(np.diff(np.append(phi, phi[0]))))
    else:
        total = phi[-1] - phi[0]
    return int(np.rint(total / TWO_PI))


def average_phase(field: ComplexField | PhaseField) -> float:
    """Mean phase of a field.

    For a :class:`PhaseField` this is the plain mean of the phases. For a
    :class:`ComplexField` the site arguments are unwrapped along the grid
    (nearest branch, starting from the principal value at site 0) before
    averaging.
    """
    if isinstance(field, PhaseField):
        return float(np.mean(field.phases))
    values = field.values
    if values.size == 0:
        raise ValueError("empty field")
    if np.any(values == 0):
        raise ValueError("phase undefined at sites with zero amplitude")
    return float(np.mean(np.unwrap(np.angle(values))))


def phase_expectation(field: ComplexField) -> float:
    """Probability-weighted mean of the grid coordinate, <phi> = sum x |psi|^2 / sum |psi|^2."""
    w = np.abs(field.values) ** 2
    return float(np.sum(field.grid.x * w) / np.sum(w))


def locate_crossing(values: np.ndarray, level: float) -> float:
    """Fractional index of the first crossing of ``level``, linearly interpolated.

    Returns ``nan`` if the profile never crosses the level.
    """
    s = np.asarray(values, dtype=float) - level
    exact = np.flatnonzero(s == 0.0)
    change = np.flatnonzero(s[:-1] * s[1:] < 0)
    candidates = []
    if exact.size:
        candidates.append(float(exact[0]))
    if change.size:
        i = change[0]
        candidates.append(i + s[i] / (s[i] - s[i + 1]))
    return min(candidates) if candidates else float("nan")
