"""Continuum sine-Gordon limit of the coupled-pendulum chain.

Dimensionless form phi_tt - phi_zz + sin(phi) = 0 with z = (omega1 / v) x and
tau = omega1 t. The travelling kink is

    phi(z, tau) = 4 arctan(exp(s (z - z0 + beta tau) / sqrt(1 - beta^2))),

s = +1 for a kink and -1 for an antikink, so its phi = pi point sits at
z0 - beta tau.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import BlowUpError, Grid, PhaseField, locate_crossing

#: Energy of the static kink (the Bogomol'nyi saturation value) in dimensionless units.
STATIC_KINK_ENERGY = 8.0


@dataclass(frozen=True)
class SineGordonParams:
    v: float
    omega1: float

    def __post_init__(self):
        if not (self.v > 0 and self.omega1 > 0):
            raise ValueError("v and omega1 must both be > 0")


@dataclass(frozen=True)
class KinkSpec:
    beta: float = 0.0
    sign: Literal[1, -1] = 1
    z0: float = 0.0

    def __post_init__(self):
        if not abs(self.beta) < 1:
            raise ValueError(f"|beta| must be < 1, got {self.beta}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 (kink) or -1 (antikink)")

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.beta**2)


def _argument(z, tau, k: KinkSpec):
    return k.sign * (np.asarray(z, dtype=float) - k.z0 + k.beta * tau) * k.gamma


def kink_exact(z, tau, k: KinkSpec):
    """Phase of the travelling (anti)kink; values lie in [0, 2 pi]."""
    u = _argument(z, tau, k)
    # exp of -|u| only: no overflow, and full relative accuracy on the low tail
    tail = 4.0 * np.arctan(np.exp(-np.abs(u)))
    return np.where(u <= 0, tail, 2.0 * np.pi - tail)


def kink_exact_rate(z, tau, k: KinkSpec):
    """d phi / d tau of :func:`kink_exact`."""
    u = _argument(z, tau, k)
    return 2.0 / np.cosh(u) * k.sign * k.beta * k.gamma


def kink_center_exact(tau: float, k: KinkSpec) -> float:
    return k.z0 - k.beta * tau


def to_dimensionless(x, t, p: SineGordonParams):
    return p.omega1 / p.v * x, p.omega1 * t


def from_dimensionless(z, tau, p: SineGordonParams):
    return p.v / p.omega1 * z, tau / p.omega1


def continuum_params(p) -> SineGordonParams:
    """Map chain parameters to (v, omega1) via v = omega0 d and omega1^2 = E1 / (m_e l^2)."""
    if not p.E1 > 0:
        raise ValueError("E1 must be > 0: without pinning the continuum limit is the plain wave equation")
    if not p.delta_prime > 0:
        raise ValueError("delta_prime must be > 0 for a finite continuum velocity")
    return SineGordonParams(v=float(np.sqrt(p.omega0_sq) * p.d), omega1=float(np.sqrt(p.omega1_sq)))


def kink_field(grid: Grid, k: KinkSpec, tau: float = 0.0) -> PhaseField:
    """Sample the exact kink and its tau-rate on a dimensionless grid."""
    z = grid.x
    return PhaseField(grid, kink_exact(z, tau, k), kink_exact_rate(z, tau, k))


def _lap(phi: np.ndarray, grid: Grid) -> np.ndarray:
    if grid.boundary == "periodic":
        return (np.roll(phi, -1) - 2.0 * phi + np.roll(phi, 1)) / grid.dx**2
    out = np.zeros_like(phi)
    out[1:-1] = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / grid.dx**2
    return out


def sg_acceleration(phi: np.ndarray, grid: Grid) -> np.ndarray:
    acc = _lap(phi, grid) - np.sin(phi)
    if grid.boundary == "fixed":
        acc[0] = acc[-1] = 0.0
    return acc


def sg_energy(field: PhaseField) -> float:
    """Discrete E = sum dz [1/2 phi_tau^2 + 1/2 ((phi_{j+1} - phi_j)/dz)^2 + 1 - cos phi]."""
    phi, vel, dz = field.phases, field.velocities, field.grid.dx
    if field.grid.boundary == "periodic":
        grad = (np.roll(phi, -1) - phi) / dz
    else:
        grad = np.diff(phi) / dz
    return float(dz * (0.5 * np.sum(vel**2) + 0.5 * np.sum(grad**2) + np.sum(1.0 - np.cos(phi))))


@dataclass
class FieldHistory:
    times: np.ndarray
    phases: np.ndarray
    velocities: np.ndarray
    grid: Grid

    def snapshot(self, i: int) -> PhaseField:
        return PhaseField(self.grid, self.phases[i], self.velocities[i])

    def __len__(self):
        return self.times.size


def evolve_sine_gordon(initial: PhaseField, dt: float, n_steps: int, record_every: int = 1) -> FieldHistory:
    """Velocity-Verlet integration of the dimensionless equation on ``initial.grid``.

    Fixed grids hold both end sites at their initial values.
    """
    grid = initial.grid
    if not 0 < dt < grid.dx:
        raise ValueError(f"need 0 < dt < dz for discrete causality, got dt={dt}, dz={grid.dx}")
    phi = initial.phases.copy()
    vel = initial.velocities.copy()
    if grid.boundary == "fixed":
        vel[0] = vel[-1] = 0.0
    e0 = abs(sg_energy(PhaseField(grid, phi, vel))) + 1.0
    times, ph, vl = [0.0], [phi.copy()], [vel.copy()]
    acc = sg_acceleration(phi, grid)
    for n in range(1, n_steps + 1):
        vel += 0.5 * dt * acc
        phi += dt * vel
        acc = sg_acceleration(phi, grid)
        vel += 0.5 * dt * acc
        if n % record_every == 0 or n == n_steps:
            if not np.all(np.isfinite(phi)) or sg_energy(PhaseField(grid, phi, vel)) > 1e6 * e0:
                raise BlowUpError("sine-Gordon evolution diverged", n)
            times.append(n * dt)
            ph.append(phi.copy())
            vl.append(vel.copy())
    return FieldHistory(np.array(times), np.array(ph), np.array(vl), grid)


def sg_residual(k: KinkSpec, grid: Grid, tau: float, dt: float) -> float:
    """Max residual of the exact kink under the discrete leapfrog operator, interior sites."""
    z = grid.x
    dz = grid.dx
    phi_m = kink_exact(z, tau - dt, k)
    phi_0 = kink_exact(z, tau, k)
    phi_p = kink_exact(z, tau + dt, k)
    r = (phi_p - 2 * phi_0 + phi_m) / dt**2
    r = r[1:-1] - (phi_0[2:] - 2 * phi_0[1:-1] + phi_0[:-2]) / dz**2 + np.sin(phi_0[1:-1])
    return float(np.max(np.abs(r)))


def kink_center(phases: np.ndarray, grid: Grid) -> float:
    """Coordinate of the first phi = pi crossing (nan if none)."""
    return grid.x0 + grid.dx * locate_crossing(phases, np.pi)


def kink_width(phases: np.ndarray, grid: Grid) -> float:
    """Distance between the phi = pi/2 and phi = 3 pi/2 crossings."""
    a = locate_crossing(phases, 0.5 * np.pi)
    b = locate_crossing(phases, 1.5 * np.pi)
    return abs(b - a) * grid.dx


def static_kink_width() -> float:
    """Exact pi/2-to-3pi/2 width of the beta = 0 kink, 2 ln(cot(pi/8))."""
    return 2.0 * np.log(1.0 / np.tan(np.pi / 8.0))


def fit_velocity(times, centers) -> float:
    """Least-squares slope of the centre trajectory."""
    slope, _ = np.polyfit(np.asarray(times, float), np.asarray(centers, float), 1)
    return float(slope)
