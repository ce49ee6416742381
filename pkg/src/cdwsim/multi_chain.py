"""Classical multi-chain model with Peierls interchain coupling.

Each site n carries one chain phase phi_n. The full potential is

    U = sum_n E1 (1 - cos phi_n) + E2 (phi_n - theta)^2 + delta' (1 - cos(phi_n - phi_{n-1}))

and in the nearest-neighbour harmonic reduction the cosine coupling becomes
delta'/2 (phi_{n+1} - phi_n)^2 with the E2 term dropped. Treating each site
as a pendulum of mass m_e and length l gives

    phi_i'' = omega0^2 (phi_{i+1} - 2 phi_i + phi_{i-1}) - omega1^2 sin(phi_i),

omega0^2 = delta' / (m_e l^2), omega1^2 = E1 / (m_e l^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import Grid, PhaseField, RegimeError, TimeSeries, locate_crossing, winding_number
from .sine_gordon import KinkSpec, continuum_params, kink_exact, kink_exact_rate, to_dimensionless


@dataclass(frozen=True)
class MultiChainParams:
    D1: float = 1.0
    E1: float = 1.0
    E2: float = 0.0
    delta_prime: float = 400.0
    theta: float = 0.0
    m_e: float = 1.0
    l: float = 1.0
    d: float = 0.05
    eta: float = 20.0
    tau_bar: float = 0.0
    regime_ratio: float = 10.0

    def __post_init__(self):
        for name in ("D1", "m_e", "l", "d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("E1", "E2", "delta_prime", "eta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def inertia(self) -> float:
        return self.m_e * self.l**2

    @property
    def omega0_sq(self) -> float:
        return self.delta_prime / self.inertia

    @property
    def omega1_sq(self) -> float:
        return self.E1 / self.inertia

    @property
    def rho(self) -> float:
        """Mass density m_e / d along the chain."""
        return self.m_e / self.d

    @property
    def v(self) -> float:
        return float(np.sqrt(self.omega0_sq) * self.d)

    @property
    def kink_regime(self) -> bool:
        """delta' >> E1 >> E2, with ">>" meaning a factor of ``regime_ratio``."""
        r = self.regime_ratio
        return self.delta_prime >= r * self.E1 and self.E1 >= r * self.E2


def _bonds(phi: np.ndarray, grid: Grid) -> np.ndarray:
    if grid.boundary == "periodic":
        return np.roll(phi, -1) - phi
    return np.diff(phi)


def multichain_potential(
    phases: PhaseField,
    p: MultiChainParams,
    mode: Literal["exact", "harmonic"] = "exact",
    include_e2: bool | None = None,
) -> float:
    """Total potential energy U of the chain.

    ``exact`` keeps the cosine coupling and, by default, the E2 term;
    ``harmonic`` uses the quadratic coupling and drops E2 unless
    ``include_e2`` is set.
    """
    phi = phases.phases
    if include_e2 is None:
        include_e2 = mode == "exact"
    bonds = _bonds(phi, phases.grid)
    # 2 sin^2(x/2) == 1 - cos x without cancellation at small angles
    u = p.E1 * np.sum(2.0 * np.sin(0.5 * phi) ** 2)
    if include_e2:
        u += p.E2 * np.sum((phi - p.theta) ** 2)
    if mode == "exact":
        u += p.delta_prime * np.sum(2.0 * np.sin(0.5 * bonds) ** 2)
    elif mode == "harmonic":
        u += 0.5 * p.delta_prime * np.sum(bonds**2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(u)


def kinetic_energy(state: PhaseField, p: MultiChainParams) -> float:
    return float(0.5 * p.inertia * np.sum(state.velocities**2))


def chain_energy(state: PhaseField, p: MultiChainParams, include_e2: bool = False) -> float:
    """Kinetic plus harmonic potential energy, the quantity conserved by the equations of motion."""
    return kinetic_energy(state, p) + multichain_potential(state, p, "harmonic", include_e2)


def accelerations(state: PhaseField, p: MultiChainParams, include_e2: bool = False) -> np.ndarray:
    phi = state.phases
    grid = state.grid
    if grid.n_points < 3:
        raise ValueError("need at least 3 sites")
    if grid.boundary == "periodic":
        coupling = np.roll(phi, -1) - 2.0 * phi + np.roll(phi, 1)
    else:
        coupling = np.zeros_like(phi)
        coupling[1:-1] = phi[2:] - 2.0 * phi[1:-1] + phi[:-2]
    acc = p.omega0_sq * coupling - p.omega1_sq * np.sin(phi)
    if include_e2:
        acc -= 2.0 * p.E2 / p.inertia * (phi - p.theta)
    if grid.boundary == "fixed":
        acc[0] = acc[-1] = 0.0
    return acc


def step_leapfrog(state: PhaseField, p: MultiChainParams, dt: float, include_e2: bool = False) -> PhaseField:
    """One kick-drift-kick (velocity Verlet) step. Fixed ends stay clamped."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    vel = state.velocities + 0.5 * dt * accelerations(state, p, include_e2)
    if state.grid.boundary == "fixed":
        vel[0] = vel[-1] = 0.0
    mid = PhaseField(state.grid, state.phases + dt * vel, vel)
    vel = vel + 0.5 * dt * accelerations(mid, p, include_e2)
    return PhaseField(state.grid, mid.phases, vel)


def kink_initial_state(p: MultiChainParams, grid: Grid, k: KinkSpec) -> PhaseField:
    """Lattice sample of the continuum kink, positions x_i = grid.x, z = (omega1/v) x.

    ``k.z0`` is in dimensionless units.
    """
    sg = continuum_params(p)
    z, _ = to_dimensionless(grid.x, 0.0, sg)
    phases = kink_exact(z, 0.0, k)
    velocities = sg.omega1 * kink_exact_rate(z, 0.0, k)
    if grid.boundary == "fixed":
        velocities[0] = velocities[-1] = 0.0
    return PhaseField(grid, phases, velocities)


def kink_center_index(phases: np.ndarray) -> float:
    """Fractional site index of the first phi = pi crossing."""
    return locate_crossing(phases, np.pi)


@dataclass
class KinkRun:
    series: TimeSeries
    final: PhaseField
    velocity_fit: float
    expected_velocity: float


def run_kink_transport(
    p: MultiChainParams,
    grid: Grid,
    beta: float,
    n_steps: int,
    dt: float,
    z0: float = 0.0,
    include_e2: bool = False,
    record_every: int = 10,
) -> KinkRun:
    """Launch a lattice kink and track it.

    Records ``center_index`` (fractional site), ``center_x``, ``winding`` and
    ``energy`` per snapshot. ``velocity_fit`` is the least-squares slope of
    ``center_x``; ``expected_velocity`` is -v beta, the drift of the kink's
    phi = pi level set.
    """
    if not p.kink_regime:
        raise RegimeError(
            f"kink transport needs delta' >> E1 >> E2 (ratio {p.regime_ratio:g}); "
            f"got delta'={p.delta_prime:g}, E1={p.E1:g}, E2={p.E2:g}"
        )
    if not np.isclose(grid.dx, p.d, rtol=1e-12, atol=0.0):
        raise ValueError(f"grid.dx ({grid.dx}) must equal the pendulum spacing d ({p.d})")
    state = kink_initial_state(p, grid, KinkSpec(beta=beta, sign=1, z0=z0))
    rows, times = [], []

    def record(s: PhaseField, t: float):
        idx = kink_center_index(s.phases)
        rows.append((idx, grid.x0 + idx * grid.dx, winding_number(s), chain_energy(s, p, include_e2)))
        times.append(t)

    record(state, 0.0)
    for n in range(1, n_steps + 1):
        state = step_leapfrog(state, p, dt, include_e2)
        if n % record_every == 0 or n == n_steps:
            record(state, n * dt)
    cols = np.array(rows).T
    series = TimeSeries(times, {
        "center_index": cols[0],
        "center_x": cols[1],
        "winding": cols[2].astype(int),
        "energy": cols[3],
    })
    ok = np.isfinite(series["center_x"])
    slope = float(np.polyfit(series.times[ok], series["center_x"][ok], 1)[0]) if ok.sum() >= 2 else float("nan")
    return KinkRun(series, state, slope, -p.v * beta)
