"""Single-chain extended Schwinger model.

The chain state is a complex amplitude psi over the phase coordinate,
evolved by

    i hbar dpsi/dt = -(hbar^2 / 2D) d^2psi/dx^2 + V(x, t) psi,
    V(x, t) = 1/2 mu_E^2 (x - phi_bar(t))^2 + 1/2 D omega_p^2 (1 - cos x),

with the trap centre driven as phi_bar(t) = phi_bar0 + a_D t. Three steppers
share the same 3-point Laplacian: Crank-Nicolson (tridiagonal solve),
DuFort-Frankel (explicit three-level) and classic RK4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .core import BlowUpError, CDWError, ComplexField, Grid, TimeSeries, average_phase, phase_expectation

Scheme = Literal["crank_nicolson", "dufort_frankel", "rk4"]
SignVariant = Literal["paper", "standard"]

BLOW_UP_FACTOR = 1e6
STABLE_FACTOR = 10.0


class SingularMatrixError(CDWError):
    """The Crank-Nicolson system could not be solved."""


@dataclass(frozen=True)
class SchwingerParams:
    D: float = 1.0
    mu_E: float = 0.0
    omega_p: float = 0.0
    phi_bar0: float = 0.0
    a_D: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError(f"D must be > 0, got {self.D}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be > 0, got {self.hbar}")
        if self.mu_E < 0 or self.omega_p < 0:
            raise ValueError("mu_E and omega_p must be nonnegative")

    def trap_center(self, t: float) -> float:
        return self.phi_bar0 + self.a_D * t


@dataclass(frozen=True)
class SchemeState:
    current: ComplexField
    previous: ComplexField
    step_index: int
    dt: float

    def __post_init__(self):
        if self.current.grid != self.previous.grid:
            raise ValueError("current and previous fields must share one grid")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")

    @classmethod
    def start(cls, initial: ComplexField, dt: float) -> "SchemeState":
        return cls(initial, initial, 0, dt)

    @property
    def time(self) -> float:
        return self.step_index * self.dt


def schwinger_potential(phi, t: float, p: SchwingerParams):
    """Site-local potential density; the gradient term lives in the steppers."""
    phi = np.asarray(phi, dtype=float)
    v = 0.5 * np.float64(p.mu_E) ** 2 * (phi - p.trap_center(t)) ** 2 + 0.5 * p.D * p.omega_p**2 * (1.0 - np.cos(phi))
    return float(v) if v.ndim == 0 else v


def laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """3-point Laplacian; fixed grids get zero at the clamped ends."""
    if grid.boundary == "periodic":
        return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / grid.dx**2
    out = np.zeros_like(values)
    out[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / grid.dx**2
    return out


def apply_hamiltonian(values: np.ndarray, grid: Grid, p: SchwingerParams, t: float) -> np.ndarray:
    kin = -(p.hbar**2 / (2.0 * p.D)) * laplacian(values, grid)
    out = kin + schwinger_potential(grid.x, t, p) * values
    if grid.boundary == "fixed":
        out[0] = out[-1] = 0.0
    return out


def hamiltonian_matrix(grid: Grid, p: SchwingerParams, t: float = 0.0) -> np.ndarray:
    """Dense Hamiltonian, built column by column from :func:`apply_hamiltonian`."""
    n = grid.n_points
    eye = np.eye(n, dtype=complex)
    return np.column_stack([apply_hamiltonian(eye[:, k], grid, p, t) for k in range(n)])


def energy_expectation(field: ComplexField, p: SchwingerParams, t: float) -> float:
    psi = field.values
    h_psi = apply_hamiltonian(psi, field.grid, p, t)
    return float(np.real(np.vdot(psi, h_psi)) / np.real(np.vdot(psi, psi)))


def _cyclic_solve(lower, diag, upper, corner_lo, corner_hi, rhs):
    """Solve a cyclic tridiagonal system with one Sherman-Morrison correction.

    ``corner_hi`` sits at (0, n-1), ``corner_lo`` at (n-1, 0).
    """
    n = diag.size
    gamma = -diag[0]
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= corner_lo * corner_hi / gamma
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = upper
    ab[1] = d
    ab[2, :-1] = lower
    u = np.zeros(n, dtype=complex)
    u[0] = gamma
    u[-1] = corner_lo
    sol = solve_banded((1, 1), ab, np.column_stack([rhs, u]), check_finite=False)
    y, z = sol[:, 0], sol[:, 1]
    fac = (y[0] + corner_hi * y[-1] / gamma) / (1.0 + z[0] + corner_hi * z[-1] / gamma)
    return y - fac * z


def step_crank_nicolson(state: SchemeState, p: SchwingerParams) -> SchemeState:
    """One Crank-Nicolson step; the potential is sampled at the half step."""
    field = state.current
    grid = field.grid
    dt = state.dt
    t_mid = state.time + 0.5 * dt
    sigma = 0.5j * dt / p.hbar
    kappa = p.hbar**2 / (2.0 * p.D * grid.dx**2)
    v = schwinger_potential(grid.x, t_mid, p)

    rhs = field.values - sigma * apply_hamiltonian(field.values, grid, p, t_mid)
    n = grid.n_points
    diag = 1.0 + sigma * (2.0 * kappa + v)
    off = np.full(n - 1, -sigma * kappa, dtype=complex)
    try:
        with np.errstate(divide="raise", invalid="raise"):
            if grid.boundary == "periodic":
                new = _cyclic_solve(off, diag, off, -sigma * kappa, -sigma * kappa, rhs)
            else:
                diag[0] = diag[-1] = 1.0
                upper = off.copy()
                lower = off.copy()
                upper[0] = 0.0
                lower[-1] = 0.0
                ab = np.zeros((3, n), dtype=complex)
                ab[0, 1:] = upper
                ab[1] = diag
                ab[2, :-1] = lower
                new = solve_banded((1, 1), ab, rhs, check_finite=False)
    except (LinAlgError, FloatingPointError) as exc:
        raise SingularMatrixError(f"Crank-Nicolson solve failed at step {state.step_index}: {exc}") from exc
    if not np.all(np.isfinite(new)):
        raise SingularMatrixError(f"Crank-Nicolson solve produced non-finite values at step {state.step_index}")
    return SchemeState(ComplexField(grid, new), field, state.step_index + 1, dt)


def dufort_frankel_ratio(dt: float, dx: float, p: SchwingerParams) -> complex:
    """R = -i dt hbar / (2 D dx^2) for the three-level scheme."""
    return -1j * dt * p.hbar / (2.0 * p.D * dx**2)


def step_dufort_frankel(state: SchemeState, p: SchwingerParams, sign_variant: SignVariant = "standard") -> SchemeState:
    """One explicit DuFort-Frankel step.

    ``paper`` takes the difference of the two neighbours,
    ``standard`` their sum (the classical stencil, which keeps constant
    fields fixed when V = 0).
    """
    grid = state.current.grid
    cur = state.current.values
    prev = state.previous.values
    r2 = 2.0 * dufort_frankel_ratio(state.dt, grid.dx, p)
    left = np.roll(cur, 1)
    right = np.roll(cur, -1)
    neighbours = left - right if sign_variant == "paper" else left + right
    v = schwinger_potential(grid.x, state.time, p)
    new = (r2 / (1.0 + r2)) * neighbours + ((1.0 - r2) / (1.0 + r2)) * prev - 1j * state.dt * (v / p.hbar) * cur
    if grid.boundary == "fixed":
        new[0], new[-1] = cur[0], cur[-1]
    return SchemeState(ComplexField(grid, new), state.current, state.step_index + 1, state.dt)


def step_rk4(state: SchemeState, p: SchwingerParams) -> SchemeState:
    grid = state.current.grid
    dt, t = state.dt, state.time

    def rhs(psi, tt):
        return (-1j / p.hbar) * apply_hamiltonian(psi, grid, p, tt)

    y = state.current.values
    k1 = rhs(y, t)
    k2 = rhs(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(y + dt * k3, t + dt)
    new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return SchemeState(ComplexField(grid, new), state.current, state.step_index + 1, dt)


def advance(state: SchemeState, p: SchwingerParams, scheme: Scheme, sign_variant: SignVariant = "standard") -> SchemeState:
    """Dispatch one step. DuFort-Frankel seeds its first step with Crank-Nicolson."""
    if scheme == "crank_nicolson":
        return step_crank_nicolson(state, p)
    if scheme == "rk4":
        return step_rk4(state, p)
    if scheme == "dufort_frankel":
        if state.step_index == 0:
            return step_crank_nicolson(state, p)
        return step_dufort_frankel(state, p, sign_variant)
    raise ValueError(f"unknown scheme {scheme!r}")


def gaussian_packet(grid: Grid, center: float, width: float, k0: float = 0.0) -> ComplexField:
    """Normalized packet exp(-(x - center)^2 / (2 width^2) + i k0 x)."""
    x = grid.x
    psi = np.exp(-((x - center) ** 2) / (2.0 * width**2) + 1j * k0 * x)
    return ComplexField(grid, psi).normalized()


def ground_state_width(p: SchwingerParams, phi: float = 0.0) -> float:
    """Harmonic-oscillator width sqrt(hbar / (D omega)) from the local curvature of V at ``phi``."""
    curvature = p.mu_E**2 + 0.5 * p.D * p.omega_p**2 * np.cos(phi)
    if curvature <= 0:
        raise ValueError("potential is not locally confining at phi")
    omega = np.sqrt(curvature / p.D)
    return float(np.sqrt(p.hbar / (p.D * omega)))


def random_field(grid: Grid, seed: int = 0) -> ComplexField:
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
    return ComplexField(grid, vals).normalized()


def _observables(field: ComplexField, p: SchwingerParams, t: float) -> tuple[float, float, float, float]:
    try:
        mean_arg = average_phase(field)
    except ValueError:
        mean_arg = float("nan")
    return mean_arg, phase_expectation(field), field.norm2(), energy_expectation(field, p, t)


def run_single_chain(
    p: SchwingerParams,
    grid: Grid,
    scheme: Scheme,
    dt: float,
    n_steps: int,
    initial: ComplexField,
    sign_variant: SignVariant = "standard",
    record_every: int = 1,
) -> TimeSeries:
    """Evolve ``initial`` for ``n_steps`` and record observables.

    Columns: ``average_phase`` (unwrapped mean argument, nan when some site
    amplitude is exactly zero), ``phase_expectation`` (<phi>), ``norm2`` and
    ``energy``. Raises :class:`BlowUpError` once norm^2 exceeds 1e6 times its
    initial value.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if initial.grid != grid:
        raise ValueError("initial field lives on a different grid")
    state = SchemeState.start(initial, dt)
    norm0 = initial.norm2()
    rows = [_observables(initial, p, 0.0)]
    times = [0.0]
    for _ in range(n_steps):
        state = advance(state, p, scheme, sign_variant)
        n2 = state.current.norm2()
        if not np.isfinite(n2) or n2 > BLOW_UP_FACTOR * norm0:
            raise BlowUpError(f"{scheme} norm^2 grew beyond {BLOW_UP_FACTOR:g} x initial", state.step_index)
        if state.step_index % record_every == 0 or state.step_index == n_steps:
            rows.append(_observables(state.current, p, state.time))
            times.append(state.time)
    cols = np.array(rows).T
    names = ("average_phase", "phase_expectation", "norm2", "energy")
    return TimeSeries(times, dict(zip(names, cols)))


def tunneled(series: TimeSeries) -> bool:
    """True once <phi> has moved a full well half-width (pi) from its start."""
    phase = series["phase_expectation"]
    return bool(np.max(np.abs(phase - phase[0])) >= np.pi)


@dataclass(frozen=True)
class ScanEntry:
    dt: float
    stable: bool
    blow_up_step: int | None


def stability_scan(
    p: SchwingerParams,
    grid: Grid,
    scheme: Scheme,
    dt_min: float,
    dt_max: float,
    factor: float,
    n_steps: int = 1000,
    initial: ComplexField | None = None,
    sign_variant: SignVariant = "standard",
) -> list[ScanEntry]:
    """Geometric dt sweep; an entry is stable if norm^2 stays within 10x its start for ``n_steps``."""
    if not dt_min < dt_max:
        raise ValueError("dt_min must be < dt_max")
    if not factor > 1:
        raise ValueError("factor must be > 1")
    if initial is None:
        initial = random_field(grid, seed=0)
    norm0 = initial.norm2()
    count = int(np.floor(np.log(dt_max / dt_min) / np.log(factor) + 1e-9)) + 1
    out = []
    for k in range(count):
        dt = dt_min * factor**k
        state = SchemeState.start(initial, dt)
        blow = None
        for _ in range(n_steps):
            try:
                state = advance(state, p, scheme, sign_variant)
            except SingularMatrixError:
                blow = state.step_index + 1
                break
            n2 = state.current.norm2()
            if not np.isfinite(n2) or n2 > STABLE_FACTOR * norm0:
                blow = state.step_index
                break
        out.append(ScanEntry(dt, blow is None, blow))
    return out


def crossover_dt(entries: list[ScanEntry]) -> float | None:
    """Smallest swept dt that went unstable, provided every smaller dt was stable."""
    for e in entries:
        if not e.stable:
            return e.dt
    return None


def spectral_radius(grid: Grid, p: SchwingerParams, t: float = 0.0, iterations: int = 5000, seed: int = 1) -> float:
    """Power-iteration estimate of the largest |eigenvalue| of the Hamiltonian."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.n_points).astype(complex)
    if grid.boundary == "fixed":
        v[0] = v[-1] = 0.0
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iterations):
        w = apply_hamiltonian(v, grid, p, t)
        lam_new = float(np.linalg.norm(w))
        v = w / lam_new
        if abs(lam_new - lam) <= 1e-12 * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return lam


RK4_IMAGINARY_AXIS_LIMIT = 2.0 * np.sqrt(2.0)


def rk4_linear_dt_limit(grid: Grid, p: SchwingerParams, t: float = 0.0) -> float:
    """Largest stable RK4 dt for the linear flow: |dt * lambda_max / hbar| <= 2 sqrt(2)."""
    return RK4_IMAGINARY_AXIS_LIMIT * p.hbar / spectral_radius(grid, p, t)
