"""Gaussian wavefunctionals, false-vacuum structure and tunneling matrix elements.

Functional integrals are truncated to ``n`` independent site amplitudes
phi_1..phi_n, each entering exponents with weight dx. A Gaussian
wavefunctional is

    Psi[phi] = c exp(-alpha dx sum_j (phi_j - center_j)^2),  c = (2 alpha dx / pi)^(n/4).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.special import erfc

from .core import CDWError, Grid, PhaseField, winding_number

Method = Literal["closed_form", "quadrature", "monte_carlo"]
StepMode = Literal["all_sites", "per_site"]

MAX_QUADRATURE_MODES = 6
QUADRATURE_BUDGET = 2**24
AGREEMENT_RTOL = 1e-6


class NotDoubleWellError(CDWError):
    pass


class DimensionError(CDWError):
    pass


class DisagreementError(CDWError):
    pass


class UnsupportedMethodError(CDWError):
    pass


# ---------------------------------------------------------------------------
# false-vacuum potential


@dataclass(frozen=True)
class VEPotentialParams:
    """Generalized extended sine-Gordon potential.

    ``asymmetry`` scales the cross term -4 C2 phi phi0 (phi - phi0)^2. At its
    default of 1 the three terms collapse to C1 u^2 + C2 u^4 with
    u = phi - phi0, which is symmetric about phi0, so distinct false and true
    vacua only appear for ``asymmetry != 1``.
    """

    C1: float
    C2: float
    phi0: float
    asymmetry: float = 1.0

    @property
    def double_well(self) -> bool:
        return len(_local_minima(self)) >= 2


def v_e(phi, p: VEPotentialParams):
    phi = np.asarray(phi, dtype=float)
    u = phi - p.phi0
    val = p.C1 * u**2 - 4.0 * p.asymmetry * p.C2 * phi * p.phi0 * u**2 + p.C2 * (phi**2 - p.phi0**2) ** 2
    return float(val) if val.ndim == 0 else val


def v_e_derivative(phi, p: VEPotentialParams):
    phi = np.asarray(phi, dtype=float)
    u = phi - p.phi0
    val = (
        2.0 * p.C1 * u
        - 4.0 * p.asymmetry * p.C2 * p.phi0 * (u**2 + 2.0 * phi * u)
        + 4.0 * p.C2 * phi * (phi**2 - p.phi0**2)
    )
    return float(val) if val.ndim == 0 else val


def _scan_window(p: VEPotentialParams) -> tuple[float, float]:
    r = 3.0 * abs(p.phi0) + 1.0
    return -r, r


def _bisect(f, a: float, b: float, tol: float = 1e-10) -> float:
    fa = f(a)
    if fa == 0.0:
        return a
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _critical_points(p: VEPotentialParams, n_scan: int = 20001) -> list[tuple[float, str]]:
    lo, hi = _scan_window(p)
    xs = np.linspace(lo, hi, n_scan)
    dv = v_e_derivative(xs, p)
    out = []
    for i in range(n_scan - 1):
        a, b = dv[i], dv[i + 1]
        if a < 0 <= b or a <= 0 < b:
            kind = "min"
        elif a > 0 >= b or a >= 0 > b:
            kind = "max"
        else:
            continue
        if a == 0 and i > 0:
            continue  # already counted as the right end of the previous cell
        out.append((_bisect(lambda x: v_e_derivative(x, p), xs[i], xs[i + 1]), kind))
    return out


def _local_minima(p: VEPotentialParams) -> list[float]:
    return [x for x, kind in _critical_points(p) if kind == "min"]


@dataclass(frozen=True)
class Vacua:
    phi_F: float
    phi_T: float
    delta_E_gap: float
    phi_barrier: float

    def __iter__(self):
        return iter((self.phi_F, self.phi_T, self.delta_E_gap))


def find_vacua(p: VEPotentialParams) -> Vacua:
    """Locate the false (higher) and true (lower) minima of V_E.

    Dense derivative scan over [-3|phi0| - 1, 3|phi0| + 1], then bisection
    of V_E' to 1e-10. Also returns the barrier top between the two wells.
    """
    crit = _critical_points(p)
    minima = [x for x, kind in crit if kind == "min"]
    if len(minima) < 2:
        raise NotDoubleWellError(f"V_E has {len(minima)} local minimum in the scan window, need 2")
    minima.sort(key=lambda x: v_e(x, p))
    phi_T, phi_F = minima[0], minima[-1]
    lo, hi = sorted((phi_F, phi_T))
    maxima = [x for x, kind in crit if kind == "max" and lo < x < hi]
    barrier = max(maxima, key=lambda x: v_e(x, p)) if maxima else 0.5 * (lo + hi)
    return Vacua(phi_F, phi_T, v_e(phi_F, p) - v_e(phi_T, p), barrier)


def alpha_from_separation(L: float) -> float:
    """Gaussian width set by the pair separation, alpha = 1 / L."""
    if not L > 0:
        raise ValueError(f"separation must be > 0, got {L}")
    return 1.0 / L


# ---------------------------------------------------------------------------
# wavefunctionals


@dataclass(frozen=True)
class Wavefunctional:
    center: np.ndarray
    alpha: float
    dx: float
    c: float = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.dx > 0:
            raise ValueError(f"dx must be > 0, got {self.dx}")
        if self.c is None:
            object.__setattr__(self, "c", (2.0 * self.alpha * self.dx / np.pi) ** (self.n_modes / 4.0))

    @property
    def n_modes(self) -> int:
        return self.center.size

    @property
    def weight(self) -> float:
        """Per-mode exponent coefficient alpha * dx."""
        return self.alpha * self.dx

    def __call__(self, phi) -> np.ndarray:
        """Evaluate on configurations ``phi`` of shape (..., n_modes)."""
        u = np.asarray(phi, dtype=float) - self.center
        return self.c * np.exp(-self.weight * np.sum(u**2, axis=-1))

    def truncated(self, n: int) -> "Wavefunctional":
        """Keep the first ``n`` modes, renormalized."""
        return Wavefunctional(self.center[:n], self.alpha, self.dx)


def gaussian_wavefunctional(center, alpha: float, grid: Grid | float = 1.0) -> Wavefunctional:
    """Normalized Gaussian about ``center``; ``grid`` supplies dx (a Grid or a bare spacing)."""
    dx = grid.dx if isinstance(grid, Grid) else float(grid)
    return Wavefunctional(center, alpha, dx)


def wavefunctional_from_lagrangian(
    field_values,
    lagrangian_density: Callable[[np.ndarray, np.ndarray], np.ndarray],
    beta_coeff: float,
    t_p: float,
    grid: Grid,
    c: float = 1.0,
) -> float:
    """c exp(-beta t_p sum_j dx L(phi_j, dphi_j)) with forward-difference gradients.

    Fixed grids give the last site zero gradient; periodic grids wrap.
    Returns exactly 0.0 when the exponent drops below -700.
    """
    if not beta_coeff > 0:
        raise ValueError("beta_coeff must be > 0")
    phi = np.asarray(field_values, dtype=float)
    if grid.boundary == "periodic":
        grad = (np.roll(phi, -1) - phi) / grid.dx
    else:
        grad = np.append(np.diff(phi) / grid.dx, 0.0)
    action = np.sum(grid.dx * np.asarray(lagrangian_density(phi, grad), dtype=float))
    exponent = -beta_coeff * t_p * action
    if exponent < -700.0:
        return 0.0
    if exponent > 700.0:
        raise OverflowError(f"wavefunctional exponent {exponent:.3g} overflows")
    return float(c * np.exp(exponent))


# ---------------------------------------------------------------------------
# tunneling matrix element


@dataclass(frozen=True)
class TunnelingResult:
    t_if: float
    j: float
    n_modes: int
    method: str


def _pair_setup(psi_i: Wavefunctional, psi_f: Wavefunctional, threshold, n_modes: int):
    if psi_i.n_modes < n_modes or psi_f.n_modes < n_modes:
        raise DimensionError(f"wavefunctionals carry fewer than n_modes={n_modes} modes")
    if psi_i.dx != psi_f.dx:
        raise ValueError("wavefunctionals must share one grid spacing")
    if psi_i.n_modes != n_modes:
        psi_i = psi_i.truncated(n_modes)
    if psi_f.n_modes != n_modes:
        psi_f = psi_f.truncated(n_modes)
    thr = np.broadcast_to(np.asarray(threshold, dtype=float), (n_modes,)).copy()
    return psi_i, psi_f, thr


def _truncated_moments(A: float, s0: np.ndarray):
    """int_{s0}^inf s^k exp(-A s^2) ds for k = 0, 1, 2 (s0 may be -inf)."""
    s0 = np.asarray(s0, dtype=float)
    rA = np.sqrt(A)
    m0 = 0.5 * np.sqrt(np.pi / A) * erfc(rA * s0)
    finite = np.isfinite(s0)
    g = np.where(finite, np.exp(-A * np.where(finite, s0, 0.0) ** 2), 0.0)
    g = np.where(finite, g, 0.0)
    m1 = g / (2.0 * A)
    m2 = np.where(finite, np.where(finite, s0, 0.0) * g, 0.0) / (2.0 * A) + m0 / (2.0 * A)
    return m0, m1, m2


def _mode_integrals(psi_i, psi_f, thr):
    """Per-mode pieces of the closed form.

    Returns (restricted overlap, full overlap, restricted I_f, restricted I_i),
    where I_x = int exp(-A (phi - m)^2) (4 a_x^2 (phi - c_x)^2 - 2 a_x) over the
    mode, i.e. the contribution of d^2/dphi_j^2 acting on Psi_x.
    """
    ai, af = psi_i.weight, psi_f.weight
    p, q = psi_i.center, psi_f.center
    A = ai + af
    m = (ai * p + af * q) / A
    m0, m1, m2 = _truncated_moments(A, thr - m)
    full0 = np.sqrt(np.pi / A) * np.ones_like(m)

    def poly(a, cen):
        # (phi - cen) = s + (m - cen)
        h = m - cen
        return 4.0 * a**2 * (m2 + 2.0 * h * m1 + h**2 * m0) - 2.0 * a * m0

    return m0, full0, poly(af, q), poly(ai, p)


def _prefactor(psi_i, psi_f) -> float:
    ai, af = psi_i.weight, psi_f.weight
    A = ai + af
    gap = np.sum((psi_i.center - psi_f.center) ** 2)
    return psi_i.c * psi_f.c * np.exp(-ai * af / A * gap)


def _closed_form(psi_i, psi_f, thr, step_mode: StepMode, m_e: float) -> float:
    g0, full0, i_f, i_i = _mode_integrals(psi_i, psi_f, thr)
    n = thr.size
    base = g0 if step_mode == "all_sites" else full0
    tf = ti = 0.0
    for j in range(n):
        others = np.prod(np.delete(base, j))
        tf += i_f[j] * others
        ti += i_i[j] * others
    return float(_prefactor(psi_i, psi_f) * (tf - ti) / (2.0 * m_e))


def _nodes_per_mode(n: int) -> int:
    return int(min(64, np.floor(QUADRATURE_BUDGET ** (1.0 / n))))


def _quadrature(psi_i, psi_f, thr, step_mode: StepMode, m_e: float, nodes: int | None) -> float:
    """Tensor-product Gauss-Legendre on boxes of half-width 6/sqrt(alpha dx) about the product centre.

    Restricted modes integrate from the threshold upward, so the step never
    cuts through a quadrature cell.
    """
    n = thr.size
    if n > MAX_QUADRATURE_MODES:
        raise DimensionError(f"quadrature path supports at most {MAX_QUADRATURE_MODES} modes, got {n}")
    x, w = np.polynomial.legendre.leggauss(nodes or _nodes_per_mode(n))
    ai, af = psi_i.weight, psi_f.weight
    m = (ai * psi_i.center + af * psi_f.center) / (ai + af)
    half = 6.0 / np.sqrt(min(ai, af))

    def rule(j, restricted):
        lo, hi = m[j] - half, m[j] + half
        if restricted:
            lo = max(lo, thr[j])
        if hi <= lo:
            return np.zeros(1), np.zeros(1)
        return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w

    if step_mode == "all_sites":
        total = _gl_integrate(psi_i, psi_f, [rule(j, True) for j in range(n)], list(range(n)))
    else:
        total = sum(
            _gl_integrate(psi_i, psi_f, [rule(k, k == j) for k in range(n)], [j]) for j in range(n)
        )
    return float(total / (2.0 * m_e))


def _gl_integrate(psi_i, psi_f, rules, terms) -> float:
    """Sum of the Laplacian-bracket integrand over a tensor grid, chunked over the first mode."""
    n = len(rules)
    ai, af = psi_i.weight, psi_f.weight
    if n > 1:
        rest_x = np.stack(np.meshgrid(*[r[0] for r in rules[1:]], indexing="ij"), -1).reshape(-1, n - 1)
        rest_w = np.prod(np.stack(np.meshgrid(*[r[1] for r in rules[1:]], indexing="ij"), -1).reshape(-1, n - 1), 1)
    else:
        rest_x, rest_w = np.zeros((1, 0)), np.ones(1)
    total = 0.0
    for x0, w0 in zip(*rules[0]):
        pts = np.column_stack([np.full(rest_x.shape[0], x0), rest_x])
        ui = pts - psi_i.center
        uf = pts - psi_f.center
        prod = psi_i.c * psi_f.c * np.exp(-ai * np.sum(ui**2, 1) - af * np.sum(uf**2, 1))
        lap_f = np.sum(4.0 * af**2 * uf[:, terms] ** 2 - 2.0 * af, 1)
        lap_i = np.sum(4.0 * ai**2 * ui[:, terms] ** 2 - 2.0 * ai, 1)
        total += w0 * (np.dot(rest_w, prod * lap_f) - np.dot(rest_w, prod * lap_i))
    return total


def tunneling_matrix_element(
    psi_i: Wavefunctional,
    psi_f: Wavefunctional,
    barrier_threshold=-np.inf,
    n_modes: int | None = None,
    method: Method = "closed_form",
    step_mode: StepMode = "all_sites",
    cross_check: bool = False,
    m_e: float = 1.0,
    nodes: int | None = None,
) -> TunnelingResult:
    """Functional tunneling matrix element between two Gaussian wavefunctionals.

    T_if = 1/(2 m_e) int (Psi_i Lap Psi_f - Psi_f Lap Psi_i) step(phi - threshold) Dphi

    over ``n_modes`` site amplitudes, Lap = sum_j d^2/dphi_j^2. With
    ``step_mode="all_sites"`` the step requires every site above its
    threshold; ``"per_site"`` restricts only the site the j-th Laplacian term
    differentiates. ``cross_check`` runs both deterministic paths and raises
    :class:`DisagreementError` beyond 1e-6 relative.
    """
    n_modes = n_modes or psi_i.n_modes
    psi_i, psi_f, thr = _pair_setup(psi_i, psi_f, barrier_threshold, n_modes)
    if method == "monte_carlo":
        raise UnsupportedMethodError("Monte-Carlo functional integration is not supported")
    if method == "closed_form":
        value = _closed_form(psi_i, psi_f, thr, step_mode, m_e)
    elif method == "quadrature":
        value = _quadrature(psi_i, psi_f, thr, step_mode, m_e, nodes)
    else:
        raise ValueError(f"unknown method {method!r}")
    if cross_check:
        other = (
            _quadrature(psi_i, psi_f, thr, step_mode, m_e, nodes)
            if method == "closed_form"
            else _closed_form(psi_i, psi_f, thr, step_mode, m_e)
        )
        if not methods_agree(value, other):
            raise DisagreementError(f"closed form {value!r} and quadrature {other!r} differ beyond {AGREEMENT_RTOL:g}")
    return TunnelingResult(value, current_from_tif(value), n_modes, method)


def methods_agree(a: float, b: float, rtol: float = AGREEMENT_RTOL, atol: float = 1e-14) -> bool:
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), atol)


def current_from_tif(t_if: float) -> float:
    """J is proportional to T_if; the constant is set to 1."""
    return t_if


def fermi_golden_rule(t_lr: float, rho_r: float, hbar: float = 1.0) -> float:
    """Transition rate W = (2 pi / hbar) |T|^2 rho."""
    if rho_r < 0:
        raise ValueError("density of states must be >= 0")
    return 2.0 * np.pi / hbar * abs(t_lr) ** 2 * rho_r


# ---------------------------------------------------------------------------
# Bogomol'nyi diagnostics


@dataclass(frozen=True)
class BogomolnyiMargin:
    lagrangian_value: float
    bound: float
    margin: float

    def __iter__(self):
        return iter((self.lagrangian_value, self.bound, self.margin))


def static_lagrangian(config: PhaseField, p: VEPotentialParams) -> float:
    """sum_j dx [1/2 ((phi_{j+1} - phi_j)/dx)^2 + V_E(phi_j)]; bonds only between neighbours."""
    phi, dx = config.phases, config.grid.dx
    grad = np.diff(phi) / dx
    return float(dx * (0.5 * np.sum(grad**2) + np.sum(v_e(phi, p))))


def bogomolnyi_margin(config: PhaseField, p: VEPotentialParams, phi_C: float | None = None, vacua: Vacua | None = None) -> BogomolnyiMargin:
    """Lagrangian value against |Q| + (phi0 - phi_C)^2 dE_gap; phi_C defaults to phi_F.

    Degenerate (single-minimum) potentials fall back to dE_gap = 0.
    """
    if vacua is None:
        try:
            vacua = find_vacua(p)
        except NotDoubleWellError:
            vacua = None
    gap = vacua.delta_E_gap if vacua is not None else 0.0
    if phi_C is None:
        phi_C = vacua.phi_F if vacua is not None else p.phi0
    lag = static_lagrangian(config, p)
    bound = abs(winding_number(config)) + (p.phi0 - phi_C) ** 2 * gap
    return BogomolnyiMargin(lag, bound, lag - bound)


def thin_wall_profile(grid: Grid, vacua: Vacua, center: float = 0.0, width: float = 1.0) -> np.ndarray:
    """tanh wall from phi_F (left) to phi_T (right)."""
    s = 0.5 * (1.0 + np.tanh((grid.x - center) / width))
    return vacua.phi_F + (vacua.phi_T - vacua.phi_F) * s


def random_smooth_profiles(grid: Grid, base: float, norm: float, count: int, seed: int, n_harmonics: int = 6) -> np.ndarray:
    """``count`` smooth random fluctuations about ``base``, each rescaled to L2 deviation ``norm``.

    Fluctuations are sums of the first ``n_harmonics`` box harmonics with
    amplitudes decaying as 1/k.
    """
    rng = np.random.default_rng(seed)
    s = (grid.x - grid.x0) / grid.length
    k = np.arange(1, n_harmonics + 1)
    out = np.empty((count, grid.n_points))
    for i in range(count):
        a = rng.standard_normal(n_harmonics) / k
        b = rng.standard_normal(n_harmonics) / k
        dev = a @ np.cos(np.pi * np.outer(k, s)) + b @ np.sin(np.pi * np.outer(k, s))
        dev *= norm / np.sqrt(np.sum(dev**2) * grid.dx)
        out[i] = base + dev
    return out
