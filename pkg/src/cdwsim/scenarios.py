"""Scenario runners: turn a validated config into CSV, JSON and SVG artifacts."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import multi_chain as mc
from . import sine_gordon as sg
from . import single_chain as sc
from . import tunneling as tn
from .config import ScenarioConfig
from .core import TWO_PI, BlowUpError, CDWError, Grid, PhaseField, winding_number
from .svg import line_plot

SCHEMA_VERSION = 1


@dataclass
class Outcome:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    plots: dict[str, str] = field(default_factory=dict)
    error: CDWError | None = None


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _scalar(v):
    """JSON-safe scalar; non-finite floats become strings."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, dict):
        return {k: _scalar(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_scalar(x) for x in v]
    return v


def render_csv(outcome: Outcome) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(outcome.columns)
    for row in outcome.rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def render_summary(cfg: ScenarioConfig, outcome: Outcome) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "status": "ok" if outcome.error is None else "error",
    }
    if outcome.error is not None:
        doc["error"] = str(outcome.error)
    doc.update(_scalar(outcome.summary))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------


def _grid(block) -> Grid:
    return Grid.spanning(block.lo, block.hi, block.n_points, block.boundary)


def _schwinger(prm) -> sc.SchwingerParams:
    return sc.SchwingerParams(D=prm.D, mu_E=prm.mu_E, omega_p=prm.omega_p, phi_bar0=prm.phi_bar0, a_D=prm.a_D)


def _units(summary: dict, units, dt: float, n_steps: int):
    if units.time_scale_s is not None:
        summary["dt_si_s"] = dt * units.time_scale_s
        summary["duration_si_s"] = dt * n_steps * units.time_scale_s


def _max_excursion(values: np.ndarray):
    ok = np.isfinite(values)
    if not ok.any() or not ok[0]:
        return None
    return float(np.max(np.abs(values[ok] - values[0])))


def single_chain_resonance(cfg: ScenarioConfig) -> Outcome:
    prm = cfg.params
    p = _schwinger(prm)
    grid = _grid(prm.grid)
    width = prm.packet.width or sc.ground_state_width(p, prm.packet.center)
    initial = sc.gaussian_packet(grid, prm.packet.center, width, prm.packet.k0)
    cols = ["step", "time", "average_phase", "phase_expectation", "norm2", "energy"]
    out = Outcome(cols)
    out.summary = {"scheme": prm.scheme, "dt": prm.dt, "n_steps": prm.n_steps, "packet_width": width}
    _units(out.summary, prm.units, prm.dt, prm.n_steps)
    try:
        series = sc.run_single_chain(p, grid, prm.scheme, prm.dt, prm.n_steps, initial, prm.sign_variant, prm.record_every)
    except BlowUpError as exc:
        out.summary.update(blow_up_step=exc.step, tunneled=None)
        out.error = exc
        return out
    steps = np.rint(series.times / prm.dt).astype(int)
    for i, s in enumerate(steps):
        out.rows.append([s, series.times[i]] + [series[c][i] for c in cols[2:]])
    phase = series["phase_expectation"]
    n2 = series["norm2"]
    out.summary.update(
        blow_up_step=None,
        tunneled=sc.tunneled(series),
        initial_phase=phase[0],
        max_phase_excursion=float(np.max(np.abs(phase - phase[0]))),
        max_arg_phase_excursion=_max_excursion(series["average_phase"]),
        norm_drift=float(np.max(np.abs(n2 - n2[0])) / n2[0]),
        energy_initial=series["energy"][0],
        energy_final=series["energy"][-1],
    )
    out.plots["plot_average_phase.svg"] = line_plot(
        [(series.times, phase, "<phi>"), (series.times, p.phi_bar0 + p.a_D * series.times, "trap centre")],
        f"single chain, {prm.scheme}", "time", "phase",
    )
    return out


def stability_scan(cfg: ScenarioConfig) -> Outcome:
    prm = cfg.params
    p = _schwinger(prm)
    grid = _grid(prm.grid)
    initial = sc.random_field(grid, seed=cfg.seed)
    out = Outcome(["step", "time", "scheme", "stable", "blow_up_step"])
    per_scheme = {}
    curves = []
    idx = 0
    for scheme in prm.schemes:
        ps = p
        if scheme == "dufort_frankel" and prm.dufort_frankel_potential == "free":
            ps = sc.SchwingerParams(D=p.D)
        entries = sc.stability_scan(ps, grid, scheme, prm.dt_min, prm.dt_max, prm.factor, prm.n_steps, initial, prm.sign_variant)
        for e in entries:
            out.rows.append([idx, e.dt, scheme, e.stable, e.blow_up_step])
            idx += 1
        info = {"all_stable": all(e.stable for e in entries), "dt_star": sc.crossover_dt(entries)}
        if scheme == "rk4":
            rho = sc.spectral_radius(grid, ps)
            dt_lin = sc.RK4_IMAGINARY_AXIS_LIMIT / rho
            info.update(spectral_radius=rho, dt_linear=dt_lin)
            if info["dt_star"] is not None:
                info["dt_star_over_linear"] = info["dt_star"] / dt_lin
        per_scheme[scheme] = info
        curves.append(([e.dt for e in entries], [1.0 if e.stable else 0.0 for e in entries], scheme))
    out.summary = {"schemes": per_scheme, "n_steps": prm.n_steps, "factor": prm.factor}
    if prm.units.time_scale_s is not None and "rk4" in per_scheme and per_scheme["rk4"]["dt_star"]:
        out.summary["rk4_dt_star_si_s"] = per_scheme["rk4"]["dt_star"] * prm.units.time_scale_s
    out.plots["plot_stability.svg"] = line_plot(curves, "stability scan (1 = stable)", "dt", "stable", logx=True)
    return out


def multichain_kink(cfg: ScenarioConfig) -> Outcome:
    prm = cfg.params
    p = mc.MultiChainParams(
        D1=prm.D1, E1=prm.E1, E2=prm.E2, delta_prime=prm.delta_prime, theta=prm.theta, m_e=prm.m_e,
        l=prm.l, d=prm.d, eta=prm.eta, tau_bar=prm.tau_bar, regime_ratio=prm.regime_ratio,
    )
    grid = Grid(prm.n_points, prm.d, prm.boundary, prm.x0)
    out = Outcome(["step", "time", "center_index", "center_x", "winding", "energy"])
    try:
        run = mc.run_kink_transport(p, grid, prm.beta, prm.n_steps, prm.dt, prm.z0, prm.include_e2, prm.record_every)
    except CDWError as exc:
        out.error = exc
        return out
    s = run.series
    steps = np.rint(s.times / prm.dt).astype(int)
    for i, st in enumerate(steps):
        out.rows.append([st, s.times[i], s["center_index"][i], s["center_x"][i], s["winding"][i], s["energy"][i]])
    e = s["energy"]
    windings = set(int(w) for w in s["winding"])
    displacement = float(s["center_x"][-1] - s["center_x"][0])
    amplitude = float(np.max(run.final.phases) - np.min(run.final.phases))
    winding_constant = windings == {1}
    out.summary = {
        "kink_velocity_fit": run.velocity_fit,
        "expected_velocity": run.expected_velocity,
        "velocity_relative_error": abs(run.velocity_fit - run.expected_velocity) / abs(run.expected_velocity)
        if run.expected_velocity else None,
        "v": p.v,
        "omega0": float(np.sqrt(p.omega0_sq)),
        "omega1": float(np.sqrt(p.omega1_sq)),
        "kink_regime": p.kink_regime,
        "winding_constant": winding_constant,
        "winding": sorted(windings),
        "energy_drift": float(np.max(np.abs(e - e[0])) / abs(e[0])),
        "center_displacement": displacement,
        "final_amplitude": amplitude,
        "transported": bool(
            winding_constant and abs(displacement) >= 0.25 * grid.length and amplitude >= 0.9 * TWO_PI
        ),
    }
    out.plots["plot_kink_center.svg"] = line_plot([(s.times, s["center_x"], "centre")], "lattice kink centre", "time", "x")
    init = mc.kink_initial_state(p, grid, sg.KinkSpec(prm.beta, 1, prm.z0))
    out.plots["plot_kink_profile.svg"] = line_plot(
        [(grid.x, init.phases, "initial"), (grid.x, run.final.phases, "final")], "lattice kink profile", "x", "phi"
    )
    return out


def sine_gordon_kink(cfg: ScenarioConfig) -> Outcome:
    prm = cfg.params
    n = int(round((prm.z_max - prm.z_min) / prm.dz)) + 1
    grid = Grid(n, prm.dz, prm.boundary, prm.z_min)
    k = sg.KinkSpec(prm.beta, prm.sign, prm.z0)
    sgp = sg.SineGordonParams(prm.v, prm.omega1)
    out = Outcome(["step", "time", "center", "width", "winding", "energy", "l2_error"])
    try:
        hist = sg.evolve_sine_gordon(sg.kink_field(grid, k), prm.dt, prm.n_steps, prm.record_every)
    except CDWError as exc:
        out.error = exc
        return out
    centers, widths, windings, energies, errs = [], [], [], [], []
    for i in range(len(hist)):
        snap = hist.snapshot(i)
        exact = sg.kink_exact(grid.x, hist.times[i], k)
        centers.append(sg.kink_center(snap.phases, grid))
        widths.append(sg.kink_width(snap.phases, grid))
        windings.append(winding_number(snap))
        energies.append(sg.sg_energy(snap))
        errs.append(float(np.sqrt(np.sum((snap.phases - exact) ** 2) * grid.dx)))
        out.rows.append([int(round(hist.times[i] / prm.dt)), hist.times[i], centers[-1], widths[-1],
                         windings[-1], energies[-1], errs[-1]])
    slope = sg.fit_velocity(hist.times, centers)
    expected = -prm.beta
    energies = np.array(energies)
    width_ratio = float(np.mean(widths)) / sg.static_kink_width()
    wset = set(windings)
    expected_w = 1 if prm.sign == 1 else -1
    out.summary = {
        "dimensionless_velocity_fit": slope,
        "expected_dimensionless_velocity": expected,
        "kink_velocity_fit": slope * sgp.v,
        "expected_velocity": expected * sgp.v,
        "velocity_relative_error": abs(slope - expected) / abs(expected) if expected else None,
        "width_ratio": width_ratio,
        "lorentz_factor": float(np.sqrt(1 - prm.beta**2)),
        "lorentz_relative_error": abs(width_ratio / np.sqrt(1 - prm.beta**2) - 1.0),
        "energy_initial": energies[0],
        "energy_drift": float(np.max(np.abs(energies - energies[0])) / abs(energies[0])),
        "l2_error_final": errs[-1],
        "winding_constant": wset == {expected_w},
        "tau_final": hist.times[-1],
    }
    out.plots["plot_sg_profile.svg"] = line_plot(
        [(grid.x, hist.phases[0], "tau = 0"), (grid.x, hist.phases[-1], f"tau = {hist.times[-1]:g}"),
         (grid.x, sg.kink_exact(grid.x, hist.times[-1], k), "exact")],
        "sine-Gordon kink", "z", "phi",
    )
    out.plots["plot_sg_center.svg"] = line_plot([(hist.times, centers, "centre")], "kink centre", "tau", "z")
    return out


def _potential(prm) -> tn.VEPotentialParams:
    return tn.VEPotentialParams(prm.C1, prm.C2, prm.phi0, prm.asymmetry)


def tunneling_report(cfg: ScenarioConfig) -> Outcome:
    prm = cfg.params
    vp = _potential(prm)
    out = Outcome(["step", "time", "alpha", "t_if", "t_if_check", "current", "rate"])
    try:
        vac = tn.find_vacua(vp)
        thr = vac.phi_barrier if prm.threshold == "barrier" else float(prm.threshold)
        # orient so the true vacuum lies above the threshold
        s = 1.0 if vac.phi_T >= vac.phi_F else -1.0
        other = "quadrature" if prm.method == "closed_form" else "closed_form"

        def element(L):
            alpha = tn.alpha_from_separation(L)
            psi_i = tn.gaussian_wavefunctional(np.full(prm.n_modes, s * (vac.phi_F + prm.epsilon)), alpha, prm.dx)
            psi_f = tn.gaussian_wavefunctional(np.full(prm.n_modes, s * vac.phi_T), alpha, prm.dx)
            res = tn.tunneling_matrix_element(psi_i, psi_f, s * thr, prm.n_modes, prm.method, prm.step_mode, prm.cross_check)
            check = None
            if prm.cross_check:
                check = tn.tunneling_matrix_element(psi_i, psi_f, s * thr, prm.n_modes, other, prm.step_mode).t_if
            return alpha, res, check

        for i, L in enumerate(prm.separations):
            alpha, res, check = element(L)
            out.rows.append([i, L, alpha, res.t_if, check, res.j, tn.fermi_golden_rule(res.t_if, prm.rho_r)])
        alpha, res, check = element(prm.separation)
    except CDWError as exc:
        out.error = exc
        return out
    out.summary = {
        "phi_F": vac.phi_F,
        "phi_T": vac.phi_T,
        "phi_barrier": vac.phi_barrier,
        "delta_E_gap": vac.delta_E_gap,
        "threshold": thr,
        "separation": prm.separation,
        "alpha": alpha,
        "n_modes": prm.n_modes,
        "method": prm.method,
        "step_mode": prm.step_mode,
        "t_if": res.t_if,
        "j": res.j,
        "rate": tn.fermi_golden_rule(res.t_if, prm.rho_r),
        "t_if_check": check,
        "methods_agree": tn.methods_agree(res.t_if, check) if check is not None else None,
    }
    lo, hi = sorted((vac.phi_F, vac.phi_T))
    span = hi - lo
    phis = np.linspace(lo - 0.5 * span, hi + 0.5 * span, 401)
    out.plots["plot_potential.svg"] = line_plot([(phis, tn.v_e(phis, vp), "V_E")], "false-vacuum potential", "phi", "V_E")
    out.plots["plot_tif.svg"] = line_plot(
        [([r[1] for r in out.rows], [r[3] for r in out.rows], "T_if")], "tunneling element vs separation", "L", "T_if", logx=True
    )
    return out


def bogomolnyi_sweep(cfg: ScenarioConfig) -> Outcome:
    prm = cfg.params
    vp = _potential(prm)
    grid = _grid(prm.grid)
    out = Outcome(["step", "time", "config", "lagrangian", "bound", "margin"])
    try:
        vac = tn.find_vacua(vp)
    except CDWError as exc:
        out.error = exc
        return out
    wall = tn.thin_wall_profile(grid, vac, 0.5 * (grid.x[0] + grid.x[-1]), prm.wall_width)
    norm = float(np.sqrt(np.sum((wall - vac.phi_F) ** 2) * grid.dx))
    randoms = tn.random_smooth_profiles(grid, vac.phi_F, norm, prm.n_random, cfg.seed, prm.n_harmonics)
    kink = tn.bogomolnyi_margin(PhaseField(grid, wall), vp, prm.phi_C, vac)
    out.rows.append([0, 0, "kink", kink.lagrangian_value, kink.bound, kink.margin])
    margins = []
    for i, prof in enumerate(randoms, start=1):
        m = tn.bogomolnyi_margin(PhaseField(grid, prof), vp, prm.phi_C, vac)
        margins.append(m.margin)
        out.rows.append([i, i, "random", m.lagrangian_value, m.bound, m.margin])
    margins = np.array(margins)
    out.summary = {
        "phi_F": vac.phi_F,
        "phi_T": vac.phi_T,
        "delta_E_gap": vac.delta_E_gap,
        "phi_C": prm.phi_C if prm.phi_C is not None else vac.phi_F,
        "deviation_norm": norm,
        "kink_margin": kink.margin,
        "kink_bound": kink.bound,
        "min_random_margin": float(margins.min()),
        "n_random": prm.n_random,
        "n_violations": int(np.sum(margins < 0) + (kink.margin < 0)),
        "all_nonnegative": bool(np.all(margins >= 0) and kink.margin >= 0),
        "kink_smallest": bool(kink.margin < margins.min()),
    }
    out.plots["plot_margins.svg"] = line_plot(
        [(np.arange(1, margins.size + 1), margins, "random"), ([0, margins.size], [kink.margin] * 2, "kink")],
        "Bogomol'nyi margins", "config", "margin",
    )
    return out


RUNNERS = {
    "single_chain_resonance": single_chain_resonance,
    "stability_scan": stability_scan,
    "multichain_kink": multichain_kink,
    "sine_gordon_kink": sine_gordon_kink,
    "tunneling_report": tunneling_report,
    "bogomolnyi_sweep": bogomolnyi_sweep,
}


def compute(cfg: ScenarioConfig) -> Outcome:
    return RUNNERS[cfg.scenario](cfg)


def run_scenario(cfg: ScenarioConfig, out_dir: Path | None = None) -> tuple[Outcome, list[Path]]:
    """Compute a scenario and write its artifacts; returns the outcome and the files written."""
    outcome = compute(cfg)
    out_dir = Path(out_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    files = {"timeseries.csv": render_csv(outcome), "summary.json": render_summary(cfg, outcome)}
    if cfg.emit_svg:
        files.update(outcome.plots)
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text)
        written.append(path)
    return outcome, written
