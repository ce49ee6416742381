import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdwsim import multi_chain as mc
from cdwsim.core import Grid, PhaseField, RegimeError
from cdwsim.multi_chain import MultiChainParams

P = MultiChainParams()


def chain_grid(n=801, d=0.05, x0=-20.0, boundary="fixed"):
    return Grid(n, d, boundary, x0)


class TestParams:
    def test_derived_quantities(self):
        p = MultiChainParams(E1=2.0, delta_prime=8.0, m_e=2.0, l=1.0, d=0.5)
        assert p.omega0_sq == 4.0
        assert p.omega1_sq == 1.0
        assert p.v == pytest.approx(1.0)
        assert p.rho == 4.0

    def test_regime_flag(self):
        assert MultiChainParams(delta_prime=10, E1=1, E2=0.1).kink_regime
        assert not MultiChainParams(delta_prime=9, E1=1).kink_regime
        assert not MultiChainParams(delta_prime=100, E1=1, E2=0.2).kink_regime
        assert MultiChainParams(delta_prime=9, E1=1, regime_ratio=5).kink_regime

    def test_invariants(self):
        with pytest.raises(ValueError):
            MultiChainParams(m_e=0)
        with pytest.raises(ValueError):
            MultiChainParams(E1=-1)


class TestPotential:
    @pytest.mark.parametrize("mode", ["exact", "harmonic"])
    def test_zero_field(self, mode):
        assert mc.multichain_potential(PhaseField(Grid(5, 1.0), np.zeros(5)), P, mode) == 0.0

    def test_uniform_field_at_theta(self):
        c = 0.8
        p = MultiChainParams(E1=1.5, E2=3.0, theta=c)
        u = mc.multichain_potential(PhaseField(Grid(7, 1.0), np.full(7, c)), p, "exact")
        assert u == pytest.approx(7 * 1.5 * (1 - np.cos(c)))

    def test_e2_term(self):
        p = MultiChainParams(E1=0.0, E2=2.0, theta=0.5)
        f = PhaseField(Grid(3, 1.0), [0.0, 0.5, 1.5])
        assert mc.multichain_potential(f, p, "exact") == pytest.approx(2.0 * (0.25 + 0 + 1.0) + P.delta_prime * (2 - np.cos(0.5) - np.cos(1.0)))
        assert mc.multichain_potential(f, p, "harmonic", include_e2=True) == pytest.approx(2.0 * 1.25 + 0.5 * P.delta_prime * 1.25)

    def test_single_bond_taylor_bound(self):
        # one bond of angle delta; the second bond is zero
        delta = 1e-3
        p = MultiChainParams(E1=0.0)
        f = PhaseField(Grid(3, 1.0), [0.0, delta, delta])
        gap = abs(mc.multichain_potential(f, p, "exact") - mc.multichain_potential(f, p, "harmonic"))
        assert gap <= p.delta_prime * delta**4 / 24 * (1 + 1e-6) + 1e-15

    @settings(max_examples=60, deadline=None)
    @given(bonds=st.lists(st.floats(-0.1, 0.1), min_size=2, max_size=20))
    def test_harmonic_agrees_to_fourth_order(self, bonds):
        phi = np.concatenate([[0.0], np.cumsum(bonds)])
        p = MultiChainParams(E1=0.0)
        f = PhaseField(Grid(phi.size, 1.0), phi)
        gap = abs(mc.multichain_potential(f, p, "exact") - mc.multichain_potential(f, p, "harmonic"))
        assert gap <= p.delta_prime * np.sum(np.asarray(bonds) ** 4) / 24 + 1e-12

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            mc.multichain_potential(PhaseField(Grid(3, 1.0), np.zeros(3)), P, "cubic")


class TestAccelerations:
    @pytest.mark.parametrize("value", [0.0, np.pi])
    def test_uniform_equilibria(self, value):
        f = PhaseField(Grid(9, 0.05, "periodic"), np.full(9, value))
        np.testing.assert_allclose(mc.accelerations(f, P), 0.0, atol=1e-12)

    def test_fixed_ends_clamped(self):
        f = PhaseField(Grid(5, 0.05), [1.0, 0.0, 0.0, 0.0, -1.0])
        acc = mc.accelerations(f, P)
        assert acc[0] == 0.0 and acc[-1] == 0.0
        assert acc[1] == pytest.approx(P.omega0_sq)

    def test_against_force_from_potential(self):
        rng = np.random.default_rng(4)
        p = MultiChainParams(E1=2.0, E2=0.3, theta=0.2, delta_prime=5.0, m_e=1.5, l=0.8)
        g = Grid(12, 0.05, "periodic")
        phi = rng.uniform(-1, 1, 12)
        h = 1e-6
        grad = np.empty(12)
        for j in range(12):
            e = np.zeros(12)
            e[j] = h
            up = mc.multichain_potential(PhaseField(g, phi + e), p, "harmonic", include_e2=True)
            dn = mc.multichain_potential(PhaseField(g, phi - e), p, "harmonic", include_e2=True)
            grad[j] = (up - dn) / (2 * h)
        # harmonic coupling plus the exact E1 restoring term
        acc = mc.accelerations(PhaseField(g, phi), p, include_e2=True)
        np.testing.assert_allclose(acc, -grad / p.inertia, atol=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(3, 40))
    def test_periodic_coupling_telescopes(self, seed, n):
        rng = np.random.default_rng(seed)
        p = MultiChainParams(E1=0.0, E2=0.0)
        f = PhaseField(Grid(n, 0.05, "periodic"), rng.uniform(-3, 3, n))
        assert abs(np.sum(mc.accelerations(f, p))) < 1e-10 * p.omega0_sq * n

    def test_single_pendulum_frequency(self):
        p = MultiChainParams(E1=4.0, delta_prime=0.0, m_e=1.0, l=1.0)
        amp, dt, t_end = 1e-3, 1e-3, 40.0
        state = PhaseField(Grid(3, 1.0, "periodic"), np.full(3, amp))
        sig = [amp]
        for _ in range(int(round(t_end / dt))):
            state = mc.step_leapfrog(state, p, dt)
            sig.append(state.phases[1])
        w_leap = _frequency(np.array(sig), dt)
        w_ref = _frequency(_rk4_pendulum(np.sqrt(p.omega1_sq), amp, dt / 4, t_end)[::4], dt)
        assert w_leap == pytest.approx(w_ref, rel=1e-3)
        assert w_leap == pytest.approx(np.sqrt(p.omega1_sq), rel=1e-3)


def _rk4_pendulum(w, amp, dt, t_end):
    y = np.array([amp, 0.0])

    def f(y):
        return np.array([y[1], -(w**2) * np.sin(y[0])])

    out = [amp]
    for _ in range(int(round(t_end / dt))):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y[0])
    return np.array(out)


def _frequency(s, dt):
    idx = np.nonzero((s[:-1] > 0) & (s[1:] <= 0))[0]
    crossings = (idx + s[idx] / (s[idx] - s[idx + 1])) * dt
    return 2 * np.pi / np.polyfit(np.arange(crossings.size), crossings, 1)[0]


class TestLeapfrog:
    def test_fixed_point(self):
        f = PhaseField(chain_grid(20), np.zeros(20))
        out = mc.step_leapfrog(f, P, 0.005)
        np.testing.assert_array_equal(out.phases, 0.0)
        np.testing.assert_array_equal(out.velocities, 0.0)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            mc.step_leapfrog(PhaseField(chain_grid(5), np.zeros(5)), P, 0.0)

    @pytest.mark.parametrize("boundary", ["fixed", "periodic"])
    def test_time_reversible(self, boundary):
        rng = np.random.default_rng(8)
        g = chain_grid(32, boundary=boundary)
        vel = rng.uniform(-1, 1, 32)
        if boundary == "fixed":
            vel[0] = vel[-1] = 0
        f = PhaseField(g, rng.uniform(-1, 1, 32), vel)
        fwd = f
        for _ in range(10):
            fwd = mc.step_leapfrog(fwd, P, 0.005)
        back = PhaseField(g, fwd.phases, -fwd.velocities)
        for _ in range(10):
            back = mc.step_leapfrog(back, P, 0.005)
        np.testing.assert_allclose(back.phases, f.phases, atol=1e-12)
        np.testing.assert_allclose(-back.velocities, f.velocities, atol=1e-12)

    @staticmethod
    def _max_drift(f, dt, n_steps=10_000):
        e0 = mc.chain_energy(f, P)
        worst = 0.0
        for _ in range(n_steps):
            f = mc.step_leapfrog(f, P, dt)
            worst = max(worst, abs(mc.chain_energy(f, P) - e0))
        return worst / e0

    def test_energy_drift_smooth_random_start(self):
        rng = np.random.default_rng(21)
        g = chain_grid(64, boundary="periodic")
        x = 2 * np.pi * np.arange(64) / 64
        phi = sum(rng.uniform(-0.3, 0.3) * np.sin(m * x + rng.uniform(0, 2 * np.pi)) for m in range(1, 5))
        vel = sum(rng.uniform(-1, 1) * np.sin(m * x + rng.uniform(0, 2 * np.pi)) for m in range(1, 5))
        assert self._max_drift(PhaseField(g, phi, vel), 0.1 / np.sqrt(P.omega0_sq)) < 1e-3

    def test_energy_drift_white_noise_start(self):
        # site-to-site noise excites the top lattice mode at 2 omega0, hence the smaller step
        rng = np.random.default_rng(21)
        g = chain_grid(64, boundary="periodic")
        f = PhaseField(g, rng.uniform(-0.5, 0.5, 64), rng.uniform(-1, 1, 64))
        assert self._max_drift(f, 0.03 / np.sqrt(P.omega0_sq)) < 1e-3


class TestKinkTransport:
    def test_regime_error(self):
        with pytest.raises(RegimeError, match="delta'"):
            mc.run_kink_transport(MultiChainParams(delta_prime=5.0), chain_grid(), 0.5, 10, 0.005)

    def test_spacing_must_match(self):
        with pytest.raises(ValueError, match="spacing"):
            mc.run_kink_transport(P, chain_grid(d=0.1), 0.5, 10, 0.005)

    def test_static_kink_stays_put(self):
        run = mc.run_kink_transport(P, chain_grid(), 0.0, 1000, 0.005, record_every=50)
        idx = run.series["center_index"]
        assert np.max(np.abs(idx - idx[0])) < 0.1
        assert set(run.series["winding"]) == {1}

    @pytest.mark.parametrize("beta", [0.5, -0.3])
    def test_moving_kink_velocity(self, beta):
        run = mc.run_kink_transport(P, chain_grid(), beta, 2000, 0.005, z0=5.0 * np.sign(beta), record_every=50)
        assert run.expected_velocity == pytest.approx(-P.v * beta)
        assert run.velocity_fit == pytest.approx(run.expected_velocity, rel=0.02)
        assert set(run.series["winding"]) == {1}
        e = run.series["energy"]
        assert np.max(np.abs(e - e[0])) / e[0] < 1e-3

    def test_kink_survives_weak_e2(self):
        p = MultiChainParams(E2=0.01)
        run = mc.run_kink_transport(p, chain_grid(), -0.5, 4000, 0.005, z0=-10.0, include_e2=True, record_every=100)
        final = run.final.phases
        plateau = np.max(final[-50:]) - np.min(final[:50])
        assert plateau == pytest.approx(2 * np.pi, rel=0.1)
        assert set(run.series["winding"]) == {1}
        assert run.series["center_x"][-1] > run.series["center_x"][0] + 5.0
