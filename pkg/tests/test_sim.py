import math

import numpy as np
import pytest
import scipy.linalg

from msc.corpus import settle_horizon
from msc.errors import NonFinite, StepTooLarge
from msc.graph import path_graph, substitute_graph
from msc.protocol import (
    assemble,
    consensus_configuration,
    predicted_limit_double,
    predicted_limit_single,
    spectral_report,
    virtual_consensus_point,
)
from msc.scaling import classify, rotation2
from msc.sim import (
    IntegratorConfig,
    Trajectory,
    convergence_verdict,
    detect_clusters,
    half_sup_growth,
    integrate_double,
    integrate_single,
    rk4_propagator,
)
from msc.verify import corrupt_sign


def rk4_step(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def three_group_system():
    thetas = [0.0] * 6 + [2 * math.pi / 3] * 5 + [4 * math.pi / 3] * 5
    return assemble(substitute_graph(), [classify(rotation2(t)) for t in thetas], 2)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"dt": 0}, {"dt": -1}, {"t_end": 0}, {"dt": 2, "t_end": 1}, {"record_every": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            IntegratorConfig(**kw)

    def test_steps(self):
        assert IntegratorConfig(dt=0.01, t_end=1.0).steps == 100


class TestPropagator:
    def test_matches_four_stage_rk4(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((6, 6))
        z = rng.standard_normal(6)
        assert np.allclose(rk4_propagator(a, 0.05) @ z, rk4_step(lambda v: a @ v, z, 0.05), atol=1e-14)

    def test_fourth_order_against_exact_solution(self, cases):
        # global error vs expm(tA) z0 drops ~16x per halving of dt
        c = cases[0]
        a = c.system.system_matrix
        t_end = 4.0
        exact = scipy.linalg.expm(t_end * a) @ c.x0
        errs = []
        for dt in (0.1, 0.05, 0.025):
            traj = integrate_single(c.system, c.x0, IntegratorConfig(dt=dt, t_end=t_end, record_every=1000))
            errs.append(np.max(np.abs(traj.final_positions() - exact)))
        for coarse, fine in zip(errs, errs[1:]):
            assert 12.0 <= coarse / fine <= 20.0, errs

    def test_step_too_large(self):
        sys = assemble(substitute_graph(), [np.eye(2)] * 16, 2)
        with pytest.raises(StepTooLarge):
            integrate_single(sys, np.zeros(32), IntegratorConfig(dt=1.0, t_end=10.0))


class TestSingle:
    def test_two_agent_average(self):
        sys = assemble(path_graph(2), [np.eye(2)] * 2, 2)
        traj = integrate_single(sys, [1.0, 0.0, 0.0, 1.0], IntegratorConfig(dt=0.01, t_end=20.0))
        assert np.allclose(traj.final_positions(), 0.5, atol=1e-8)

    def test_equilibrium_stays_put(self, rotated_pair):
        x0 = consensus_configuration(rotated_pair, np.array([1.0, -2.0]))
        traj = integrate_single(rotated_pair, x0, IntegratorConfig(t_end=2.0))
        assert np.allclose(traj.positions, x0[None, :], atol=1e-12)
        assert np.max(traj.monitors["disagreement"]) < 1e-12
        v = convergence_verdict(traj, rotated_pair, x0, 1e-5)
        assert v.converged and v.t_settle == 0.0

    def test_sampling_includes_horizon(self, rotated_pair):
        traj = integrate_single(rotated_pair, np.ones(4), IntegratorConfig(dt=0.01, t_end=1.0, record_every=30))
        assert traj.times[-1] == pytest.approx(1.0)
        assert np.all(np.diff(traj.times) > 0)
        assert all(len(ch) == traj.samples for ch in traj.monitors.values())

    def test_monitors_on_corpus(self, cases):
        for c in cases[:25]:
            rep = spectral_report(c.system)
            cfg = IntegratorConfig(t_end=settle_horizon(rep.min_nonzero_real), record_every=10)
            traj = integrate_single(c.system, c.x0, cfg)
            lyap = traj.monitors["lyapunov"]
            assert np.all(np.diff(lyap) <= 1e-9 * max(1.0, lyap[0]))
            assert np.max(traj.monitors["xa_drift"]) < 1e-7
            v = convergence_verdict(traj, c.system, predicted_limit_single(c.system, c.x0), 1e-5)
            assert v.converged, (c.index, v)

    def test_unstable_network_raises(self, cases):
        bad = corrupt_sign(cases[5]).system
        with pytest.raises(NonFinite):
            integrate_single(bad, cases[5].x0, IntegratorConfig(dt=0.01, t_end=400.0))


class TestDouble:
    def test_equilibrium_stays_put(self, rotated_pair):
        x1 = consensus_configuration(rotated_pair, np.array([0.5, 0.5]))
        traj = integrate_double(rotated_pair, x1, np.zeros(4), 1.0, IntegratorConfig(t_end=2.0))
        assert np.allclose(traj.positions, x1[None, :], atol=1e-14)
        assert np.max(traj.monitors["velocity_norm"]) < 1e-14

    def test_converges_above_threshold(self, cases):
        c = cases[1]
        rep = spectral_report(c.system)
        alpha = max(1.5 * rep.alpha_critical_exact, 1.0)
        traj = integrate_double(c.system, c.x0, c.v0, alpha, IntegratorConfig(t_end=200.0, record_every=20))
        pos, _ = predicted_limit_double(c.system, c.x0, c.v0, alpha, rep)
        assert np.max(np.abs(traj.final_positions() - pos)) < 1e-5
        assert traj.monitors["velocity_norm"][-1] < 1e-6
        assert np.max(traj.monitors["xa_drift"]) < 1e-9

    def test_grows_below_threshold(self):
        thetas = [math.pi / 4, 3 * math.pi / 4, -3 * math.pi / 4, -math.pi / 4] * 4
        sys = assemble(substitute_graph(), [classify(rotation2(t)) for t in thetas], 2)
        star = spectral_report(sys).alpha_critical_exact
        rng = np.random.default_rng(1)
        x1, x2 = rng.uniform(-1, 1, 32), rng.uniform(-1, 1, 32)
        traj = integrate_double(sys, x1, x2, 0.9 * star, IntegratorConfig(t_end=60.0, record_every=10))
        first, second = half_sup_growth(traj)
        assert second > first
        pred = consensus_configuration(sys, virtual_consensus_point(sys, x1) + virtual_consensus_point(sys, x2) / (0.9 * star))
        assert convergence_verdict(traj, sys, pred, 1e-5).diverged

    def test_overflow_is_flagged_not_raised(self):
        thetas = [math.pi / 4, 3 * math.pi / 4, -3 * math.pi / 4, -math.pi / 4] * 4
        sys = assemble(substitute_graph(), [classify(rotation2(t)) for t in thetas], 2)
        traj = integrate_double(sys, np.ones(32), np.zeros(32), 0.05, IntegratorConfig(t_end=2000.0, record_every=50))
        assert traj.diverged
        assert traj.times[-1] < 2000.0
        assert convergence_verdict(traj, sys, np.zeros(32), 1e-5).diverged

    def test_rejects_nonpositive_gain(self, rotated_pair):
        with pytest.raises(ValueError):
            integrate_double(rotated_pair, np.zeros(4), np.zeros(4), 0.0)


class TestClusters:
    def test_identical_points(self):
        rep = detect_clusters(np.zeros((5, 2)))
        assert rep.count == 1 and rep.members() == [[0, 1, 2, 3, 4]]

    def test_chaining(self):
        pts = np.array([[0.0], [0.8e-3], [1.6e-3], [10.0]])
        rep = detect_clusters(pts, threshold=1e-3)
        assert rep.members() == [[0, 1, 2], [3]]
        # a chain may be wider than the threshold itself
        assert rep.max_intra_distance == pytest.approx(1.6e-3)
        assert not rep.separated

    def test_threshold_must_be_positive(self):
        with pytest.raises(ValueError):
            detect_clusters(np.zeros((2, 2)), 0.0)

    def test_rotation_groups_form_equilateral_triangle(self):
        sys = three_group_system()
        xa = np.array([0.3, -0.7])
        rep = detect_clusters(consensus_configuration(sys, xa).reshape(16, 2))
        assert rep.members() == [list(range(6)), list(range(6, 11)), list(range(11, 16))]
        c = rep.centers
        sides = [np.linalg.norm(c[i] - c[j]) for i, j in ((0, 1), (1, 2), (0, 2))]
        assert max(sides) - min(sides) < 1e-12
        assert np.allclose([np.linalg.norm(p) for p in c], np.linalg.norm(xa))

    def test_zero_virtual_point_collapses(self):
        sys = three_group_system()
        rep = detect_clusters(consensus_configuration(sys, np.zeros(2)).reshape(16, 2))
        assert rep.count == 1


class TestVerdict:
    def _traj(self, errors):
        times = np.arange(len(errors), dtype=float)
        pos = np.array(errors, dtype=float)[:, None]
        return Trajectory("single", times, pos, None, {}, 1, 1)

    def test_settle_time_is_first_sample_of_final_run(self):
        v = convergence_verdict(self._traj([1, 1e-3, 1e-7, 1e-3, 1e-7, 1e-8]), None, [0.0], 1e-5)
        assert v.converged and v.t_settle == 4.0

    def test_growth_is_divergence(self):
        v = convergence_verdict(self._traj(np.exp(np.linspace(0, 3, 40))), None, [0.0], 1e-5)
        assert v.diverged

    def test_slow_decay_is_not_converged(self):
        v = convergence_verdict(self._traj(np.exp(-np.linspace(0, 3, 40))), None, [0.0], 1e-5)
        assert v.status == "not_converged"

    def test_nonfinite_is_divergence(self):
        v = convergence_verdict(self._traj([1.0, np.inf]), None, [0.0], 1e-5)
        assert v.diverged
