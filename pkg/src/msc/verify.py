"""Randomized property suites run by ``msc verify``.

Every suite draws from a master seed, so a report is a pure function of the
seed and the corpus size.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from msc.corpus import CorpusCase, corpus, settle_horizon
from msc.errors import MscError
from msc.graph import NetworkGraph, random_connected_graph
from msc.numerics import hurwitz_complex_quadratic, hurwitz_criterion
from msc.protocol import (
    assemble,
    compare_nonzero_spectra,
    predicted_limit_double,
    predicted_limit_single,
    single_rhs_local,
    single_rhs_matrix,
    spectral_report,
)
from msc.rng import SplitMix64
from msc.scaling import ScalingMatrix, classify
from msc.sim import IntegratorConfig, convergence_verdict, integrate_double, integrate_single

XA_DRIFT_LIMIT = 1e-7
LYAPUNOV_SLACK = 1e-9
LIMIT_TOL = 1e-5


@dataclass
class SuiteResult:
    name: str
    total: int
    failures: list[str] = field(default_factory=list)
    detail: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures and self.total > 0

    def line(self) -> str:
        ok = self.total - len(self.failures)
        status = "PASS" if self.passed else "FAIL"
        tail = f"  {self.detail}" if self.detail else ""
        return f"{status} {self.name:<26} {ok}/{self.total}{tail}"


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def quadratic_roots_hurwitz(a: float, b: float, c: float, d: float) -> bool:
    """Root-sign oracle for ``s^2 + (a+bj)s + (c+dj)`` via the quadratic formula."""
    p = complex(a, b)
    q = complex(c, d)
    r = cmath.sqrt(p * p - 4.0 * q)
    return max(((-p + r) / 2.0).real, ((-p - r) / 2.0).real) < 0.0


def scalar_scaled_consensus(graph: NetworkGraph, s, y0, dt: float, steps: int, every: int) -> np.ndarray:
    """``dy_i/dt = sign(s_i) sum_j (s_j y_j - s_i y_i)`` by explicit four-stage RK4.

    Returns the states at every ``every``-th step (including step 0 and the last).
    """
    s = np.asarray(s, dtype=float)
    sg = np.sign(s)
    nbrs = [graph.neighbors(i + 1) for i in range(graph.n)]
    idx = [np.array(nb, dtype=int) - 1 for nb in nbrs]

    def f(y):
        sy = s * y
        return np.array([sg[i] * np.sum(sy[idx[i]] - sy[i]) for i in range(graph.n)])

    y = np.array(y0, dtype=float)
    out = [y.copy()]
    for k in range(1, steps + 1):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if k % every == 0 or k == steps:
            out.append(y.copy())
    return np.array(out)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def suite_spectral_counts(cases: list[CorpusCase]) -> SuiteResult:
    res = SuiteResult("spectral_counts", len(cases))
    for c in cases:
        try:
            r = spectral_report(c.system)
        except MscError as exc:
            res.failures.append(f"system {c.index}: {type(exc).__name__}: {exc}")
            continue
        if r.zero_count != c.system.d or r.positive_real_count != c.system.dim - c.system.d:
            res.failures.append(f"system {c.index}: counts {r.zero_count}/{r.positive_real_count}")
    return res


def suite_kernel(cases: list[CorpusCase]) -> SuiteResult:
    res = SuiteResult("theta_kernel", len(cases))
    worst = 0.0
    for c in cases:
        sys = c.system
        ones = np.kron(np.ones((sys.n, 1)), np.eye(sys.d))
        gap = float(np.max(np.abs(sys.theta @ ones)))
        worst = max(worst, gap)
        if gap >= 1e-10:
            res.failures.append(f"system {c.index}: |Theta (1 x I)| = {gap:.3e}")
    res.detail = f"worst {worst:.3e}"
    return res


def suite_edge_form(cases: list[CorpusCase]) -> SuiteResult:
    res = SuiteResult("edge_form_spectrum_match", len(cases))
    worst = 0.0
    for c in cases:
        m = compare_nonzero_spectra(c.system)
        worst = max(worst, m.max_distance / m.tolerance)
        if not m.matched:
            res.failures.append(f"system {c.index}: distance {m.max_distance:.3e} > {m.tolerance:.3e}")
    res.detail = f"worst distance/tolerance {worst:.3e}"
    return res


def suite_critical_gains(cases: list[CorpusCase]) -> SuiteResult:
    res = SuiteResult("conservative_gain_hurwitz", len(cases))
    for c in cases:
        r = spectral_report(c.system)
        if r.alpha_critical_conservative < r.alpha_critical_exact:
            res.failures.append(f"system {c.index}: conservative gain below exact gain")
            continue
        alpha = r.alpha_critical_conservative * 1.0001 + 1e-9
        for mu in r.nonzero():
            if not hurwitz_complex_quadratic(alpha, 0.0, mu.real, mu.imag):
                res.failures.append(f"system {c.index}: mu = {mu:.6g} not stabilized at {alpha:.6g}")
                break
    return res


def suite_hurwitz(seed: int, count: int = 10_000) -> SuiteResult:
    rng = SplitMix64(seed)
    res = SuiteResult("hurwitz_root_oracle", 0)
    checked = 0
    while checked < count:
        a, b, c, d = (rng.uniform(-3.0, 3.0) for _ in range(4))
        if abs(hurwitz_criterion(a, b, c, d)) <= 1e-6:
            continue
        checked += 1
        if hurwitz_complex_quadratic(a, b, c, d) != quadratic_roots_hurwitz(a, b, c, d):
            res.failures.append(f"({a:.6g}, {b:.6g}, {c:.6g}, {d:.6g})")
    res.total = checked
    return res


def suite_rhs(cases: list[CorpusCase]) -> SuiteResult:
    res = SuiteResult("rhs_dual_path", len(cases))
    worst = 0.0
    for c in cases:
        gap = float(np.max(np.abs(single_rhs_matrix(c.system, c.x0) - single_rhs_local(c.system, c.x0))))
        worst = max(worst, gap)
        if gap >= 1e-12:
            res.failures.append(f"system {c.index}: gap {gap:.3e}")
    res.detail = f"worst {worst:.3e}"
    return res


def suite_single_runs(cases: list[CorpusCase]) -> tuple[SuiteResult, SuiteResult]:
    """Conservation/Lyapunov monitors and limit agreement on single-integrator runs."""
    mon = SuiteResult("conservation_lyapunov", len(cases))
    lim = SuiteResult("single_limit_agreement", len(cases))
    worst_drift = 0.0
    for c in cases:
        r = spectral_report(c.system)
        cfg = IntegratorConfig(t_end=settle_horizon(r.min_nonzero_real), record_every=10)
        traj = integrate_single(c.system, c.x0, cfg)
        drift = float(np.max(traj.monitors["xa_drift"]))
        worst_drift = max(worst_drift, drift)
        lyap = traj.monitors["lyapunov"]
        rise = float(np.max(np.diff(lyap), initial=0.0))
        if drift >= XA_DRIFT_LIMIT:
            mon.failures.append(f"system {c.index}: xa drift {drift:.3e}")
        elif rise > LYAPUNOV_SLACK * max(1.0, lyap[0]):
            mon.failures.append(f"system {c.index}: Lyapunov rose by {rise:.3e}")
        v = convergence_verdict(traj, c.system, predicted_limit_single(c.system, c.x0), LIMIT_TOL)
        if not v.converged:
            lim.failures.append(f"system {c.index}: {v}")
    mon.detail = f"worst drift {worst_drift:.3e}"
    return mon, lim


def double_decay_rate(report, alpha: float) -> float:
    """Slowest decay rate of the nonzero modes of the damped closed loop."""
    rates = []
    for mu in report.nonzero():
        r = cmath.sqrt(alpha * alpha - 4.0 * mu)
        rates.append(-max(((-alpha + r) / 2).real, ((-alpha - r) / 2).real))
    return min(rates, default=alpha)


def suite_double_runs(cases: list[CorpusCase]) -> SuiteResult:
    res = SuiteResult("double_limit_agreement", len(cases))
    for c in cases:
        r = spectral_report(c.system)
        alpha = max(1.5 * r.alpha_critical_exact, 1.0)
        rate = min(double_decay_rate(r, alpha), alpha)
        cfg = IntegratorConfig(t_end=settle_horizon(rate), record_every=10)
        traj = integrate_double(c.system, c.x0, c.v0, alpha, cfg)
        pos, _ = predicted_limit_double(c.system, c.x0, c.v0, alpha, r)
        v = convergence_verdict(traj, c.system, pos, LIMIT_TOL)
        if not v.converged or traj.monitors["velocity_norm"][-1] >= 1e-6:
            res.failures.append(f"system {c.index}: {v}")
    return res


def scalar_case(rng: SplitMix64):
    n = rng.randint(2, 6)
    d = rng.randint(1, 3)
    g = random_connected_graph(n, 0.5, rng)
    s = []
    for _ in range(n):
        mag = rng.uniform(0.3, 2.0)
        s.append(mag if rng.random() < 0.5 else -mag)
    x0 = np.array(rng.uniform_array(-1.0, 1.0, n * d))
    return g, s, d, x0


def scalar_reduction_check(g: NetworkGraph, s, d: int, x0, cfg: IntegratorConfig) -> tuple[float, float]:
    """Run the matrix model with ``S_i = s_i I_d`` against the scalar oracle.

    Returns (max trajectory gap over all samples and coordinates, spread of
    ``s_i x_i(T)`` across agents).
    """
    system = assemble(g, [classify(si * np.eye(d)) for si in s], d)
    traj = integrate_single(system, x0, cfg)
    xs = traj.positions.reshape(traj.samples, g.n, d)
    gap = 0.0
    for c in range(d):
        ref = scalar_scaled_consensus(g, s, xs[0, :, c], cfg.dt, cfg.steps, cfg.record_every)
        gap = max(gap, float(np.max(np.abs(ref - xs[:, :, c]))))
    scaled = np.asarray(s)[:, None] * xs[-1]
    spread = float(np.max(np.abs(scaled - scaled[0][None, :])))
    return gap, spread


def suite_scalar(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("scalar_reduction_oracle", count)
    master = SplitMix64(seed)
    worst = 0.0
    for k in range(count):
        g, s, d, x0 = scalar_case(master.spawn())
        system = assemble(g, [classify(si * np.eye(d)) for si in s], d)
        t_end = settle_horizon(spectral_report(system).min_nonzero_real)
        gap, spread = scalar_reduction_check(g, s, d, x0, IntegratorConfig(t_end=t_end, record_every=10))
        worst = max(worst, gap)
        if gap >= 1e-9 or spread >= 1e-6:
            res.failures.append(f"case {k}: gap {gap:.3e}, spread {spread:.3e}")
    res.detail = f"worst gap {worst:.3e}"
    return res


# ---------------------------------------------------------------------------


def corrupt_sign(case: CorpusCase) -> CorpusCase:
    """Flip the recorded sign of agent 1 without touching its matrix."""
    sys = case.system
    members = list(sys.scalings)
    m0 = members[0]
    members[0] = ScalingMatrix(m0.matrix, -m0.sign, m0.margin)
    return CorpusCase(case.index, case.graph, assemble(sys.graph, members, sys.d), case.x0, case.v0)


def run_all(seed: int = 7, systems: int = 200, inject_fault: bool = False) -> list[SuiteResult]:
    cases = list(corpus(seed, systems))
    if inject_fault:
        cases = [corrupt_sign(c) for c in cases]
    results = [suite_spectral_counts(cases)]
    # the remaining suites need a valid spectrum; a corrupted corpus stops here
    healthy = [] if inject_fault else cases
    results += [
        suite_kernel(cases),
        suite_edge_form(cases),
        suite_rhs(cases),
        suite_hurwitz(seed + 1),
    ]
    if healthy:
        results.append(suite_critical_gains(healthy))
        results.extend(suite_single_runs(healthy))
        results.append(suite_double_runs(healthy[: max(1, len(healthy) // 10)]))
    results.append(suite_scalar(seed + 2, max(1, systems // 10)))
    return results


def format_report(seed: int, systems: int, results: list[SuiteResult], max_failures: int = 5) -> str:
    lines = [f"msc verify: seed={seed} systems={systems}"]
    for r in results:
        lines.append(r.line())
        for f in r.failures[:max_failures]:
            lines.append(f"    {f}")
        if len(r.failures) > max_failures:
            lines.append(f"    ... {len(r.failures) - max_failures} more")
    ok = all(r.passed for r in results)
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines) + "\n"
