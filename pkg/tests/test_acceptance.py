"""Acceptance criteria, each run at its stated tolerance.

Every check records a line through ``conftest.record``; the terminal summary
prints one PASS/FAIL line per criterion (with its sub-checks) at the end of
the session. Run alone with ``pytest tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from conftest import record
from msc import experiments, verify
from msc.cli import main
from msc.corpus import settle_horizon
from msc.protocol import (
    compare_nonzero_spectra,
    predicted_limit_double,
    spectral_report,
    virtual_consensus_point,
)
from msc.scaling import rotation2
from msc.scenario import BUILTIN, load_scenario
from msc.sim import IntegratorConfig, detect_clusters, integrate_single

T1 = "spectral counts on 200 random systems"
T2 = "nonzero spectra of Theta and the edge-form matrix coincide"
T3 = "sim1-2d reaches the closed-form limit in three clusters"
T4 = "conservation, Lyapunov decrease and dt-halving"
T5 = "double-integrator threshold bracketing"
T6 = "scalar-reduction oracle"
T7 = "Hurwitz test against the root oracle"
T8 = "determinism"


def check(k, title, label, ok, detail=""):
    record(k, title, label, ok, detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {k} / {label}: {detail}")
    assert ok, f"criterion {k} ({label}): {detail}"


# ---------------------------------------------------------------------------
# 1, 2: spectral structure on the random corpus
# ---------------------------------------------------------------------------


def test_c1_spectral_counts(cases):
    t0 = time.perf_counter()
    bad = []
    for c in cases:
        rep = spectral_report(c.system, strict=False)
        scale = max(1.0, float(np.linalg.norm(c.system.theta)))
        thr = 1e-8 * scale
        zeros = sum(1 for z in rep.eigenvalues if abs(z) < thr)
        positive = sum(1 for z in rep.eigenvalues if abs(z) >= thr and z.real > thr)
        if zeros != c.system.d or positive != c.system.dim - c.system.d:
            bad.append(c.index)
    elapsed = time.perf_counter() - t0
    check(1, T1, "exactly d zero and dn-d right-half-plane eigenvalues", not bad and len(cases) == 200,
          f"{len(bad)} failures over {len(cases)} systems")
    check(1, T1, "runtime < 30 s", elapsed < 30.0, f"{elapsed:.2f} s")


def test_c2_edge_form_spectrum(cases):
    worst = 0.0
    bad = []
    for c in cases:
        m = compare_nonzero_spectra(c.system)
        worst = max(worst, m.max_distance / m.tolerance)
        if not m.matched:
            bad.append(c.index)
    check(2, T2, "greedy pairing within 1e-7 max(1, ||Theta||_F)", not bad,
          f"{len(bad)} failures; worst distance/tolerance {worst:.2e}")


# ---------------------------------------------------------------------------
# 3: sim1-2d
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def sim1():
    t0 = time.perf_counter()
    res = experiments.simulate(load_scenario("sim1-2d"))
    return res, time.perf_counter() - t0


def test_c3_sim1_limit(sim1):
    res, elapsed = sim1
    sys = res.system
    final = res.trajectory.agent_positions()
    xa = virtual_consensus_point(sys, res.scenario.initial_positions)
    err = max(float(np.linalg.norm(m.matrix @ x - xa)) for m, x in zip(sys.scalings, final))
    check(3, T3, "max_i ||S_i x_i(T) - x^a(0)|| < 1e-6 at T = 40",
          err < 1e-6 and res.trajectory.times[-1] == pytest.approx(40.0), f"{err:.3e}")
    check(3, T3, "runtime < 10 s", elapsed < 10.0, f"{elapsed:.2f} s")


def test_c3_sim1_clusters(sim1):
    res, _ = sim1
    rep = detect_clusters(res.trajectory.agent_positions(), 1e-3)
    groups = [[i + 1 for i in g] for g in rep.members()]
    want = [list(range(1, 7)), list(range(7, 12)), list(range(12, 17))]
    check(3, T3, "3 clusters {1-6}, {7-11}, {12-16}", groups == want, f"{groups}")
    c = rep.centers
    sides = [float(np.linalg.norm(c[i] - c[j])) for i, j in ((0, 1), (1, 2), (0, 2))] if rep.count == 3 else [math.inf]
    spread = max(sides) - min(sides)
    check(3, T3, "cluster centers pairwise equidistant within 1e-6", spread < 1e-6, f"side spread {spread:.3e}")


# ---------------------------------------------------------------------------
# 4: conservation and Lyapunov decrease on every single-integrator run
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def single_runs(cases, sim1):
    runs = []
    for c in cases:
        rep = spectral_report(c.system)
        cfg = IntegratorConfig(t_end=settle_horizon(rep.min_nonzero_real), record_every=10)
        runs.append((f"system {c.index}", integrate_single(c.system, c.x0, cfg)))
    runs.append(("sim1-2d", sim1[0].trajectory))
    return runs


def test_c4_xa_drift(single_runs):
    worst_name, worst = max(((n, float(np.max(t.monitors["xa_drift"]))) for n, t in single_runs), key=lambda p: p[1])
    check(4, T4, "xa_drift < 1e-7 on every run", worst < 1e-7,
          f"{len(single_runs)} runs; worst {worst:.3e} ({worst_name})")


def test_c4_lyapunov(single_runs):
    bad = []
    for name, t in single_runs:
        lyap = t.monitors["lyapunov"]
        if np.max(np.diff(lyap), initial=0.0) > 1e-9 * max(1.0, lyap[0]):
            bad.append(name)
    check(4, T4, "Lyapunov nonincreasing within 1e-9 relative slack", not bad,
          f"{len(bad)} violations over {len(single_runs)} runs")


def test_c4_dt_halving(sim1):
    res = sim1[0]
    scn = res.scenario
    base = scn.integrator
    half = IntegratorConfig(dt=base.dt / 2, t_end=base.t_end, record_every=2 * base.record_every)
    coarse = float(res.trajectory.monitors["xa_drift"][-1])
    fine = float(integrate_single(res.system, scn.initial_positions, half).monitors["xa_drift"][-1])
    ratio = coarse / fine if fine > 0 else (math.inf if coarse > 0 else math.nan)
    check(4, T4, "halving dt cuts final xa_drift by >= 12x", ratio >= 12.0,
          f"drift {coarse:.3e} at dt={base.dt}, {fine:.3e} at dt={half.dt}, ratio {ratio:.3g}")


# ---------------------------------------------------------------------------
# 5: double-integrator bracketing
# ---------------------------------------------------------------------------


def test_c5_bracketing():
    t0 = time.perf_counter()
    stable, unstable = load_scenario("sim2-stable"), load_scenario("sim2-unstable")
    angles = [math.pi / 4, 3 * math.pi / 4, -3 * math.pi / 4, -math.pi / 4]
    setup_ok = all(
        any(np.allclose(m.matrix, rotation2(a)) for a in angles) for m in stable.scalings
    ) and (stable.alpha_multiple, unstable.alpha_multiple) == (1.5, 0.9)
    check(5, T5, "scenarios use rotations +-pi/4, +-3pi/4 at 1.5 and 0.9 x alpha*", setup_ok,
          f"multiples {stable.alpha_multiple} and {unstable.alpha_multiple}")

    hi = experiments.simulate(stable)
    lo = experiments.simulate(unstable)
    elapsed = time.perf_counter() - t0
    star = hi.report.alpha_critical_exact
    check(5, T5, "0.9 alpha* is Diverged", lo.verdict.diverged, f"alpha = {lo.alpha:.6f}, {lo.verdict}")
    check(5, T5, "1.5 alpha* is Converged", hi.verdict.converged, f"alpha = {hi.alpha:.6f}, {hi.verdict}")
    vel = float(hi.trajectory.monitors["velocity_norm"][-1])
    check(5, T5, "final max_i ||x_i^2|| < 1e-6", vel < 1e-6, f"{vel:.3e}")
    pos, _ = predicted_limit_double(hi.system, stable.initial_positions, stable.initial_velocities, hi.alpha, hi.report)
    gap = float(np.max(np.abs(hi.trajectory.final_positions() - pos)))
    check(5, T5, "positions within 1e-5 of the predicted limit", gap < 1e-5, f"{gap:.3e}")
    cons = hi.report.alpha_critical_conservative
    check(5, T5, "conservative gain >= exact gain", cons >= star, f"{cons:.6f} >= {star:.6f}")
    check(5, T5, "runtime < 20 s", elapsed < 20.0, f"{elapsed:.2f} s")


# ---------------------------------------------------------------------------
# 6, 7: independent oracles
# ---------------------------------------------------------------------------


def test_c6_scalar_reduction():
    from msc.rng import SplitMix64
    from msc.protocol import assemble
    from msc.scaling import classify

    master = SplitMix64(606)
    worst_gap = worst_spread = 0.0
    count = 30
    for _ in range(count):
        g, s, d, x0 = verify.scalar_case(master.spawn())
        system = assemble(g, [classify(si * np.eye(d)) for si in s], d)
        t_end = settle_horizon(spectral_report(system).min_nonzero_real)
        gap, spread = verify.scalar_reduction_check(g, s, d, x0, IntegratorConfig(t_end=t_end, record_every=10))
        worst_gap, worst_spread = max(worst_gap, gap), max(worst_spread, spread)
    check(6, T6, "trajectories match the scalar oracle to 1e-9", worst_gap < 1e-9,
          f"{count} systems; worst gap {worst_gap:.3e}")
    check(6, T6, "s_i x_i(T) agree within 1e-6", worst_spread < 1e-6, f"worst spread {worst_spread:.3e}")


def test_c7_hurwitz():
    t0 = time.perf_counter()
    res = verify.suite_hurwitz(seed=77, count=10_000)
    elapsed = time.perf_counter() - t0
    check(7, T7, "zero disagreements on 10,000 tuples with |criterion| > 1e-6",
          res.total == 10_000 and not res.failures, f"{len(res.failures)} disagreements")
    check(7, T7, "runtime < 1 s", elapsed < 1.0, f"{elapsed:.3f} s")


# ---------------------------------------------------------------------------
# 8: determinism
# ---------------------------------------------------------------------------


def test_c8_verify_report(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    codes = [main(["verify", "--seed", "7", "--report", str(p)]) for p in (a, b)]
    capsys.readouterr()
    same = a.read_bytes() == b.read_bytes()
    check(8, T8, "msc verify --seed 7 twice gives byte-identical reports", same,
          f"exit codes {codes}, {len(a.read_bytes())} bytes")


def test_c8_golden_csvs(tmp_path, capsys):
    differing = []
    for name in BUILTIN:
        outs = []
        for k in range(2):
            out = tmp_path / f"{name}-{k}"
            main(["simulate", name, "-o", str(out), "--no-plots"])
            outs.append(out)
        for csv_name in ("trajectory.csv", "monitors.csv"):
            if (outs[0] / csv_name).read_bytes() != (outs[1] / csv_name).read_bytes():
                differing.append(f"{name}/{csv_name}")
    capsys.readouterr()
    check(8, T8, "golden scenarios give byte-identical CSVs", not differing,
          f"{len(BUILTIN)} scenarios; differing: {differing or 'none'}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
