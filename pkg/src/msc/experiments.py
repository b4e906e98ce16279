"""Scenario-level workflows behind the CLI: analyze, simulate, sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from msc.protocol import (
    MscSystem,
    SpectralReport,
    SpectrumMatch,
    assemble,
    compare_nonzero_spectra,
    predicted_limit_double,
    predicted_limit_single,
    scaled_disagreement,
    spectral_report,
    virtual_consensus_point,
)
from msc.scaling import scaling_groups
from msc.scenario import Scenario
from msc.sim import (
    ClusterReport,
    Trajectory,
    Verdict,
    convergence_verdict,
    detect_clusters,
    double_limit_formula,
    integrate_double,
    integrate_single,
)

ALPHA_NOTE = (
    "The critical damping gain depends on the interaction graph. It is recomputed "
    "for this scenario's graph; gains quoted for other graphs do not transfer."
)


@dataclass
class Analysis:
    system: MscSystem
    report: SpectralReport
    match: SpectrumMatch


@dataclass
class SimulationResult:
    scenario: Scenario
    system: MscSystem
    report: SpectralReport
    alpha: float | None
    trajectory: Trajectory
    predicted: np.ndarray
    predicted_attainable: bool
    verdict: Verdict
    clusters: ClusterReport | None
    xa: np.ndarray


def build_system(scn: Scenario) -> MscSystem:
    return assemble(scn.graph, scn.scalings, scn.d)


def analyze(scn: Scenario) -> Analysis:
    sys = build_system(scn)
    return Analysis(sys, spectral_report(sys), compare_nonzero_spectra(sys))


def simulate(scn: Scenario, alpha: float | None = None) -> SimulationResult:
    """Run a scenario to its horizon and judge it against the closed-form limit."""
    sys = build_system(scn)
    report = spectral_report(sys)
    tol = scn.tolerances["converge"]
    if scn.dynamics == "single":
        traj = integrate_single(sys, scn.initial_positions, scn.integrator)
        predicted = predicted_limit_single(sys, scn.initial_positions)
        xa = virtual_consensus_point(sys, scn.initial_positions)
        attainable = True
        alpha = None
    else:
        if alpha is None:
            alpha = scn.resolve_alpha(report.alpha_critical_exact)
        x1, x2 = scn.initial_positions, scn.initial_velocities
        traj = integrate_double(sys, x1, x2, alpha, scn.integrator)
        attainable = alpha > report.alpha_critical_exact
        if attainable:
            predicted, _ = predicted_limit_double(sys, x1, x2, alpha, report)
        else:
            predicted = double_limit_formula(sys, x1, x2, alpha)
        xa = virtual_consensus_point(sys, x1) + virtual_consensus_point(sys, x2) / alpha
    verdict = convergence_verdict(traj, sys, predicted, tol)
    clusters = None
    if verdict.converged:
        clusters = detect_clusters(traj.agent_positions(), scn.tolerances["cluster"])
    return SimulationResult(scn, sys, report, alpha, traj, predicted, attainable, verdict, clusters, xa)


def _f(x) -> float | None:
    """JSON-safe float."""
    x = float(x)
    return x if math.isfinite(x) else None


def _vecs(a: np.ndarray, n: int, d: int) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.asarray(a).reshape(n, d)]


def spectral_summary(report: SpectralReport, match: SpectrumMatch | None = None) -> dict:
    out = {
        "eigenvalues": [[z.real, z.imag] for z in report.eigenvalues],
        "zero_threshold": report.zero_threshold,
        "zero_count": report.zero_count,
        "positive_real_count": report.positive_real_count,
        "min_nonzero_real_part": _f(report.min_nonzero_real),
        "alpha_critical_exact": _f(report.alpha_critical_exact),
        "alpha_critical_conservative": _f(report.alpha_critical_conservative),
        "residual_bound": report.residual_bound,
    }
    if match is not None:
        out["edge_form_match"] = {
            "matched": match.matched,
            "max_distance": match.max_distance,
            "tolerance": match.tolerance,
            "theta_nonzero": match.theta_nonzero,
            "edge_form_nonzero": match.edge_nonzero,
        }
    return out


def analysis_summary(scn: Scenario, an: Analysis) -> dict:
    return {
        "scenario": scn.name,
        "n": scn.n,
        "d": scn.d,
        "m": scn.graph.m,
        "signs": [int(s) for s in an.system.signs],
        "spectrum": spectral_summary(an.report, an.match),
        "alpha_note": ALPHA_NOTE,
    }


def simulation_summary(res: SimulationResult) -> dict:
    scn, sys, traj = res.scenario, res.system, res.trajectory
    n, d = sys.n, sys.d
    final = traj.final_positions()
    scaled_final = (sys.s_block @ final).reshape(n, d)
    mon = traj.monitors
    lyap = mon["lyapunov"]
    out = {
        "scenario": scn.name,
        "dynamics": scn.dynamics,
        "n": n,
        "d": d,
        "horizon": float(traj.times[-1]),
        "samples": int(traj.samples),
        "verdict": res.verdict.status,
        "t_settle": res.verdict.t_settle,
        "final_error_inf": _f(res.verdict.final_error),
        "virtual_consensus_point": [float(v) for v in res.xa],
        "max_scaled_error": _f(np.max(np.linalg.norm(scaled_final - res.xa[None, :], axis=1))),
        "predicted_limit": _vecs(res.predicted, n, d),
        "predicted_limit_attainable": res.predicted_attainable,
        "attained": _vecs(final, n, d),
        "alpha_critical_exact": _f(res.report.alpha_critical_exact),
        "alpha_critical_conservative": _f(res.report.alpha_critical_conservative),
        "monitors": {
            "max_xa_drift": _f(np.max(mon["xa_drift"])),
            "lyapunov_initial": _f(lyap[0]),
            "lyapunov_final": _f(lyap[-1]),
            "lyapunov_max_increase": _f(np.max(np.diff(lyap), initial=0.0)),
            "final_disagreement": _f(mon["disagreement"][-1]),
            "final_velocity_norm": _f(mon["velocity_norm"][-1]),
        },
        "distinct_scalings": len(set(scaling_groups(sys.scalings))),
    }
    if scn.dynamics == "double":
        out["alpha"] = res.alpha
        out["alpha_multiple_of_critical"] = (
            res.alpha / res.report.alpha_critical_exact if res.report.alpha_critical_exact > 0 else None
        )
        out["alpha_note"] = ALPHA_NOTE
    if res.clusters is not None:
        c = res.clusters
        out["clusters"] = {
            "count": c.count,
            "threshold": c.threshold,
            "max_intra_distance": c.max_intra_distance,
            "min_inter_distance": _f(c.min_inter_distance),
            "groups": [
                {"id": k + 1, "agents": [i + 1 for i in members], "center": [float(v) for v in c.centers[k]]}
                for k, members in enumerate(c.members())
            ],
        }
    else:
        out["clusters"] = None
    return out


def sweep(scn: Scenario, alphas, relative: bool = False) -> tuple[list[dict], float, bool]:
    """Simulate a double-integrator scenario at each gain.

    Returns the rows (sorted by gain), the exact critical gain, and whether
    the verdict boundary is monotone: no Converged gain below a Diverged one,
    except inside a 1 % band around the critical gain.
    """
    if scn.dynamics != "double":
        raise ValueError("alpha sweeps need a double-integrator scenario")
    sys = build_system(scn)
    report = spectral_report(sys)
    star = report.alpha_critical_exact
    rows = []
    for a in alphas:
        alpha = a * star if relative else float(a)
        if not alpha > 0:
            raise ValueError(f"gain must be positive, got {alpha}")
        traj = integrate_double(sys, scn.initial_positions, scn.initial_velocities, alpha, scn.integrator)
        pred = double_limit_formula(sys, scn.initial_positions, scn.initial_velocities, alpha)
        v = convergence_verdict(traj, sys, pred, scn.tolerances["converge"])
        rows.append(
            {
                "alpha": alpha,
                "alpha_over_critical": alpha / star if star > 0 else None,
                "verdict": v.status,
                "t_settle": v.t_settle,
                "final_disagreement": float(scaled_disagreement(sys, traj.final_positions())),
            }
        )
    rows.sort(key=lambda r: r["alpha"])
    band = 0.01 * star
    monotone = True
    for i, r in enumerate(rows):
        if r["verdict"] != "converged" or abs(r["alpha"] - star) <= band:
            continue
        for later in rows[i + 1 :]:
            if later["verdict"] == "diverged" and abs(later["alpha"] - star) > band:
                monotone = False
    return rows, star, monotone
