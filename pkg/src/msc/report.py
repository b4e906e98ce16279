"""Writers for trajectory CSVs, JSON summaries and the text spectral report."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

TRAJECTORY_HEADER = ["t", "agent", "component_index", "value", "channel"]
MONITOR_HEADER = ["t", "lyapunov", "xa_drift", "disagreement", "velocity_norm"]


def fmt(v) -> str:
    return repr(float(v))


def write_trajectory_csv(traj, path) -> Path:
    """Long format, one row per (sample, channel, agent, component); 1-indexed."""
    path = Path(path)
    channels = [("state" if traj.kind == "single" else "position", traj.positions)]
    if traj.velocities is not None:
        channels.append(("velocity", traj.velocities))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for k, t in enumerate(traj.times):
            ts = fmt(t)
            for name, data in channels:
                row = data[k]
                for i in range(traj.n):
                    for c in range(traj.d):
                        w.writerow([ts, i + 1, c + 1, fmt(row[i * traj.d + c]), name])
    return path


def write_monitors_csv(traj, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MONITOR_HEADER)
        for k, t in enumerate(traj.times):
            w.writerow([fmt(t)] + [fmt(traj.monitors[name][k]) for name in MONITOR_HEADER[1:]])
    return path


def write_json(data: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, allow_nan=False) + "\n")
    return path


def format_spectral_report(summary: dict) -> str:
    sp = summary["spectrum"]
    lines = [
        f"scenario {summary['scenario']}: n={summary['n']} d={summary['d']} m={summary['m']}",
        "",
        f"{'k':>4}  {'Re(mu)':>14}  {'Im(mu)':>14}  class",
    ]
    thr = sp["zero_threshold"]
    for k, (re, im) in enumerate(sp["eigenvalues"], start=1):
        cls = "zero" if abs(complex(re, im)) < thr else ("positive" if re > thr else "VIOLATION")
        lines.append(f"{k:>4}  {re:>14.8f}  {im:>14.8f}  {cls}")
    lines += [
        "",
        f"zero eigenvalues:             {sp['zero_count']} (threshold {thr:.3e})",
        f"positive real part:           {sp['positive_real_count']}",
        f"min nonzero real part:        {_g(sp['min_nonzero_real_part'])}",
        f"critical gain (exact):        {_g(sp['alpha_critical_exact'])}",
        f"critical gain (conservative): {_g(sp['alpha_critical_conservative'])}",
    ]
    m = sp.get("edge_form_match")
    if m is not None:
        status = "match" if m["matched"] else "MISMATCH"
        lines.append(
            f"edge-form spectrum:           {status} (max distance {m['max_distance']:.3e}, "
            f"tolerance {m['tolerance']:.3e}, {m['theta_nonzero']} vs {m['edge_form_nonzero']} nonzero)"
        )
    lines += ["", summary["alpha_note"]]
    return "\n".join(lines) + "\n"


def _g(v) -> str:
    return "n/a" if v is None else f"{v:.10g}"


def format_simulation_summary(s: dict) -> str:
    lines = [f"scenario {s['scenario']} ({s['dynamics']} integrator), horizon {s['horizon']:g} s"]
    if s["dynamics"] == "double":
        mult = s.get("alpha_multiple_of_critical")
        extra = f" = {mult:.4g} x critical" if mult is not None else ""
        lines.append(f"alpha = {s['alpha']:.10g}{extra} (exact critical gain {s['alpha_critical_exact']:.10g})")
    verdict = s["verdict"]
    if verdict == "converged":
        verdict += f" (t_settle = {s['t_settle']:g} s)"
    lines.append(f"verdict: {verdict}")
    lines.append(f"virtual consensus point: {np.array2string(np.array(s['virtual_consensus_point']), precision=6)}")
    if s["final_error_inf"] is not None:
        lines.append(f"final |x - predicted|_inf = {s['final_error_inf']:.3e}")
    c = s.get("clusters")
    if c:
        lines.append(f"clusters: {c['count']} (threshold {c['threshold']:g})")
        for g in c["groups"]:
            center = np.array2string(np.array(g["center"]), precision=6)
            lines.append(f"  #{g['id']}: agents {g['agents']} at {center}")
    return "\n".join(lines) + "\n"


def write_sweep_csv(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "alpha_over_critical", "verdict", "t_settle", "final_disagreement"])
        for r in rows:
            w.writerow(_sweep_cells(r))
    return path


def _sweep_cells(r) -> list[str]:
    return [
        fmt(r["alpha"]),
        "" if r["alpha_over_critical"] is None else fmt(r["alpha_over_critical"]),
        r["verdict"],
        "" if r["t_settle"] is None else fmt(r["t_settle"]),
        fmt(r["final_disagreement"]),
    ]


def format_sweep(rows, star: float, monotone: bool) -> str:
    lines = [
        f"exact critical gain: {star:.10g}",
        f"{'alpha':>12}  {'alpha/crit':>10}  {'verdict':<14}  {'t_settle':>9}  final disagreement",
    ]
    for r in rows:
        rel = "" if r["alpha_over_critical"] is None else f"{r['alpha_over_critical']:.4f}"
        ts = "" if r["t_settle"] is None else f"{r['t_settle']:.3f}"
        lines.append(f"{r['alpha']:>12.6f}  {rel:>10}  {r['verdict']:<14}  {ts:>9}  {r['final_disagreement']:.3e}")
    lines.append(f"verdict boundary monotone: {'yes' if monotone else 'NO'}")
    return "\n".join(lines) + "\n"
