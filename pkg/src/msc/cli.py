"""Command-line entry point: ``msc analyze | simulate | sweep | verify``.

Exit codes: 0 success, 2 scenario validation error, 3 diverged simulation,
4 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from msc import experiments, plotting, report
from msc.errors import MscError, ScenarioError
from msc.scaling import scaling_groups
from msc.scenario import BUILTIN, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGED = 3
EXIT_VERIFY = 4

log = logging.getLogger("msc")


def cmd_analyze(args) -> int:
    scn = load_scenario(args.scenario)
    an = experiments.analyze(scn)
    summary = experiments.analysis_summary(scn, an)
    sys.stdout.write(report.format_spectral_report(summary))
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        report.write_json(summary, out / "analysis.json")
        plotting.plot_spectrum(an.report, out / "spectrum.svg")
        log.info("wrote %s", out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario)
    res = experiments.simulate(scn, alpha=args.alpha)
    summary = experiments.simulation_summary(res)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    traj = res.trajectory
    groups = scaling_groups(res.system.scalings)
    files = [
        report.write_trajectory_csv(traj, out / "trajectory.csv"),
        report.write_monitors_csv(traj, out / "monitors.csv"),
    ]
    if not args.no_plots:
        files += [
            plotting.plot_states(traj, groups, out / "states.svg"),
            plotting.plot_paths(traj, groups, res.clusters, out / "paths.svg"),
            plotting.plot_monitors(traj, out / "monitors.svg"),
        ]
    summary["files"] = [f.name for f in files] + ["summary.json"]
    report.write_json(summary, out / "summary.json")
    sys.stdout.write(report.format_simulation_summary(summary))
    return EXIT_DIVERGED if res.verdict.diverged else EXIT_OK


def _parse_alphas(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError("--alphas", f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ScenarioError("--alphas", "no gains given")
    return values


def cmd_sweep(args) -> int:
    scn = load_scenario(args.scenario)
    if scn.dynamics != "double":
        raise ScenarioError("dynamics", "alpha sweeps need a double-integrator scenario")
    rows, star, monotone = experiments.sweep(scn, _parse_alphas(args.alphas), relative=args.relative)
    sys.stdout.write(report.format_sweep(rows, star, monotone))
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        report.write_sweep_csv(rows, out / "sweep.csv")
        if not args.no_plots:
            plotting.plot_sweep(rows, star, out / "sweep.svg")
    return EXIT_OK


def cmd_verify(args) -> int:
    from msc import verify

    results = verify.run_all(seed=args.seed, systems=args.systems, inject_fault=args.inject_fault)
    text = verify.format_report(args.seed, args.systems, results)
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="msc", description="Matrix-scaled consensus analysis and simulation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    builtin = ", ".join(BUILTIN)

    a = sub.add_parser("analyze", help="spectrum and critical damping gains of a scenario")
    a.add_argument("scenario", help=f"scenario file or built-in name ({builtin})")
    a.add_argument("-o", "--output", help="directory for analysis.json and spectrum.svg")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="integrate a scenario and write CSV, summary and plots")
    s.add_argument("scenario")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--alpha", type=float, help="override the damping gain (double integrators)")
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="verdict per damping gain")
    w.add_argument("scenario")
    w.add_argument("--alphas", required=True, help="comma-separated gains, e.g. 1.5,2,3")
    w.add_argument("--relative", action="store_true", help="gains are multiples of the exact critical gain")
    w.add_argument("-o", "--output")
    w.add_argument("--no-plots", action="store_true")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the randomized property suites")
    v.add_argument("--seed", type=int, default=7)
    v.add_argument("--systems", type=int, default=200)
    v.add_argument("--report", help="also write the report to this file")
    v.add_argument("--inject-fault", action="store_true", help="corrupt one scaling sign per system (self-test)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"msc: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MscError as exc:
        print(f"msc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
