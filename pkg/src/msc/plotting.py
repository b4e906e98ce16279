"""Static figures for simulation and analysis reports (matplotlib, SVG).

Figures are written with a fixed hash salt and no date metadata so that
repeated runs produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PARAMS = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 0.9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "msc",
    "svg.fonttype": "path",
}

# one color per scaling group (cycled)
GROUP_COLORS = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"]


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _group_colors(groups) -> list[str]:
    return [GROUP_COLORS[g % len(GROUP_COLORS)] for g in groups]


def plot_states(traj, groups, path) -> Path:
    """Each state component against time, one panel per component
    (positions, then velocities for double runs)."""
    with plt.rc_context(PARAMS):
        rows = 2 if traj.velocities is not None else 1
        fig, axes = plt.subplots(rows, traj.d, figsize=(3.2 * traj.d, 2.4 * rows), squeeze=False)
        colors = _group_colors(groups)
        series = [("x", traj.positions)]
        if traj.velocities is not None:
            series.append(("v", traj.velocities))
        for r, (label, data) in enumerate(series):
            agents = data.reshape(data.shape[0], traj.n, traj.d)
            for c in range(traj.d):
                ax = axes[r][c]
                for i in range(traj.n):
                    ax.plot(traj.times, agents[:, i, c], color=colors[i])
                ax.set_xlabel("t [s]")
                ax.set_ylabel(f"{label}_i,{c + 1}")
        fig.tight_layout()
        return _save(fig, path)


def plot_paths(traj, groups, clusters, path) -> Path:
    """Agent paths with start (o) and end (x) markers; cluster centers as stars.

    3-D states get a 3-D axis; higher dimensions are projected on the first
    two components.
    """
    with plt.rc_context(PARAMS):
        colors = _group_colors(groups)
        agents = traj.positions.reshape(traj.samples, traj.n, traj.d)
        three = traj.d == 3
        fig = plt.figure(figsize=(4.2, 4.0))
        ax = fig.add_subplot(projection="3d" if three else None)
        k = 3 if three else min(traj.d, 2)
        for i in range(traj.n):
            p = agents[:, i, :k]
            if k == 1:
                p = np.column_stack([traj.times, p[:, 0]])
            ax.plot(*p.T, color=colors[i], alpha=0.8)
            ax.scatter(*p[0], marker="o", s=10, color=colors[i])
            ax.scatter(*p[-1], marker="x", s=18, color=colors[i])
        if clusters is not None and k > 1:
            for c in clusters.centers:
                ax.scatter(*c[:k], marker="*", s=90, color="black", zorder=5)
        ax.set_xlabel("component 1")
        ax.set_ylabel("component 2")
        if three:
            ax.set_zlabel("component 3")
        else:
            ax.set_aspect("equal", adjustable="datalim")
        fig.tight_layout()
        return _save(fig, path)


def plot_monitors(traj, path) -> Path:
    with plt.rc_context(PARAMS):
        names = ["lyapunov", "disagreement", "xa_drift"]
        if traj.velocities is not None:
            names.append("velocity_norm")
        fig, axes = plt.subplots(1, len(names), figsize=(2.6 * len(names), 2.4))
        for ax, name in zip(axes, names):
            y = np.abs(traj.monitors[name])
            y = np.where(y > 0, y, np.nan)
            ax.semilogy(traj.times, y, color="#333333")
            ax.set_title(name)
            ax.set_xlabel("t [s]")
        fig.tight_layout()
        return _save(fig, path)


def plot_spectrum(report, path) -> Path:
    """Eigenvalues of the scaled Laplacian in the complex plane."""
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots(figsize=(3.6, 3.2))
        z = np.array(report.eigenvalues, dtype=complex)
        zero = np.abs(z) < report.zero_threshold
        ax.scatter(z.real[~zero], z.imag[~zero], s=14, color="#1b9e77", label="nonzero")
        ax.scatter(z.real[zero], z.imag[zero], s=24, marker="s", color="#d95f02", label="zero")
        ax.axvline(0.0, color="black", lw=0.6)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.legend(loc="best")
        fig.tight_layout()
        return _save(fig, path)


def plot_sweep(rows, alpha_star, path) -> Path:
    """Final disagreement against damping gain, with the critical gain marked."""
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        marks = {"converged": ("o", "#1b9e77"), "diverged": ("x", "#d95f02"), "not_converged": ("s", "#7570b3")}
        for status, (m, c) in marks.items():
            pts = [(r["alpha"], r["final_disagreement"]) for r in rows if r["verdict"] == status]
            if pts:
                a, v = zip(*pts)
                ax.scatter(a, np.maximum(v, 1e-300), marker=m, color=c, label=status)
        ax.axvline(alpha_star, color="black", ls="--", lw=0.8, label="critical gain")
        ax.set_yscale("log")
        ax.set_xlabel("alpha")
        ax.set_ylabel("final disagreement")
        ax.legend(loc="best")
        fig.tight_layout()
        return _save(fig, path)
