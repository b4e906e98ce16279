"""Fixed-step simulation of the consensus networks with runtime monitors.

Both closed loops are linear and time-invariant, ``dz/dt = A z``. A classical
RK4 step applied to such a system is exactly multiplication by the degree-4
Taylor polynomial of ``dt * A``, so the propagator is built once and each
step is a single matrix-vector product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from msc.errors import NonFinite, StepTooLarge
from msc.numerics import spectral_radius
from msc.protocol import (
    MscSystem,
    check_rhs_agreement,
    consensus_configuration,
    virtual_consensus_point,
)

OVERFLOW_GUARD = 1e12
RK4_STABILITY_LIMIT = 2.5


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.005
    t_end: float = 40.0
    record_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.dt > self.t_end:
            raise ValueError(f"dt = {self.dt} exceeds t_end = {self.t_end}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every}")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    kind: str
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray | None
    monitors: dict[str, np.ndarray]
    n: int
    d: int
    alpha: float | None = None
    diverged: bool = False

    @property
    def samples(self) -> int:
        return self.times.size

    def stacked(self) -> np.ndarray:
        """Full state per sample: positions, then velocities for double runs."""
        if self.velocities is None:
            return self.positions
        return np.hstack([self.positions, self.velocities])

    def final_positions(self) -> np.ndarray:
        return self.positions[-1]

    def agent_positions(self, k: int = -1) -> np.ndarray:
        return self.positions[k].reshape(self.n, self.d)


def rk4_propagator(a: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step of ``dz/dt = A z`` as a matrix."""
    ha = dt * a
    eye = np.eye(a.shape[0])
    return eye + ha @ (eye + ha @ (eye + ha @ (eye + ha / 4.0) / 3.0) / 2.0)


def _check_step(a: np.ndarray, dt: float) -> None:
    rho = spectral_radius(a)
    if dt * rho >= RK4_STABILITY_LIMIT:
        raise StepTooLarge(
            f"dt * spectral radius = {dt * rho:.4g} >= {RK4_STABILITY_LIMIT}; reduce dt "
            f"below {RK4_STABILITY_LIMIT / rho:.4g}"
        )


def _run(a: np.ndarray, z0: np.ndarray, cfg: IntegratorConfig):
    phi = rk4_propagator(a, cfg.dt)
    steps = cfg.steps
    rec = list(range(0, steps + 1, cfg.record_every))
    if rec[-1] != steps:
        rec.append(steps)
    out = np.empty((len(rec), z0.size))
    times = np.array(rec, dtype=float) * cfg.dt
    z = z0.copy()
    out[0] = z
    slot = 1
    diverged = False
    for k in range(1, steps + 1):
        z = phi @ z
        if not np.max(np.abs(z)) <= OVERFLOW_GUARD:
            diverged = True
            break
        if slot < len(rec) and rec[slot] == k:
            out[slot] = z
            slot += 1
    if diverged:
        out, times = out[:slot], times[:slot]
    return times, out, diverged


def _scaled(sys: MscSystem, xs: np.ndarray) -> np.ndarray:
    return xs @ sys.s_block.T


def _local_rhs_batch(sys: MscSystem, xs: np.ndarray) -> np.ndarray:
    """Agent-local law over many samples: accumulate neighbor differences per edge."""
    k = xs.shape[0]
    xc = _scaled(sys, xs).reshape(k, sys.n, sys.d)
    u = np.zeros_like(xc)
    if sys.graph.edges:
        e = np.array(sys.graph.edges) - 1
        diff = xc[:, e[:, 1]] - xc[:, e[:, 0]]
        np.add.at(u, (slice(None), e[:, 0]), diff)
        np.add.at(u, (slice(None), e[:, 1]), -diff)
    u *= sys.signs[None, :, None]
    return u.reshape(k, -1)


def _monitors(sys: MscSystem, xs: np.ndarray, xa_ref: np.ndarray, conserved) -> dict:
    xc = _scaled(sys, xs)
    lyap = np.einsum("ki,ij,kj->k", xc, sys.lbar, xc)
    if sys.graph.edges:
        e = np.array(sys.graph.edges) - 1
        c = xc.reshape(-1, sys.n, sys.d)
        disagreement = np.max(np.linalg.norm(c[:, e[:, 0]] - c[:, e[:, 1]], axis=2), axis=1)
    else:
        disagreement = np.zeros(xs.shape[0])
    drift = np.linalg.norm(conserved - xa_ref[None, :], axis=1)
    return {"lyapunov": lyap, "xa_drift": drift, "disagreement": disagreement}


def _xa_batch(sys: MscSystem, xs: np.ndarray) -> np.ndarray:
    agents = xs.reshape(xs.shape[0], sys.n, sys.d)
    return np.einsum("i,kid->kd", sys.signs, agents) @ sys.p.T


def _dual_path_check(sys: MscSystem, xs: np.ndarray) -> None:
    check_rhs_agreement(xs @ sys.system_matrix.T, _local_rhs_batch(sys, xs), xs)


def integrate_single(sys: MscSystem, x0, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the single-integrator network from ``x0``.

    Monitors: ``lyapunov`` (V = x_c^T Lbar x_c), ``xa_drift`` (distance of the
    virtual consensus point from its initial value) and ``disagreement``.

    Raises:
        StepTooLarge: ``dt`` violates the RK4 stability heuristic.
        NonFinite: the state exceeded the overflow guard.
    """
    cfg = cfg or IntegratorConfig()
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size != sys.dim:
        raise ValueError(f"x0 has length {x0.size}, expected {sys.dim}")
    _check_step(sys.system_matrix, cfg.dt)
    times, xs, diverged = _run(sys.system_matrix, x0, cfg)
    if diverged:
        raise NonFinite(f"state exceeded {OVERFLOW_GUARD:g} at t ~ {times[-1]:.4g}")
    _dual_path_check(sys, xs)
    xa = _xa_batch(sys, xs)
    mon = _monitors(sys, xs, virtual_consensus_point(sys, x0), xa)
    mon["velocity_norm"] = np.full(times.size, np.nan)
    return Trajectory("single", times, xs, None, mon, sys.n, sys.d)


def integrate_double(
    sys: MscSystem, x1_0, x2_0, alpha: float, cfg: IntegratorConfig | None = None
) -> Trajectory:
    """Integrate the damped double-integrator network.

    Divergence past the overflow guard is not an error: the trajectory is
    truncated and flagged ``diverged``. ``xa_drift`` tracks the conserved
    combination ``xa(x1) + xa(x2) / alpha``.
    """
    if not alpha > 0:
        raise ValueError(f"damping gain must be positive, got {alpha}")
    cfg = cfg or IntegratorConfig()
    x1_0 = np.asarray(x1_0, dtype=float).reshape(-1)
    x2_0 = np.asarray(x2_0, dtype=float).reshape(-1)
    if x1_0.size != sys.dim or x2_0.size != sys.dim:
        raise ValueError(f"initial states must have length {sys.dim}")
    a = sys.double_matrix(alpha)
    _check_step(a, cfg.dt)
    times, zs, diverged = _run(a, np.concatenate([x1_0, x2_0]), cfg)
    k = sys.dim
    x1, x2 = zs[:, :k], zs[:, k:]
    finite = np.all(np.isfinite(zs), axis=1)
    if np.all(finite):
        _dual_path_check(sys, x1)
    conserved = _xa_batch(sys, x1) + _xa_batch(sys, x2) / alpha
    ref = virtual_consensus_point(sys, x1_0) + virtual_consensus_point(sys, x2_0) / alpha
    mon = _monitors(sys, x1, ref, conserved)
    mon["velocity_norm"] = np.max(np.linalg.norm(x2.reshape(-1, sys.n, sys.d), axis=2), axis=1)
    return Trajectory("double", times, x1, x2, mon, sys.n, sys.d, alpha=alpha, diverged=diverged)


# ---------------------------------------------------------------------------
# Post-processing
# ---------------------------------------------------------------------------


@dataclass
class ClusterReport:
    assignments: list[int]
    centers: list[np.ndarray]
    max_intra_distance: float
    min_inter_distance: float
    threshold: float

    @property
    def count(self) -> int:
        return len(self.centers)

    def members(self) -> list[list[int]]:
        """0-based member indices of each cluster."""
        return [[i for i, c in enumerate(self.assignments) if c == k] for k in range(self.count)]

    @property
    def separated(self) -> bool:
        return self.max_intra_distance < self.threshold <= self.min_inter_distance


def detect_clusters(points, threshold: float = 1e-3) -> ClusterReport:
    """Single-linkage clustering: chains of pairwise distances below ``threshold``.

    Cluster ids follow the order in which clusters first appear.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = pts.shape[0]
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(np.triu(dist < threshold, 1))):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    ids: dict[int, int] = {}
    assignments = []
    for i in range(k):
        assignments.append(ids.setdefault(find(i), len(ids)))
    labels = np.array(assignments)
    centers = [pts[labels == c].mean(axis=0) for c in range(len(ids))]
    same = labels[:, None] == labels[None, :]
    intra = float(np.max(dist[same])) if k else 0.0
    inter = float(np.min(dist[~same])) if np.any(~same) else math.inf
    return ClusterReport(assignments, centers, intra, inter, threshold)


@dataclass(frozen=True)
class Verdict:
    status: str  # "converged" | "not_converged" | "diverged"
    t_settle: float | None = None
    final_error: float = math.nan

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"

    def __str__(self) -> str:
        if self.converged:
            return f"Converged(t_settle={self.t_settle:.4g})"
        return "Diverged" if self.diverged else "NotConverged"


GROWTH_FACTOR = 1.05


def convergence_verdict(traj: Trajectory, sys: MscSystem | None, predicted, tol: float = 1e-5) -> Verdict:
    """Compare a trajectory against a closed-form limit.

    ``predicted`` holds positions (length dn) or positions and velocities
    (length 2dn); for double runs given positions only, the predicted velocity
    is zero. Converged means the sup-norm error stays below ``tol`` from some
    sample to the end of the horizon. Diverged means the overflow guard
    tripped, or the error grows over the second half of the horizon (last
    quarter peak above the third quarter peak and second half peak above the
    first half peak).
    """
    pred = np.asarray(predicted, dtype=float).reshape(-1)
    states = traj.stacked()
    if pred.size != states.shape[1]:
        pred = np.concatenate([pred, np.zeros(states.shape[1] - pred.size)])
    err = np.max(np.abs(states - pred[None, :]), axis=1)
    final = float(err[-1]) if err.size else math.nan
    if traj.diverged or not np.all(np.isfinite(err)):
        return Verdict("diverged", None, final)
    bad = np.nonzero(~(err < tol))[0]
    if bad.size == 0:
        return Verdict("converged", float(traj.times[0]), final)
    if bad[-1] < err.size - 1:
        return Verdict("converged", float(traj.times[bad[-1] + 1]), final)
    k = err.size
    if k >= 8:
        first = float(np.max(err[: k // 2]))
        third = float(np.max(err[k // 2 : 3 * k // 4]))
        last = float(np.max(err[3 * k // 4 :]))
        if last > GROWTH_FACTOR * third and max(third, last) > first:
            return Verdict("diverged", None, final)
    return Verdict("not_converged", None, final)


def double_limit_formula(sys: MscSystem, x1_0, x2_0, alpha: float) -> np.ndarray:
    """The formal double-integrator limit, with no gain check. Used as the
    reference point of divergence verdicts at unstable gains."""
    xa = virtual_consensus_point(sys, x1_0) + virtual_consensus_point(sys, x2_0) / alpha
    return consensus_configuration(sys, xa)


def half_sup_growth(traj: Trajectory) -> tuple[float, float]:
    """Sup-norm of the full state over the first and second halves of the run."""
    s = np.max(np.abs(traj.stacked()), axis=1)
    h = traj.times[-1] / 2.0
    return float(np.max(s[traj.times <= h])), float(np.max(s[traj.times >= h]))


__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "ClusterReport",
    "Verdict",
    "integrate_single",
    "integrate_double",
    "detect_clusters",
    "convergence_verdict",
    "double_limit_formula",
    "half_sup_growth",
    "rk4_propagator",
]
