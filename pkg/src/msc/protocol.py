"""Matrix-scaled consensus dynamics and their closed-form predictions.

Agent ``i`` holds ``x_i`` in R^d and a definite scaling ``S_i``. The
single-integrator law is

    u_i = sign(S_i) * sum_{j in N_i} (S_j x_j - S_i x_i)

and the double-integrator law adds velocity damping ``-alpha * v_i``. In the
scaled coordinates ``x_c = S x`` the network evolves as ``dx_c/dt = -Theta x_c``
with ``Theta = |S| (L kron I_d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from msc.errors import (
    ConsistencyError,
    DimensionError,
    DisconnectedGraph,
    LemmaViolation,
    UnstableGain,
)
from msc.graph import NetworkGraph, incidence_matrix, is_connected, laplacian
from msc.numerics import eigenvalues, invert, match_multisets
from msc.scaling import (
    ScalingSet,
    block_abs,
    block_abs_inv,
    block_diag,
    block_inv,
)

ZERO_EIG_REL = 1e-8
MATCH_REL = 1e-7
RHS_ABORT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MscSystem:
    graph: NetworkGraph
    scalings: ScalingSet
    d: int
    laplacian: np.ndarray
    lbar: np.ndarray
    hbar: np.ndarray
    s_block: np.ndarray
    abs_block: np.ndarray
    inv_block: np.ndarray
    abs_inv_block: np.ndarray
    theta: np.ndarray
    p: np.ndarray
    system_matrix: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dim(self) -> int:
        return self.d * self.graph.n

    @property
    def signs(self) -> np.ndarray:
        return self.scalings.signs

    def double_matrix(self, alpha: float) -> np.ndarray:
        """Closed-loop matrix of the stacked state ``(x1, x2)``."""
        k = self.dim
        out = np.zeros((2 * k, 2 * k))
        out[:k, k:] = np.eye(k)
        out[k:, :k] = self.system_matrix
        out[k:, k:] = -alpha * np.eye(k)
        return out


def assemble(graph: NetworkGraph, scalings, d: int | None = None) -> MscSystem:
    """Build every matrix the analysis needs.

    Raises:
        DisconnectedGraph: the interaction graph is not connected.
        DimensionError: scaling count differs from ``graph.n`` or the scaling
            dimension differs from ``d``.
    """
    if not isinstance(scalings, ScalingSet):
        scalings = ScalingSet(scalings)
    if d is None:
        d = scalings.d
    if scalings.d != d:
        raise DimensionError(f"scalings are {scalings.d}x{scalings.d} but d = {d}")
    if scalings.n != graph.n:
        raise DimensionError(f"{scalings.n} scalings for {graph.n} agents")
    if not is_connected(graph):
        raise DisconnectedGraph("interaction graph is not connected")

    eye = np.eye(d)
    lap = laplacian(graph)
    lbar = np.kron(lap, eye)
    hbar = np.kron(incidence_matrix(graph), eye)
    s_block = block_diag(scalings)
    abs_block = block_abs(scalings)
    inv_block = block_inv(scalings)
    abs_inv_block = block_abs_inv(scalings)
    theta = abs_block @ lbar
    p = invert(sum(m.abs_inv for m in scalings))
    system_matrix = -np.kron(np.diag(scalings.signs), eye) @ lbar @ s_block

    scale = max(1.0, float(np.linalg.norm(theta)))
    ones = np.kron(np.ones((graph.n, 1)), eye)
    if np.max(np.abs(theta @ ones)) > 1e-10 * scale:
        raise ConsistencyError("Theta does not annihilate the consensus subspace")
    if np.max(np.abs(inv_block @ s_block - np.eye(d * graph.n))) > 1e-9:
        raise ConsistencyError("block inverse of S is inaccurate")

    return MscSystem(
        graph=graph,
        scalings=scalings,
        d=d,
        laplacian=lap,
        lbar=lbar,
        hbar=hbar,
        s_block=s_block,
        abs_block=abs_block,
        inv_block=inv_block,
        abs_inv_block=abs_inv_block,
        theta=theta,
        p=p,
        system_matrix=system_matrix,
    )


def _vec(sys: MscSystem, x, name: str = "x") -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size != sys.dim:
        raise DimensionError(f"{name} has length {v.size}, expected {sys.dim}")
    return v


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------


def single_rhs_matrix(sys: MscSystem, x) -> np.ndarray:
    return sys.system_matrix @ _vec(sys, x)


def single_rhs_local(sys: MscSystem, x) -> np.ndarray:
    """Evaluate the consensus law agent by agent from neighbor messages."""
    xs = _vec(sys, x).reshape(sys.n, sys.d)
    scaled = [m.matrix @ xs[i] for i, m in enumerate(sys.scalings)]
    u = np.zeros_like(xs)
    for i, m in enumerate(sys.scalings):
        acc = np.zeros(sys.d)
        for j in sys.graph.neighbors(i + 1):
            acc += scaled[j - 1] - scaled[i]
        u[i] = m.sign * acc
    return u.reshape(-1)


def check_rhs_agreement(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    gap = float(np.max(np.abs(a - b))) if a.size else 0.0
    if not gap <= RHS_ABORT_TOL * scale:
        raise ConsistencyError(f"agent-local and matrix-form dynamics differ by {gap:.3e}")


def single_rhs(sys: MscSystem, x) -> np.ndarray:
    """Single-integrator velocity field, evaluated both ways and cross-checked."""
    x = _vec(sys, x)
    mat = single_rhs_matrix(sys, x)
    check_rhs_agreement(mat, single_rhs_local(sys, x), x)
    return mat


def double_rhs(sys: MscSystem, x1, x2, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    if not alpha > 0:
        raise ValueError(f"damping gain must be positive, got {alpha}")
    x2 = _vec(sys, x2, "x2")
    return x2.copy(), single_rhs(sys, x1) - alpha * x2


# ---------------------------------------------------------------------------
# Closed-form predictions
# ---------------------------------------------------------------------------


def virtual_consensus_point(sys: MscSystem, x) -> np.ndarray:
    """``(sum_i |S_i^-1|)^-1 sum_i sign(S_i) x_i``; invariant along single-integrator runs."""
    xs = _vec(sys, x).reshape(sys.n, sys.d)
    return sys.p @ (sys.signs @ xs)


def consensus_configuration(sys: MscSystem, xa) -> np.ndarray:
    """The point of the consensus set with virtual point ``xa``: ``vec(S_i^-1 xa)``."""
    xa = np.asarray(xa, dtype=float)
    return np.concatenate([m.inv @ xa for m in sys.scalings])


def predicted_limit_single(sys: MscSystem, x0) -> np.ndarray:
    return consensus_configuration(sys, virtual_consensus_point(sys, x0))


def predicted_limit_double(
    sys: MscSystem, x1_0, x2_0, alpha: float, report: "SpectralReport | None" = None
) -> tuple[np.ndarray, np.ndarray]:
    """Limit of the damped double-integrator network.

    Scaled positions settle at ``xa(x1_0) + xa(x2_0) / alpha`` and velocities
    vanish.

    Raises:
        UnstableGain: ``alpha`` does not exceed the exact critical gain, so
            the limit is never reached.
    """
    if report is None:
        report = spectral_report(sys)
    if not alpha > 0 or alpha <= report.alpha_critical_exact:
        raise UnstableGain(
            f"alpha = {alpha:.6g} does not exceed the critical gain "
            f"{report.alpha_critical_exact:.6g}"
        )
    xa = virtual_consensus_point(sys, x1_0) + virtual_consensus_point(sys, x2_0) / alpha
    return consensus_configuration(sys, xa), np.zeros(sys.dim)


# ---------------------------------------------------------------------------
# Spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: tuple[complex, ...]
    zero_count: int
    positive_real_count: int
    alpha_critical_exact: float
    alpha_critical_conservative: float
    zero_threshold: float
    residual_bound: float

    def nonzero(self) -> list[complex]:
        return [z for z in self.eigenvalues if abs(z) >= self.zero_threshold]

    @property
    def min_nonzero_real(self) -> float:
        return min((z.real for z in self.nonzero()), default=math.inf)


def zero_threshold(matrix: np.ndarray) -> float:
    return ZERO_EIG_REL * max(1.0, float(np.linalg.norm(matrix)))


def critical_gains(nonzero, tol: float) -> tuple[float, float]:
    """(exact, conservative) damping thresholds from the nonzero eigenvalues.

    ``s^2 + alpha s + (a + jb)`` is Hurwitz iff ``a > b^2 / alpha^2``. The exact
    gain is the largest ``|b| / sqrt(a)``; the conservative one pairs the
    largest ``|b|`` with the smallest ``a``. Imaginary parts within ``tol`` of
    zero count as real.
    """
    nonzero = list(nonzero)
    if not nonzero:
        return 0.0, 0.0
    ims = [abs(z.imag) if abs(z.imag) > tol else 0.0 for z in nonzero]
    res = [z.real for z in nonzero]
    if max(ims) == 0.0:
        return 0.0, 0.0
    exact = max(b / math.sqrt(a) for a, b in zip(res, ims))
    conservative = max(ims) / math.sqrt(min(res))
    return exact, conservative


def spectral_report(sys: MscSystem, strict: bool = True) -> SpectralReport:
    """Classify the eigenvalues of Theta and derive the critical damping gains.

    With ``strict`` the expected structure (exactly ``d`` zero eigenvalues,
    all others in the open right half-plane) is enforced by LemmaViolation.
    """
    res = eigenvalues(sys.theta)
    thr = zero_threshold(sys.theta)
    mus = res.eigenvalues
    zero = [z for z in mus if abs(z) < thr]
    nonzero = [z for z in mus if abs(z) >= thr]
    positive = [z for z in nonzero if z.real > thr]
    if strict:
        if len(zero) != sys.d:
            raise LemmaViolation(f"Theta has {len(zero)} zero eigenvalues, expected {sys.d}")
        if len(positive) != len(nonzero):
            worst = min(z.real for z in nonzero)
            raise LemmaViolation(
                f"Theta has a nonzero eigenvalue with real part {worst:.6g} <= {thr:.3g}"
            )
    if len(positive) == len(nonzero) and nonzero:
        exact, conservative = critical_gains(nonzero, thr)
    elif nonzero:
        exact = conservative = math.inf
    else:
        exact = conservative = 0.0
    return SpectralReport(
        eigenvalues=tuple(sorted(mus, key=lambda z: (round(z.real, 12), z.imag))),
        zero_count=len(zero),
        positive_real_count=len(positive),
        alpha_critical_exact=exact,
        alpha_critical_conservative=conservative,
        zero_threshold=thr,
        residual_bound=res.residual_bound,
    )


def edge_form_matrix(sys: MscSystem) -> np.ndarray:
    """``N = Hbar |S| Hbar^T`` (dm x dm); shares its nonzero spectrum with Theta."""
    return sys.hbar @ sys.abs_block @ sys.hbar.T


@dataclass(frozen=True)
class SpectrumMatch:
    matched: bool
    max_distance: float
    tolerance: float
    theta_nonzero: int
    edge_nonzero: int


def compare_nonzero_spectra(sys: MscSystem) -> SpectrumMatch:
    """Pair the nonzero eigenvalues of Theta and of the edge-form matrix."""
    theta_eigs = eigenvalues(sys.theta).eigenvalues
    edge = edge_form_matrix(sys)
    edge_eigs = eigenvalues(edge).eigenvalues if edge.size else ()
    thr = zero_threshold(sys.theta)
    tol = MATCH_REL * max(1.0, float(np.linalg.norm(sys.theta)))
    a = [z for z in theta_eigs if abs(z) >= thr]
    b = [z for z in edge_eigs if abs(z) >= thr]
    worst, _ = match_multisets(a, b)
    return SpectrumMatch(worst <= tol, worst, tol, len(a), len(b))


# ---------------------------------------------------------------------------
# Monitors
# ---------------------------------------------------------------------------


def scaled_disagreement(sys: MscSystem, x) -> float:
    """Largest ``||S_i x_i - S_j x_j||`` over the edges; zero exactly on consensus."""
    xc = (sys.s_block @ _vec(sys, x)).reshape(sys.n, sys.d)
    if not sys.graph.edges:
        return 0.0
    idx = np.array(sys.graph.edges) - 1
    diffs = xc[idx[:, 0]] - xc[idx[:, 1]]
    return float(np.max(np.linalg.norm(diffs, axis=1)))


def lyapunov_value(sys: MscSystem, x) -> float:
    """``V = x_c^T Lbar x_c`` with ``x_c = S x``."""
    xc = sys.s_block @ _vec(sys, x)
    return float(xc @ sys.lbar @ xc)
