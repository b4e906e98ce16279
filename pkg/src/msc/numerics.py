"""Dense linear algebra used by the consensus analysis.

Matrices are plain 2-D ``numpy`` float arrays. The nonsymmetric eigensolver,
the LU inverse and the Jacobi symmetric eigensolver are written here rather
than delegated to LAPACK so that every spectral claim the package makes rests
on code that is tested against independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from msc.errors import ConvergenceError, DimensionError, SingularMatrixError

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues of a real square matrix.

    ``residual_bound`` is an a-posteriori backward error estimate relative to
    the Frobenius norm of the balanced input: the largest subdiagonal entry dropped
    during deflation plus the rounding floor ``n * eps``.
    """

    eigenvalues: tuple[complex, ...]
    residual_bound: float

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def as_array(self) -> np.ndarray:
        return np.array(self.eigenvalues, dtype=complex)


def as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape[0]}x{a.shape[1]}")


# ---------------------------------------------------------------------------
# LU, inverse, determinant
# ---------------------------------------------------------------------------


def lu_factor(a) -> tuple[np.ndarray, np.ndarray, int]:
    """Partial-pivot LU. Returns (packed LU, row permutation, swap parity).

    Raises SingularMatrixError when a pivot falls below ``n * eps * max|a|``.
    """
    lu = as_matrix(a).copy()
    _require_square(lu)
    n = lu.shape[0]
    perm = np.arange(n)
    parity = 1
    scale = float(np.max(np.abs(lu))) if lu.size else 0.0
    tiny = max(n, 1) * EPS * scale
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= tiny or lu[p, k] == 0.0:
            raise SingularMatrixError(f"matrix is singular to working precision (column {k})")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            parity = -parity
        lu[k + 1 :, k] /= lu[k, k]
        lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm, parity


def lu_solve(lu: np.ndarray, perm: np.ndarray, b) -> np.ndarray:
    x = np.array(b, dtype=float)[perm]
    n = lu.shape[0]
    for k in range(n):
        x[k + 1 :] -= np.multiply.outer(lu[k + 1 :, k], x[k])
    for k in range(n - 1, -1, -1):
        x[k] /= lu[k, k]
        x[:k] -= np.multiply.outer(lu[:k, k], x[k])
    return x


def invert(a) -> np.ndarray:
    lu, perm, _ = lu_factor(a)
    return lu_solve(lu, perm, np.eye(lu.shape[0]))


def solve(a, b) -> np.ndarray:
    lu, perm, _ = lu_factor(a)
    return lu_solve(lu, perm, b)


def det(a) -> float:
    try:
        lu, _, parity = lu_factor(a)
    except SingularMatrixError:
        return 0.0
    return float(parity * np.prod(np.diag(lu)))


# ---------------------------------------------------------------------------
# Symmetric eigenvalues (cyclic Jacobi)
# ---------------------------------------------------------------------------


def symmetric_eigenvalues(a, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi)."""
    m = as_matrix(a)
    _require_square(m)
    m = 0.5 * (m + m.T)
    n = m.shape[0]
    if n == 1:
        return m[0].copy()
    peak = float(np.max(np.abs(m)))
    if peak == 0.0:
        return np.zeros(n)
    unit = math.ldexp(1.0, math.frexp(peak)[1])
    m = m / unit
    total = float(np.linalg.norm(m))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(m - np.diag(np.diag(m))))
        if off <= tol * max(total, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = m[p, :].copy()
                rq = m[q, :].copy()
                m[p, :] = c * rp - s * rq
                m[q, :] = s * rp + c * rq
                cp = m[:, p].copy()
                cq = m[:, q].copy()
                m[:, p] = c * cp - s * cq
                m[:, q] = s * cp + c * cq
                m[p, q] = m[q, p] = 0.0
    else:
        raise ConvergenceError("Jacobi iteration did not converge")
    return np.sort(np.diag(m)) * unit


def symmetric_part_min_max_eigs(s) -> tuple[float, float]:
    """Extreme eigenvalues of ``(S + S^T) / 2``.

    The quadratic form ``x^T S x`` only sees the symmetric part, so these two
    numbers decide definiteness of a possibly asymmetric ``S``.
    """
    m = as_matrix(s)
    _require_square(m)
    w = symmetric_eigenvalues(0.5 * (m + m.T))
    return float(w[0]), float(w[-1])


# ---------------------------------------------------------------------------
# Nonsymmetric eigenvalues: balance -> Hessenberg -> Francis double-shift QR
# ---------------------------------------------------------------------------


def balance(a: np.ndarray) -> np.ndarray:
    """Diagonal similarity scaling by powers of two (Parlett-Reinsch)."""
    b = a.copy()
    n = b.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = float(np.sum(np.abs(b[:, i]))) - abs(b[i, i])
            r = float(np.sum(np.abs(b[i, :]))) - abs(b[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                b[i, :] /= f
                b[:, i] *= f
    return b


def _house(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Householder vector v (v[0] = 1) and beta with (I - beta v v^T) x = ±|x| e1."""
    peak = float(np.max(np.abs(x)))
    if peak > 0.0:
        x = x / peak  # the reflector is scale invariant; this avoids underflow
    sigma = float(x[1:] @ x[1:])
    v = x.astype(float).copy()
    v[0] = 1.0
    if sigma == 0.0:
        return v, 0.0
    mu = math.sqrt(x[0] * x[0] + sigma)
    if x[0] <= 0:
        v0 = x[0] - mu
    else:
        v0 = -sigma / (x[0] + mu)
    beta = 2.0 * v0 * v0 / (sigma + v0 * v0)
    v[1:] = x[1:] / v0
    return v, beta


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg form by Householder similarity transforms."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        v, beta = _house(h[k + 1 :, k])
        if beta == 0.0:
            continue
        h[k + 1 :, k:] -= beta * np.outer(v, v @ h[k + 1 :, k:])
        h[:, k + 1 :] -= beta * np.outer(h[:, k + 1 :] @ v, v)
        h[k + 2 :, k] = 0.0
    return h


def _eig2(a: float, b: float, c: float, d: float) -> tuple[complex, complex]:
    p = 0.5 * (a - d)
    disc = p * p + b * c
    if disc >= 0.0:
        z = p + math.copysign(math.sqrt(disc), p)
        if z == 0.0:
            return complex(d), complex(d)
        return complex(d + z), complex(d - b * c / z)
    im = math.sqrt(-disc)
    return complex(d + p, im), complex(d + p, -im)


def _francis_step(h: np.ndarray, exceptional: bool) -> None:
    """One implicit double-shift QR sweep on the unreduced Hessenberg window ``h``."""
    m = h.shape[0]
    if exceptional:
        w = abs(h[m - 1, m - 2]) + abs(h[m - 2, m - 3])
        s = 1.5 * w
        t = w * w
    else:
        s = h[m - 2, m - 2] + h[m - 1, m - 1]
        t = h[m - 2, m - 2] * h[m - 1, m - 1] - h[m - 2, m - 1] * h[m - 1, m - 2]
    x = h[0, 0] * h[0, 0] + h[0, 1] * h[1, 0] - s * h[0, 0] + t
    y = h[1, 0] * (h[0, 0] + h[1, 1] - s)
    z = h[1, 0] * h[2, 1]
    for k in range(m - 2):
        v, beta = _house(np.array([x, y, z]))
        if beta != 0.0:
            q = max(0, k - 1)
            blk = h[k : k + 3, q:]
            blk -= beta * np.outer(v, v @ blk)
            r = min(k + 4, m)
            blk = h[:r, k : k + 3]
            blk -= beta * np.outer(blk @ v, v)
        if k > 0:
            h[k + 1, k - 1] = 0.0
            h[k + 2, k - 1] = 0.0
        x = h[k + 1, k]
        y = h[k + 2, k]
        if k < m - 3:
            z = h[k + 3, k]
    v, beta = _house(np.array([x, y]))
    if beta != 0.0:
        blk = h[m - 2 :, m - 3 :]
        blk -= beta * np.outer(v, v @ blk)
        blk = h[:, m - 2 :]
        blk -= beta * np.outer(blk @ v, v)
    h[m - 1, m - 3] = 0.0


def eigenvalues(a, max_sweeps_per_dim: int = 100) -> EigenResult:
    """All eigenvalues of a real square matrix, with multiplicity.

    Pipeline: balance, reduce to Hessenberg form, then Francis double-shift QR
    with deflation. Only the active diagonal window is updated since the
    Schur vectors are never needed.

    Raises:
        DimensionError: ``a`` is not square.
        ConvergenceError: more than ``max_sweeps_per_dim * n`` QR sweeps.
    """
    m = as_matrix(a)
    _require_square(m)
    n = m.shape[0]
    if n == 0:
        return EigenResult((), 0.0)
    peak = float(np.max(np.abs(m)))
    if peak == 0.0:
        return EigenResult(tuple(complex(0.0) for _ in range(n)), 0.0)
    # exact power-of-two rescale keeps shift products clear of over/underflow
    unit = math.ldexp(1.0, math.frexp(peak)[1])
    m = m / unit

    b = balance(m)
    # balancing can shrink the whole matrix; renormalise once more
    again = math.ldexp(1.0, math.frexp(float(np.max(np.abs(b))))[1])
    unit *= again
    h = hessenberg(b / again)
    hnorm = float(np.linalg.norm(h))
    budget = max_sweeps_per_dim * n
    sweeps = 0
    dropped = 0.0
    eigs: list[complex] = []
    hi = n - 1
    stalled = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(h[0, 0]))
            hi -= 1
            continue
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            ref = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if ref == 0.0:
                ref = hnorm
            # second test: a drop below eps^2 ||H|| is invisible at working
            # precision, and stops tiny blocks from stalling on underflow
            if sub <= EPS * ref or sub <= EPS * EPS * hnorm:
                dropped = max(dropped, sub)
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(complex(h[hi, hi]))
            hi -= 1
            stalled = 0
        elif lo == hi - 1:
            eigs.extend(_eig2(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi]))
            hi -= 2
            stalled = 0
        else:
            sweeps += 1
            stalled += 1
            if sweeps > budget:
                raise ConvergenceError(
                    f"QR iteration exceeded {budget} sweeps on a {n}x{n} matrix"
                )
            _francis_step(h[lo : hi + 1, lo : hi + 1], exceptional=stalled % 10 == 0)
    bound = dropped / hnorm + n * EPS
    return EigenResult(tuple(z * unit for z in eigs[::-1]), bound)


def spectral_radius(a) -> float:
    return max((abs(z) for z in eigenvalues(a).eigenvalues), default=0.0)


# ---------------------------------------------------------------------------
# Multiset matching and Hurwitz test
# ---------------------------------------------------------------------------


def match_multisets(xs, ys) -> tuple[float, list[tuple[int, int]]]:
    """Greedy minimal-distance pairing of two complex multisets of equal size.

    Repeatedly pairs the globally closest remaining (x, y). Returns the
    largest paired distance and the index pairs; ``inf`` on a size mismatch.
    """
    x = np.asarray(list(xs), dtype=complex)
    y = np.asarray(list(ys), dtype=complex)
    if x.size != y.size:
        return math.inf, []
    if x.size == 0:
        return 0.0, []
    dist = np.abs(x[:, None] - y[None, :])
    pairs = []
    worst = 0.0
    for _ in range(x.size):
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        worst = max(worst, float(dist[i, j]))
        pairs.append((int(i), int(j)))
        dist[i, :] = np.inf
        dist[:, j] = np.inf
    return worst, pairs


def hurwitz_criterion(a: float, b: float, c: float, d: float) -> float:
    return a * b * d + a * a * c - d * d


def hurwitz_complex_quadratic(a: float, b: float, c: float, d: float) -> bool:
    """Is ``s^2 + (a + bj) s + (c + dj)`` Hurwitz?

    Both roots lie in the open left half-plane iff ``a > 0`` and
    ``a*b*d + a^2*c - d^2 > 0``. The root sum is ``-(a + bj)``, so ``a > 0``
    cannot be dropped: ``s^2 - s + 1`` has a positive criterion but unstable
    roots.
    """
    return a > 0.0 and hurwitz_criterion(a, b, c, d) > 0.0
