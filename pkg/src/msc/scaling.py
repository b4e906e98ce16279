"""Per-agent scaling matrices and their block assemblies.

A scaling matrix must be positive or negative definite (it need not be
symmetric). Its sign is decided from the symmetric part, ``|S| = sign(S) S``
is then always positive definite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from msc.errors import DimensionError, Indefinite
from msc.numerics import as_matrix, invert, symmetric_part_min_max_eigs

DEFINITENESS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ScalingMatrix:
    matrix: np.ndarray
    sign: int
    margin: float

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def abs(self) -> np.ndarray:
        return self.sign * self.matrix

    @cached_property
    def inv(self) -> np.ndarray:
        return invert(self.matrix)

    @property
    def abs_inv(self) -> np.ndarray:
        return self.sign * self.inv


def classify(s, tol: float = DEFINITENESS_TOL) -> ScalingMatrix:
    """Certify the definiteness sign of ``s``.

    Raises:
        Indefinite: the symmetric part has eigenvalues of both signs, or one
            within ``tol`` of zero.
    """
    m = as_matrix(s)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"scaling matrix must be square, got {m.shape}")
    lo, hi = symmetric_part_min_max_eigs(m)
    if lo > tol:
        return ScalingMatrix(m, 1, lo)
    if hi < -tol:
        return ScalingMatrix(m, -1, -hi)
    raise Indefinite(
        f"symmetric part has eigenvalues in [{lo:.6g}, {hi:.6g}]; "
        "matrix is not definite"
    )


def rotation2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation3(axis, theta: float) -> np.ndarray:
    """Rotation by ``theta`` about a unit ``axis`` (Rodrigues' formula)."""
    k = np.asarray(axis, dtype=float)
    if k.shape != (3,):
        raise DimensionError(f"axis must be a 3-vector, got shape {k.shape}")
    if abs(float(np.linalg.norm(k)) - 1.0) > 1e-9:
        raise ValueError(f"axis must have unit norm, got {np.linalg.norm(k):.12g}")
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(theta) * kx + (1.0 - math.cos(theta)) * (kx @ kx)


class ScalingSet:
    """The scalings of all ``n`` agents; they share one dimension ``d``."""

    def __init__(self, members):
        members = tuple(m if isinstance(m, ScalingMatrix) else classify(m) for m in members)
        if not members:
            raise DimensionError("a scaling set needs at least one agent")
        d = members[0].d
        for i, m in enumerate(members, start=1):
            if m.matrix.shape != (d, d):
                raise DimensionError(
                    f"agent {i}: scaling is {m.matrix.shape[0]}x{m.matrix.shape[1]}, expected {d}x{d}"
                )
        self.members = members
        self.d = d

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> ScalingMatrix:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def signs(self) -> np.ndarray:
        return np.array([m.sign for m in self.members], dtype=float)


def _blkdiag(blocks) -> np.ndarray:
    blocks = list(blocks)
    d = blocks[0].shape[0]
    out = np.zeros((d * len(blocks), d * len(blocks)))
    for i, b in enumerate(blocks):
        out[i * d : (i + 1) * d, i * d : (i + 1) * d] = b
    return out


def block_diag(ss: ScalingSet) -> np.ndarray:
    return _blkdiag(m.matrix for m in ss)


def block_abs(ss: ScalingSet) -> np.ndarray:
    return _blkdiag(m.abs for m in ss)


def block_inv(ss: ScalingSet) -> np.ndarray:
    return _blkdiag(m.inv for m in ss)


def block_abs_inv(ss: ScalingSet) -> np.ndarray:
    return _blkdiag(m.abs_inv for m in ss)


def random_definite(d: int, rng, sign: int | None = None, margin: float = 0.2) -> np.ndarray:
    """Random (generally asymmetric) definite matrix.

    Symmetric part ``B B^T + margin I`` plus a random skew part, times a
    random or given sign. ``rng`` follows the SplitMix64 interface.
    """
    b = np.array(rng.uniform_array(-1.0, 1.0, d * d)).reshape(d, d)
    k = np.array(rng.uniform_array(-1.0, 1.0, d * d)).reshape(d, d)
    s = b @ b.T + margin * np.eye(d) + (k - k.T)
    if sign is None:
        sign = 1 if rng.random() < 0.5 else -1
    return sign * s


def scaling_groups(ss: ScalingSet, tol: float = 1e-9) -> list[int]:
    """Group index per agent; agents with (numerically) equal S_i share a group."""
    reps: list[np.ndarray] = []
    out = []
    for m in ss:
        for g, r in enumerate(reps):
            if np.max(np.abs(r - m.matrix)) <= tol:
                out.append(g)
                break
        else:
            reps.append(m.matrix)
            out.append(len(reps) - 1)
    return out
