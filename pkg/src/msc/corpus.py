"""Seeded random consensus systems for property checks.

Each system draws from its own child stream of the master SplitMix64, so the
first ``k`` systems are identical whatever the corpus size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from msc.graph import NetworkGraph, random_connected_graph
from msc.protocol import MscSystem, assemble
from msc.rng import SplitMix64
from msc.scaling import classify, random_definite, rotation2, rotation3


@dataclass
class CorpusCase:
    index: int
    graph: NetworkGraph
    system: MscSystem
    x0: np.ndarray
    v0: np.ndarray


def _random_rotation(d: int, rng: SplitMix64, sign: int) -> np.ndarray:
    # |cos(theta)| >= cos(1.3) ~ 0.27 keeps the symmetric part definite
    theta = rng.uniform(-1.3, 1.3)
    if d == 2:
        r = rotation2(theta)
    else:
        axis = np.array(rng.uniform_array(-1.0, 1.0, 3))
        while np.linalg.norm(axis) < 1e-3:
            axis = np.array(rng.uniform_array(-1.0, 1.0, 3))
        r = rotation3(axis / np.linalg.norm(axis), abs(theta))
    return sign * r


def random_scalings(n: int, d: int, rng: SplitMix64) -> list:
    signs = [1 if rng.random() < 0.5 else -1 for _ in range(n)]
    if n >= 2 and len(set(signs)) == 1:
        signs[1] = -signs[0]
    out = []
    for s in signs:
        if rng.random() < 0.3:
            m = _random_rotation(d, rng, s)
        else:
            m = random_definite(d, rng, sign=s)
        out.append(classify(m))
    return out


def random_case(index: int, rng: SplitMix64) -> CorpusCase:
    n = rng.randint(2, 6)
    d = rng.randint(2, 3)
    g = random_connected_graph(n, 0.5, rng)
    system = assemble(g, random_scalings(n, d, rng), d)
    x0 = np.array(rng.uniform_array(-1.0, 1.0, n * d))
    v0 = np.array(rng.uniform_array(-1.0, 1.0, n * d))
    return CorpusCase(index, g, system, x0, v0)


def corpus(seed: int, count: int):
    master = SplitMix64(seed)
    for k in range(count):
        yield random_case(k, master.spawn())


def settle_horizon(min_real: float, lo: float = 40.0, hi: float = 400.0) -> float:
    """Horizon long enough for the slowest mode to decay by about e^-30."""
    if not min_real > 0:
        return hi
    return float(min(hi, max(lo, math.ceil(30.0 / min_real))))
