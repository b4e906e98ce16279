"""Undirected interaction graphs: incidence matrix, Laplacian, connectivity."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from msc.errors import GraphError
from msc.numerics import symmetric_eigenvalues


@dataclass(frozen=True)
class NetworkGraph:
    """Simple undirected graph on vertices ``1..n``.

    Edges are stored as ``(i, j)`` with ``i < j``; the lower-index vertex is the
    start of the oriented edge. Input pairs in either order are normalized.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, n: int, edges=()):
        if int(n) != n or n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {n!r}")
        seen = set()
        norm = []
        for e in edges:
            try:
                i, j = (int(v) for v in e)
            except (TypeError, ValueError):
                raise GraphError(f"edge {e!r} is not a pair of vertex indices") from None
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphError(f"edge ({i}, {j}) references a vertex outside 1..{n}")
            i, j = min(i, j), max(i, j)
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            norm.append((i, j))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, i: int) -> list[int]:
        """Neighbors of vertex ``i`` (1-indexed), ascending."""
        out = [b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i]
        return sorted(out)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i - 1] += 1
            deg[j - 1] += 1
        return deg


def incidence_matrix(g: NetworkGraph) -> np.ndarray:
    h = np.zeros((g.m, g.n))
    for k, (i, j) in enumerate(g.edges):
        h[k, i - 1] = -1.0
        h[k, j - 1] = 1.0
    return h


def laplacian(g: NetworkGraph) -> np.ndarray:
    lap = np.diag(g.degrees().astype(float))
    for i, j in g.edges:
        lap[i - 1, j - 1] = lap[j - 1, i - 1] = -1.0
    return lap


def is_connected(g: NetworkGraph) -> bool:
    """Breadth-first search from vertex 1."""
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for i, j in g.edges:
        adj[i - 1].append(j - 1)
        adj[j - 1].append(i - 1)
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                queue.append(w)
    return all(seen)


def algebraic_connectivity(g: NetworkGraph) -> float:
    """Second-smallest Laplacian eigenvalue (0 for a single vertex)."""
    if g.n == 1:
        return 0.0
    return float(symmetric_eigenvalues(laplacian(g))[1])


SUBSTITUTE_CHORDS = ((1, 9), (4, 12), (2, 7), (10, 15))


def substitute_graph() -> NetworkGraph:
    """Fixed 16-vertex test graph: the cycle 1-2-...-16-1 plus four chords.

    Chords are (1,9), (4,12), (2,7), (10,15); m = 20. Used as the interaction
    graph of every shipped 16-agent scenario.
    """
    ring = [(i, i + 1) for i in range(1, 16)] + [(1, 16)]
    return NetworkGraph(16, ring + list(SUBSTITUTE_CHORDS))


def path_graph(n: int) -> NetworkGraph:
    return NetworkGraph(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> NetworkGraph:
    edges = [(i, i + 1) for i in range(1, n)]
    if n > 2:
        edges.append((1, n))
    return NetworkGraph(n, edges)


def complete_graph(n: int) -> NetworkGraph:
    return NetworkGraph(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def erdos_renyi(n: int, p: float, rng) -> NetworkGraph:
    """G(n, p) sample; ``rng`` needs a ``random() -> float in [0, 1)`` method."""
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < p]
    return NetworkGraph(n, edges)


def random_connected_graph(n: int, p: float, rng, max_tries: int = 1000) -> NetworkGraph:
    """Resample G(n, p) until connected."""
    for _ in range(max_tries):
        g = erdos_renyi(n, p, rng)
        if is_connected(g):
            return g
    raise GraphError(f"no connected G({n}, {p}) sample in {max_tries} tries")
