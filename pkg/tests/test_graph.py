import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msc.errors import GraphError
from msc.graph import (
    NetworkGraph,
    algebraic_connectivity,
    complete_graph,
    cycle_graph,
    erdos_renyi,
    incidence_matrix,
    is_connected,
    laplacian,
    path_graph,
    random_connected_graph,
    substitute_graph,
)
from msc.rng import SplitMix64


def test_edges_normalized_low_to_high():
    g = NetworkGraph(3, [(2, 1), (3, 2)])
    assert g.edges == ((1, 2), (2, 3))
    assert g.neighbors(2) == [1, 3]


@pytest.mark.parametrize(
    "n, edges, match",
    [
        (3, [(1, 1)], "self-loop"),
        (3, [(1, 2), (2, 1)], "duplicate"),
        (3, [(1, 4)], "outside"),
        (0, [], "positive"),
        (3, [(1,)], "pair"),
    ],
)
def test_invalid_graphs(n, edges, match):
    with pytest.raises(GraphError, match=match):
        NetworkGraph(n, edges)


def test_incidence_orientation():
    h = incidence_matrix(path_graph(3))
    assert np.array_equal(h, [[-1, 1, 0], [0, -1, 1]])


def test_laplacian_is_incidence_gram():
    g = substitute_graph()
    h = incidence_matrix(g)
    assert np.array_equal(laplacian(g), h.T @ h)


def test_substitute_graph_shape():
    g = substitute_graph()
    assert (g.n, g.m) == (16, 20)
    assert is_connected(g)
    assert sorted(g.degrees()) == [2] * 8 + [3] * 8


def test_connectivity():
    assert is_connected(path_graph(5))
    assert not is_connected(NetworkGraph(4, [(1, 2), (3, 4)]))
    assert is_connected(NetworkGraph(1))


@pytest.mark.parametrize("n", [3, 5, 8])
def test_cycle_algebraic_connectivity(n):
    # closed form 2 - 2 cos(2 pi / n)
    assert algebraic_connectivity(cycle_graph(n)) == pytest.approx(2 - 2 * np.cos(2 * np.pi / n))


def test_complete_graph_spectrum():
    lap = laplacian(complete_graph(5))
    assert np.allclose(np.linalg.eigvalsh(lap), [0, 5, 5, 5, 5])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.floats(0.1, 0.9), st.integers(0, 2**32))
def test_laplacian_properties(n, p, seed):
    g = erdos_renyi(n, p, SplitMix64(seed))
    lap = laplacian(g)
    assert np.allclose(lap, lap.T)
    assert np.allclose(lap @ np.ones(n), 0.0)
    eig = np.linalg.eigvalsh(lap)
    assert eig[0] > -1e-12
    # connected iff the zero eigenvalue is simple
    assert is_connected(g) == (eig[1] > 1e-9)


def test_random_connected_graph():
    rng = SplitMix64(3)
    for _ in range(20):
        assert is_connected(random_connected_graph(6, 0.3, rng))


def test_random_connected_graph_gives_up():
    with pytest.raises(GraphError):
        random_connected_graph(5, 0.0, SplitMix64(1), max_tries=5)
