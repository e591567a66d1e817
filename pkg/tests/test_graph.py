import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covopt.exceptions import Disconnected, GraphError, IsolatedNode
from covopt.graph import Graph, format_edge_list, graph_from_mdp, parse_edge_list, read_edge_list, write_edge_list
from covopt.envs import open_grid

from oracles import random_connected_edges


@st.composite
def connected_graphs(draw, max_n=12):
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    p = draw(st.floats(0.0, 0.8))
    return n, random_connected_edges(n, np.random.default_rng(seed), p)


def test_from_edges_canonicalizes_and_dedupes():
    g = Graph.from_edges(3, [(1, 0), (0, 1), (2, 1)])
    assert g.sorted_edges() == [(0, 1), (1, 2)]
    assert g.edge_count == 2


def test_rejects_self_loops_and_out_of_range():
    with pytest.raises(GraphError):
        Graph.from_edges(3, [(1, 1), (0, 2)])
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(0, 5)])


def test_disconnected_detected():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert not g.is_connected()
    assert g.components() == [[0, 1], [2, 3]]
    with pytest.raises(Disconnected):
        g.require_connected()


@settings(max_examples=40, deadline=None)
@given(connected_graphs())
def test_bfs_matches_networkx(case):
    n, edges = case
    g = Graph.from_edges(n, edges)
    ref = nx.single_source_shortest_path_length(nx.Graph(edges), 0)
    assert g.is_connected()
    assert [int(d) for d in g.bfs_distances(0)] == [ref[u] for u in range(n)]


@settings(max_examples=30, deadline=None)
@given(connected_graphs())
def test_adjacency_symmetric_and_with_edges(case):
    n, edges = case
    g = Graph.from_edges(n, edges)
    a = g.adjacency(dense=True)
    assert np.array_equal(a, a.T)
    assert a.sum() == 2 * g.edge_count
    missing = [(u, v) for u in range(n) for v in range(u + 1, n) if not g.has_edge(u, v)]
    if missing:
        h = g.with_edges(missing[:1])
        assert h.edge_count == g.edge_count + 1
        assert g.edge_count == len(set(edges))


def test_subgraph_maps_back():
    g = Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    sub, keep = g.subgraph([4, 3])
    assert list(keep) == [3, 4]
    assert sub.sorted_edges() == [(0, 1)]


def test_edge_list_round_trip(tmp_path):
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])
    assert parse_edge_list(format_edge_list(g)) == g
    write_edge_list(g, tmp_path / "g.txt")
    assert read_edge_list(tmp_path / "g.txt") == g


def test_graph_from_grid_mdp():
    mdp = open_grid(3, 3)
    g = graph_from_mdp(mdp)
    assert g.n == 9 and g.edge_count == 12
    assert g.is_connected()
