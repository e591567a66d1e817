import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covopt.envs import four_room, load_grid, open_grid
from covopt.exceptions import CompleteGraph, Disconnected, MultiplicityAboveOne, Unreachable
from covopt.graph import Graph, graph_from_mdp
from covopt.options import (LOG_COLUMNS, OptionSet, PointOption, betweenness_centrality,
                            betweenness_options, covering_options, discover, eigenoptions_point,
                            option_policy, theorem2_increment, widen_initiation)
from covopt.spectral import algebraic_connectivity

from oracles import bfs_distance, random_connected_edges

P3 = Graph.from_edges(3, [(0, 1), (1, 2)])
K3 = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def test_theorem2_increment_values():
    assert theorem2_increment(1.0, 2.0, 1 / math.sqrt(2), -1 / math.sqrt(2)) == pytest.approx(2 / 7.5)
    assert theorem2_increment(1.0, 2.0, 0.3, 0.3) == 0.0
    with pytest.raises(MultiplicityAboveOne):
        theorem2_increment(1.0, 1.0, 0.5, -0.5)


@pytest.mark.parametrize("kind", ["normalized", "combinatorial"])
def test_p3_endpoints(kind):
    cov = covering_options(P3, 2, laplacian=kind)
    assert {(o.initiation, o.termination) for o in cov} == {(0, 2), (2, 0)}
    eig = eigenoptions_point(P3, 2, laplacian=kind)
    assert [(o.initiation, o.termination) for o in eig] == [(o.initiation, o.termination) for o in cov]


def test_k3_complete():
    with pytest.raises(CompleteGraph):
        covering_options(K3, 2)


def test_disconnected():
    with pytest.raises(Disconnected):
        covering_options(Graph.from_edges(4, [(0, 1), (2, 3)]), 2)


def test_zero_options_gives_baseline_only():
    opts = covering_options(P3, 0)
    assert len(opts) == 0
    assert len(opts.discovery_log) == 1
    assert opts.discovery_log[0]["iteration"] == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 14), st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 4, 6]))
def test_covering_structure(n, seed, k):
    edges = random_connected_edges(n, np.random.default_rng(seed), 0.2)
    g = Graph.from_edges(n, edges)
    if g.edge_count + k // 2 > n * (n - 1) // 2:
        return
    opts = covering_options(g, k, laplacian="combinatorial")
    assert len(opts) == k
    for a, b in zip(opts.options[::2], opts.options[1::2]):
        assert (a.initiation, a.termination) == (b.termination, b.initiation)
        assert not g.has_edge(a.initiation, a.termination)
    aug = opts.augmented_graph
    assert aug.edge_count == g.edge_count + k // 2
    lams = [row["lambda2_after"] for row in opts.discovery_log]
    assert all(b >= a - 1e-9 for a, b in zip(lams, lams[1:]))
    assert opts.final_lambda2 == pytest.approx(algebraic_connectivity(aug, "combinatorial"), abs=1e-7)
    for row in opts.discovery_log[1:]:
        assert set(LOG_COLUMNS) - {"component"} <= set(row)


def test_grid_options_values():
    g = graph_from_mdp(load_grid("grid9x9"))
    assert covering_options(g, 8, laplacian="combinatorial").final_lambda2 == pytest.approx(0.2412, abs=1e-3)
    assert eigenoptions_point(g, 8, laplacian="combinatorial").final_lambda2 == pytest.approx(0.1938, abs=1e-3)


def test_policies_follow_shortest_paths():
    mdp = four_room()
    g = graph_from_mdp(mdp)
    adj = {u: list(map(int, g.neighbors(u))) for u in range(g.n)}
    opts = covering_options(g, 4, mdp)
    for o in opts:
        assert o.length == bfs_distance(adj, o.initiation, o.termination)
        s = o.initiation
        for _ in range(o.length):
            s = int(mdp.dynamics(s, o.action(s))[0][0])
        assert s == o.termination


def test_option_policy_manhattan():
    mdp = load_grid("grid9x9")
    policy, length, path = option_policy(mdp, mdp.index((0, 0)), mdp.index((0, 3)))
    assert length == 3
    assert {mdp.action_names[a] for a in policy.values()} == {"right"}
    assert len(path) == 4


def test_option_policy_four_room_corners():
    mdp = four_room()
    g = graph_from_mdp(mdp)
    adj = {u: list(map(int, g.neighbors(u))) for u in range(g.n)}
    s, t = mdp.index((1, 1)), mdp.index((11, 11))
    assert option_policy(mdp, s, t)[1] == bfs_distance(adj, s, t)


def test_option_policy_respects_allowed_states():
    from covopt.envs.random_ssp import ssp_from_graph
    ssp = ssp_from_graph(Graph.from_edges(3, [(0, 1), (1, 2)]), 0, 2)
    assert option_policy(ssp, 0, 2)[1] == 2
    with pytest.raises(Unreachable):
        option_policy(ssp, 0, 2, allowed={0, 2})


def test_point_option_rejects_self_loop():
    with pytest.raises(ValueError):
        PointOption(3, 3)


def test_widen_initiation_line():
    mdp = open_grid(1, 3)
    wide = widen_initiation(OptionSet([PointOption(0, 2)]), mdp)
    o = wide[0]
    assert set(o.policy) == {0, 1}
    assert {mdp.action_names[a] for a in o.policy.values()} == {"right"}
    assert wide.method.endswith("+full")


def test_widen_initiation_grid_eccentricity():
    mdp = load_grid("grid9x9")
    t = mdp.index((8, 8))
    wide = widen_initiation(OptionSet([PointOption(mdp.index((0, 0)), t)]), mdp)
    o = wide[0]
    assert len(o.initiation_states) == 80 and t not in o.initiation_states
    g = graph_from_mdp(mdp)
    ecc = int(g.bfs_distances(t).max())
    longest = 0
    for s in o.initiation_states:
        steps = 0
        while s != t:
            s = int(mdp.dynamics(s, o.action(s))[0][0])
            steps += 1
        longest = max(longest, steps)
    assert longest == ecc == 16


@pytest.mark.parametrize("seed", range(5))
def test_betweenness_matches_networkx(seed):
    rng = np.random.default_rng(seed)
    edges = random_connected_edges(12, rng, 0.2)
    ours = betweenness_centrality(Graph.from_edges(12, edges))
    ref = nx.betweenness_centrality(nx.Graph(edges), normalized=False)
    assert np.allclose(ours, [ref[u] for u in range(12)])


def test_betweenness_small_graphs():
    assert [o.termination for o in betweenness_options(P3, 4)] == [1]
    star = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
    assert [o.termination for o in betweenness_options(star, 4)] == [0]


def test_betweenness_four_room_subgoals_next_to_doorways():
    mdp = four_room()
    lay = mdp.layout
    doors = {(r, c) for r, c in lay.cells(".SG")
             if sum(lay.is_open(r + dr, c + dc) for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0))) == 2
             and (lay.is_open(r - 1, c) and lay.is_open(r + 1, c) and not lay.is_open(r, c - 1)
                  or lay.is_open(r, c - 1) and lay.is_open(r, c + 1) and not lay.is_open(r - 1, c))
             and ((not lay.is_open(r, c - 1) and not lay.is_open(r, c + 1))
                  or (not lay.is_open(r - 1, c) and not lay.is_open(r + 1, c)))}
    doors = {d for d in doors if 1 < d[0] < lay.height - 2 and 1 < d[1] < lay.width - 2}
    assert len(doors) == 4
    opts = betweenness_options(graph_from_mdp(mdp), 4, mdp)
    for o in opts:
        r, c = mdp.label(o.termination)
        assert any(abs(r - dr) + abs(c - dc) == 1 for dr, dc in doors)


def test_serialization_round_trip(tmp_path):
    mdp = four_room()
    opts = covering_options(graph_from_mdp(mdp), 4, mdp)
    back = OptionSet.from_text(opts.to_text())
    assert back.options == opts.options
    assert [o.policy for o in back] == [o.policy for o in opts]
    assert back.discovery_log == opts.discovery_log
    opts.save(tmp_path / "o.txt")
    assert OptionSet.load(tmp_path / "o.txt").to_text() == opts.to_text()


def test_discover_dispatch():
    assert len(discover("none", P3, 0)) == 0
    with pytest.raises(ValueError):
        discover("bogus", P3, 2)
    with pytest.raises(ValueError):
        covering_options(P3, 3)
