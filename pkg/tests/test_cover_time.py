import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covopt.cover_time import (RandomWalk, correlation_study, cover_time_upper_bound,
                               estimate_cover_time, exact_hitting_times, random_connected_graph,
                               random_policy_cost, sample_cover_time, summarize_study,
                               value_bound_check)
from covopt.envs import load_grid, open_grid, random_ssp, ssp_from_graph
from covopt.exceptions import DensityTooLow, Disconnected, NonPositiveConnectivity
from covopt.graph import Graph
from covopt.options import PointOption

from oracles import exact_cover_times, exact_hitting_matrix, random_connected_edges, transition_matrix

K3 = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
P3 = Graph.from_edges(3, [(0, 1), (1, 2)])
C4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


def test_oracle_closed_forms():
    # K3: one step to a second node, then geometric with p = 1/2
    assert np.allclose(exact_cover_times(transition_matrix(3, K3.sorted_edges())), 3.0)
    # P3 from the middle: 1 step to an end, then hitting the far end from it takes 4
    assert exact_cover_times(transition_matrix(3, P3.sorted_edges()))[1] == pytest.approx(5.0)
    assert exact_cover_times(transition_matrix(3, P3.sorted_edges()))[0] == pytest.approx(4.0)


@pytest.mark.parametrize("g", [K3, P3, C4], ids=["K3", "P3", "C4"])
def test_estimate_matches_exact(g):
    exact = exact_cover_times(transition_matrix(g.n, g.sorted_edges()))
    est = estimate_cover_time(g, 20_000, seed=7)
    assert abs(est.per_start_mean - exact).max() <= 4 * est.per_start_stderr.max()
    assert est.max_over_starts == pytest.approx(est.per_start_mean.max())


def test_k3_value():
    est = estimate_cover_time(K3, 20_000, seed=1)
    assert est.max_over_starts == pytest.approx(3.0, abs=0.05)


def test_hitting_estimates_match_linear_solve():
    rng = np.random.default_rng(5)
    edges = random_connected_edges(7, rng, 0.3)
    g = Graph.from_edges(7, edges)
    h = exact_hitting_matrix(transition_matrix(7, edges))
    assert np.allclose(exact_hitting_times(g), h)
    est = estimate_cover_time(g, 20_000, seed=3)
    err = np.abs(est.mean_hitting - h)
    assert np.all(err <= 5 * est.hitting_stderr + 1e-12)


def test_deterministic_given_seed():
    g = random_connected_graph(8, 0.4, 0)
    a = estimate_cover_time(g, 500, seed=11)
    b = estimate_cover_time(g, 500, seed=11)
    c = estimate_cover_time(g, 500, seed=12)
    assert np.array_equal(a.per_start_mean, b.per_start_mean)
    assert np.array_equal(a.mean_hitting, b.mean_hitting)
    assert not np.array_equal(a.per_start_mean, c.per_start_mean)


def test_single_walk_sampler():
    steps = [sample_cover_time(C4, 0, rng=i) for i in range(2000)]
    exact = exact_cover_times(transition_matrix(4, C4.sorted_edges()))[0]
    assert np.mean(steps) == pytest.approx(exact, abs=4 * np.std(steps) / math.sqrt(2000))
    assert min(steps) >= 3


def test_disconnected_rejected():
    with pytest.raises(Disconnected):
        estimate_cover_time(Graph.from_edges(4, [(0, 1), (2, 3)]), 10)


def test_upper_bound():
    assert cover_time_upper_bound(0.5, 10) == pytest.approx(100 * math.log(10) / 0.5)
    with pytest.raises(NonPositiveConnectivity):
        cover_time_upper_bound(0.0, 10)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 15), st.floats(0.05, 1.0), st.integers(0, 10 ** 6))
def test_random_connected_graph(n, density, seed):
    target = math.ceil(density * n * (n - 1) / 2 - 1e-12)
    if target < n - 1:
        with pytest.raises(DensityTooLow):
            random_connected_graph(n, density, seed)
        return
    g = random_connected_graph(n, density, seed)
    assert g.is_connected()
    assert g.edge_count == target


def test_random_graph_edge_count_example():
    g = random_connected_graph(10, 0.3, np.random.default_rng(0))
    assert g.edge_count == 14


def test_mdp_walk_includes_wall_bumps_and_options():
    mdp = open_grid(3, 3)
    walk = RandomWalk.from_mdp(mdp)
    p = walk.transition_matrix()
    assert np.allclose(p.sum(axis=1), 1.0)
    corner = mdp.index((0, 0))
    assert p[corner, corner] == pytest.approx(0.5)
    far = mdp.index((2, 2))
    walk2 = RandomWalk.from_mdp(mdp, [PointOption(corner, far)])
    assert walk2.transition_matrix()[corner, far] == pytest.approx(0.2)


def test_options_shorten_grid_cover_time():
    mdp = load_grid("grid9x9")
    a = estimate_cover_time(RandomWalk.from_mdp(mdp), 300, seed=0)
    corner, far = mdp.index((0, 0)), mdp.index((8, 8))
    b = estimate_cover_time(RandomWalk.from_mdp(mdp, [PointOption(corner, far), PointOption(far, corner)]),
                            300, seed=0)
    assert b.hitting_cover_time < a.hitting_cover_time


def test_random_policy_cost_matches_hitting_time():
    g = random_connected_graph(8, 0.35, 2)
    mdp = ssp_from_graph(g, 0, 5)
    mean, se = random_policy_cost(mdp, 0, 5, 20_000, seed=4)
    h = exact_hitting_matrix(transition_matrix(8, g.sorted_edges()))[0, 5]
    assert abs(mean - h) <= 4 * se


def test_value_bound_holds_on_random_ssps():
    for seed in range(5):
        mdp = random_ssp(10, 0.3, seed)
        check = value_bound_check(mdp, mdp.goal, trajectories=500, seed=seed)
        assert check.satisfied
        assert check.values[mdp.goal] == 0.0


def test_correlation_study_small():
    rows, summary = correlation_study(num_graphs=5, n=8, density=0.4, trajectories=100, seed=3)
    assert len(rows) == 5 and summary["low_power"]
    again, _ = correlation_study(num_graphs=5, n=8, density=0.4, trajectories=100, seed=3)
    assert rows == again
    assert summarize_study(rows[:1])["lambda2_combinatorial~cover_time"] is None
