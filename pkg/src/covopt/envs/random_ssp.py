"""Random shortest-path problems on random connected graphs."""

from __future__ import annotations

import numpy as np

from ..cover_time import random_connected_graph
from ..graph import Graph
from .mdp import TabularMDP


def ssp_from_graph(g: Graph, start: int, goal: int, step_cost: float = 1.0) -> TabularMDP:
    """Walk a graph edge by edge at a fixed cost until ``goal`` is reached.

    Action ``i`` at node ``u`` moves to the ``i``-th neighbour of ``u``; only
    ``deg(u)`` actions are available there.  Rewards are ``-step_cost`` per
    step, ``gamma = 1`` and the goal is absorbing.
    """
    if start == goal:
        raise ValueError("start and goal must differ")
    width = int(g.degree.max())

    def transition(u, a):
        nbrs = g.neighbors(u)
        return [(int(nbrs[a]) if a < len(nbrs) else u, 1.0, -step_cost)]

    return TabularMDP.from_function(
        range(g.n), range(width), transition,
        terminal=lambda u: u == goal, initial=[start], gamma=1.0,
        name="random_ssp", available=lambda u, a: a < g.degree[u],
    )


def random_ssp(n: int = 10, density: float = 0.3, seed=0) -> TabularMDP:
    """Random connected graph with a uniformly drawn start and a distinct goal."""
    rng = np.random.default_rng(seed)
    g = random_connected_graph(n, density, rng)
    start, goal = (int(x) for x in rng.choice(n, size=2, replace=False))
    mdp = ssp_from_graph(g, start, goal)
    mdp.graph, mdp.goal = g, goal
    return mdp
