"""Random-walk cover time: Monte-Carlo estimation, spectral bound, random-graph study.

Two quantities come out of every sampled trajectory:

* the *cover time*, the number of steps until every node has been visited;
* the *first-visit time* of each node, whose averages estimate the expected
  hitting times ``H[i, j]``.  ``max_j H[i, j]`` is the hitting-based cover
  time of start ``i``; summary reports average it over start states.

The sampling kernel is compiled with numba and draws from an xorshift64*
stream seeded per ``(seed, start, trajectory)``, so estimates do not depend on
how trajectories are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import stats

from .exceptions import DensityTooLow, NonPositiveConnectivity, Unreachable
from .graph import Graph
from .spectral import smallest_eigenpairs

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, start: int) -> int:
    """64-bit key of the random stream for one start state."""
    return _splitmix64(_splitmix64(int(seed) & _MASK64) ^ (int(start) & _MASK64))


@numba.njit(cache=True)
def _mix(x):
    x = x + numba.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
    x = x ^ (x >> numba.uint64(31))
    if x == numba.uint64(0):
        x = numba.uint64(1)
    return x


@numba.njit(cache=True)
def _cover_kernel(indptr, choices, start, trajectories, key, n):
    """Walk until every node is seen; accumulate cover and first-visit statistics."""
    seen = np.zeros(n, np.int64)
    hit_sum = np.zeros(n)
    hit_sq = np.zeros(n)
    cover_sum = 0.0
    cover_sq = 0.0
    for t in range(1, trajectories + 1):
        x = _mix(numba.uint64(key) ^ (numba.uint64(t) * numba.uint64(0xD1B54A32D192ED03)))
        seen[start] = t
        count = 1
        u = start
        steps = 0
        while count < n:
            lo = indptr[u]
            deg = indptr[u + 1] - lo
            x ^= x >> numba.uint64(12)
            x ^= x << numba.uint64(25)
            x ^= x >> numba.uint64(27)
            r = (x * numba.uint64(2685821657736338717)) >> numba.uint64(32)
            u = choices[lo + np.int64((r * numba.uint64(deg)) >> numba.uint64(32))]
            steps += 1
            if seen[u] != t:
                seen[u] = t
                count += 1
                hit_sum[u] += steps
                hit_sq[u] += float(steps) * steps
        cover_sum += steps
        cover_sq += float(steps) * steps
    return cover_sum, cover_sq, hit_sum, hit_sq


@numba.njit(cache=True)
def _hit_kernel(indptr, choices, start, goal, trajectories, key):
    total = 0.0
    total_sq = 0.0
    for t in range(1, trajectories + 1):
        x = _mix(numba.uint64(key) ^ (numba.uint64(t) * numba.uint64(0xD1B54A32D192ED03)))
        u = start
        steps = 0
        while u != goal:
            lo = indptr[u]
            deg = indptr[u + 1] - lo
            x ^= x >> numba.uint64(12)
            x ^= x << numba.uint64(25)
            x ^= x >> numba.uint64(27)
            r = (x * numba.uint64(2685821657736338717)) >> numba.uint64(32)
            u = choices[lo + np.int64((r * numba.uint64(deg)) >> numba.uint64(32))]
            steps += 1
        total += steps
        total_sq += float(steps) * steps
    return total, total_sq


@dataclass(frozen=True)
class RandomWalk:
    """Uniform random walk given as a multiset of choices per node.

    From node ``u`` the walk moves to ``choices[indptr[u]:indptr[u+1]]``
    uniformly; repeated entries weight a target, and ``u`` itself may appear
    (a self-loop, e.g. bumping into a wall).
    """

    indptr: np.ndarray
    choices: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @classmethod
    def from_graph(cls, g: Graph) -> "RandomWalk":
        """Step to each neighbour with probability ``1/d_u``."""
        return cls(g.indptr.astype(np.int64), g.indices.astype(np.int64))

    @classmethod
    def from_mdp(cls, mdp, options=()) -> "RandomWalk":
        """Walk of the uniform random policy over primitive actions plus options.

        Requires deterministic dynamics.  Each primitive action contributes its
        successor (terminal states keep their free-running motion) and each
        option contributes its termination state at its initiation state.
        """
        table = mdp.next_table(absorbing=False)
        avail = mdp.available_mask()
        extra = [[] for _ in range(mdp.n_states)]
        for opt in options:
            init = getattr(opt, "initiation_states", None)
            for s in (opt.initiation,) if init is None else sorted(init):
                if s != opt.termination:
                    extra[s].append(opt.termination)
        rows = [list(table[s][avail[s]]) + extra[s] for s in range(mdp.n_states)]
        indptr = np.zeros(mdp.n_states + 1, dtype=np.int64)
        np.cumsum([len(r) for r in rows], out=indptr[1:])
        return cls(indptr, np.fromiter((t for r in rows for t in r), dtype=np.int64))

    def transition_matrix(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        for u in range(self.n):
            row = self.choices[self.indptr[u]:self.indptr[u + 1]]
            np.add.at(p[u], row, 1.0 / len(row))
        return p

    def support_graph(self) -> Graph:
        edges = {(u, int(v)) for u in range(self.n)
                 for v in self.choices[self.indptr[u]:self.indptr[u + 1]] if v != u}
        return Graph.from_edges(self.n, edges)

    def require_connected(self):
        if self.n > 1:
            self.support_graph().require_connected()


def _as_walk(walk_or_graph) -> RandomWalk:
    if isinstance(walk_or_graph, RandomWalk):
        return walk_or_graph
    if isinstance(walk_or_graph, Graph):
        return RandomWalk.from_graph(walk_or_graph)
    raise TypeError(f"expected Graph or RandomWalk, got {type(walk_or_graph).__name__}")


def sample_cover_time(walk, start: int, rng=None) -> int:
    """Steps until a single walk from ``start`` has visited every node."""
    walk = _as_walk(walk)
    walk.require_connected()
    rng = np.random.default_rng(rng)
    n = walk.n
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    count, u, steps = 1, start, 0
    while count < n:
        row = walk.choices[walk.indptr[u]:walk.indptr[u + 1]]
        u = int(row[rng.integers(len(row))])
        steps += 1
        if not seen[u]:
            seen[u] = True
            count += 1
    return steps


@dataclass(frozen=True)
class CoverTimeEstimate:
    """Monte-Carlo cover-time statistics, one row per start state.

    ``per_start_mean`` is the visit-all cover time from each start and
    ``max_over_starts`` its maximum, the expected cover time E[C(G)].
    ``mean_hitting[i, j]`` estimates the expected first-visit time of node
    ``j`` from start ``starts[i]``; ``per_start_max_hitting`` is its row max
    and ``hitting_cover_time`` averages those over the starts.
    """

    starts: np.ndarray
    per_start_mean: np.ndarray
    per_start_stderr: np.ndarray
    mean_hitting: np.ndarray
    hitting_stderr: np.ndarray
    trajectories_per_start: int
    seed: int

    @property
    def max_over_starts(self) -> float:
        return float(self.per_start_mean.max())

    @property
    def mean_over_starts(self) -> float:
        return float(self.per_start_mean.mean())

    @property
    def argmax_start(self) -> int:
        return int(self.starts[int(np.argmax(self.per_start_mean))])

    @property
    def max_over_starts_stderr(self) -> float:
        return float(self.per_start_stderr[int(np.argmax(self.per_start_mean))])

    @property
    def mean_over_starts_stderr(self) -> float:
        return float(np.sqrt(np.sum(self.per_start_stderr ** 2)) / len(self.starts))

    @property
    def per_start_max_hitting(self) -> np.ndarray:
        return self.mean_hitting.max(axis=1)

    @property
    def per_start_max_hitting_stderr(self) -> np.ndarray:
        j = self.mean_hitting.argmax(axis=1)
        return self.hitting_stderr[np.arange(len(j)), j]

    @property
    def hitting_cover_time(self) -> float:
        return float(self.per_start_max_hitting.mean())

    @property
    def hitting_cover_time_stderr(self) -> float:
        se = self.per_start_max_hitting_stderr
        return float(np.sqrt(np.sum(se ** 2)) / len(se))

    @property
    def max_hitting_over_starts(self) -> float:
        return float(self.per_start_max_hitting.max())


def estimate_cover_time(walk, trajectories_per_start: int = 10_000, seed: int = 0,
                        starts=None) -> CoverTimeEstimate:
    """Sample ``trajectories_per_start`` walks from every start state.

    Parameters
    ----------
    walk : Graph or RandomWalk
        A graph is walked uniformly over neighbours.
    trajectories_per_start : int
    seed : int
        Master seed; identical seeds give bit-identical estimates.
    starts : sequence of int, optional
        Start states to sample from (default: all).
    """
    walk = _as_walk(walk)
    if trajectories_per_start < 1:
        raise ValueError("trajectories_per_start must be >= 1")
    walk.require_connected()
    n = walk.n
    starts = np.arange(n) if starts is None else np.asarray(starts, dtype=np.int64)
    m = trajectories_per_start
    means, ses = np.zeros(len(starts)), np.zeros(len(starts))
    hit_mean = np.zeros((len(starts), n))
    hit_se = np.zeros((len(starts), n))
    for i, s in enumerate(starts):
        if n == 1:
            continue
        c_sum, c_sq, h_sum, h_sq = _cover_kernel(
            walk.indptr, walk.choices, int(s), m, np.uint64(stream_key(seed, int(s))), n)
        means[i] = c_sum / m
        hit_mean[i] = h_sum / m
        if m > 1:
            ses[i] = math.sqrt(max(c_sq / m - means[i] ** 2, 0.0) * m / (m - 1) / m)
            var = np.maximum(h_sq / m - hit_mean[i] ** 2, 0.0) * m / (m - 1)
            hit_se[i] = np.sqrt(var / m)
    return CoverTimeEstimate(starts, means, ses, hit_mean, hit_se, m, int(seed))


def exact_hitting_times(walk) -> np.ndarray:
    """Expected hitting times ``H[i, j]`` by dense linear solves (small graphs)."""
    walk = _as_walk(walk)
    walk.require_connected()
    p = walk.transition_matrix()
    n = walk.n
    h = np.zeros((n, n))
    for j in range(n):
        keep = np.arange(n) != j
        h[keep, j] = np.linalg.solve(np.eye(n - 1) - p[np.ix_(keep, keep)], np.ones(n - 1))
    return h


def cover_time_upper_bound(lambda2: float, n: int) -> float:
    """``n^2 ln(n) / lambda2``, the spectral cover-time bound without its o(1) factor."""
    if lambda2 <= 0:
        raise NonPositiveConnectivity(f"lambda2 must be positive, got {lambda2}")
    if n < 2:
        raise ValueError("bound needs n >= 2")
    return n * n * math.log(n) / lambda2


def random_connected_graph(n: int, density: float, rng=None) -> Graph:
    """Random tree grown node by node, then uniformly drawn extra edges.

    Extra non-edges are added until the edge count reaches
    ``ceil(density * n (n-1) / 2)``.
    """
    rng = np.random.default_rng(rng)
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    pairs = n * (n - 1) // 2
    target = math.ceil(density * pairs - 1e-12)
    if target < n - 1:
        raise DensityTooLow(f"density {density} gives {target} edges, a spanning tree needs {n - 1}")
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(v))
        edges.add((u, v))
    rest = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in edges]
    extra = target - len(edges)
    if extra:
        for idx in np.sort(rng.choice(len(rest), size=extra, replace=False)):
            edges.add(rest[idx])
    return Graph.from_edges(n, edges)


def random_policy_cost(mdp, start: int, goal: int, trajectories: int = 10_000,
                       seed: int = 0) -> tuple[float, float]:
    """Mean (and stderr) of the first-hitting step count of the uniform random policy."""
    walk = RandomWalk.from_mdp(mdp)
    if walk.support_graph().bfs_distances(start)[goal] < 0:
        raise Unreachable(start, goal)
    if start == goal:
        return 0.0, 0.0
    total, total_sq = _hit_kernel(walk.indptr, walk.choices, int(start), int(goal),
                                  int(trajectories), np.uint64(stream_key(seed, start * 1_000_003 + goal)))
    mean = total / trajectories
    var = max(total_sq / trajectories - mean ** 2, 0.0)
    se = math.sqrt(var / max(trajectories - 1, 1))
    return mean, se


STUDY_COLUMNS = (
    "graph", "n", "edges", "start", "goal",
    "lambda2_normalized", "lambda2_combinatorial", "upper_bound",
    "cover_time_max", "cover_time_max_stderr", "cover_time_mean",
    "random_policy_cost", "random_policy_cost_stderr", "mean_pair_cost",
)


def correlation_study(num_graphs: int = 100, n: int = 10, density: float = 0.3,
                      trajectories: int = 1000, seed: int = 0):
    """Random connected graphs with a random shortest-path task each.

    Returns ``(rows, summary)``.  ``rows`` holds one dict per graph keyed by
    :data:`STUDY_COLUMNS`; ``trajectories`` is per start state for the
    cover-time estimate and total for the task's random-policy cost.
    ``mean_pair_cost`` is the exact expected random-policy cost averaged
    over all ordered (start, goal) pairs.
    """
    from .envs.random_ssp import ssp_from_graph

    if num_graphs < 1 or n < 2 or trajectories < 1:
        raise ValueError("num_graphs, n and trajectories must be positive (n >= 2)")
    ss = np.random.SeedSequence(seed)
    rows = []
    for idx, child in enumerate(ss.spawn(num_graphs)):
        rng = np.random.default_rng(child)
        g = random_connected_graph(n, density, rng)
        start, goal = (int(x) for x in rng.choice(n, size=2, replace=False))
        lam_n = smallest_eigenpairs(g, 2, laplacian="normalized").algebraic_connectivity
        lam_c = smallest_eigenpairs(g, 2, laplacian="combinatorial").algebraic_connectivity
        sub_seed = int(child.generate_state(1)[0])
        est = estimate_cover_time(g, trajectories, seed=sub_seed)
        mdp = ssp_from_graph(g, start, goal)
        cost, cost_se = random_policy_cost(mdp, start, goal, trajectories, seed=sub_seed)
        h = exact_hitting_times(g)
        rows.append({
            "graph": idx, "n": n, "edges": g.edge_count, "start": start, "goal": goal,
            "lambda2_normalized": lam_n, "lambda2_combinatorial": lam_c,
            "upper_bound": cover_time_upper_bound(lam_n, n),
            "cover_time_max": est.max_over_starts,
            "cover_time_max_stderr": est.max_over_starts_stderr,
            "cover_time_mean": est.mean_over_starts,
            "random_policy_cost": cost, "random_policy_cost_stderr": cost_se,
            "mean_pair_cost": float(h.sum() / (n * (n - 1))),
        })
    return rows, summarize_study(rows)


def summarize_study(rows) -> dict:
    """Spearman rank correlations over study rows (``None`` for fewer than 3 rows)."""
    out = {"num_graphs": len(rows), "low_power": len(rows) < 10}
    pairs = {
        "lambda2_combinatorial~cover_time": ("lambda2_combinatorial", "cover_time_max"),
        "lambda2_normalized~cover_time": ("lambda2_normalized", "cover_time_max"),
        "cover_time~random_policy_cost": ("cover_time_max", "random_policy_cost"),
        "cover_time~mean_pair_cost": ("cover_time_max", "mean_pair_cost"),
    }
    for name, (a, b) in pairs.items():
        if len(rows) < 2:
            out[name] = None
            continue
        x = [r[a] for r in rows]
        y = [r[b] for r in rows]
        if len(set(x)) < 2 or len(set(y)) < 2:
            out[name] = None
            continue
        out[name] = float(stats.spearmanr(x, y)[0])
    return out


@dataclass(frozen=True)
class ValueBoundCheck:
    worst_state: int
    worst_value: float
    cover_bound: float
    cover_bound_stderr: float
    satisfied: bool
    values: np.ndarray


def value_bound_check(mdp, goal: int, trajectories: int = 2000, seed: int = 0,
                      sigmas: float = 3.0) -> ValueBoundCheck:
    """Compare the random policy's exact value with ``r_c`` times the cover time.

    ``mdp`` is an undiscounted shortest-path problem whose non-goal steps all
    pay the same reward ``r_c <= 0``.  Values solve the policy-evaluation
    system of the uniform random policy; the cover time is estimated by
    Monte Carlo.  The inequality is accepted within ``sigmas`` standard errors
    of the estimate.
    """
    n = mdp.n_states
    p = np.zeros((n, n))
    r = np.zeros(n)
    for s in range(n):
        if s == goal:
            continue
        acts = mdp.actions(s)
        for a in acts:
            nxt, prob, rew = mdp.dynamics(s, a)
            np.add.at(p[s], nxt, prob / len(acts))
            r[s] += float(prob @ rew) / len(acts)
    step_rewards = {float(x) for s in range(n) if s != goal
                    for a in mdp.actions(s) for x in mdp.dynamics(s, a)[2]}
    if len(step_rewards) != 1 or next(iter(step_rewards)) > 0:
        raise ValueError("expected a single non-positive step reward r_c")
    r_c = step_rewards.pop()
    keep = np.arange(n) != goal
    values = np.zeros(n)
    values[keep] = np.linalg.solve(np.eye(n - 1) - p[np.ix_(keep, keep)], r[keep])
    est = estimate_cover_time(RandomWalk.from_mdp(mdp), trajectories, seed=seed)
    bound = r_c * est.max_over_starts
    bound_se = abs(r_c) * est.max_over_starts_stderr
    worst = int(np.argmin(values))
    ok = values[worst] >= bound - sigmas * bound_se
    return ValueBoundCheck(worst, float(values[worst]), float(bound), float(bound_se),
                           bool(ok), values)
