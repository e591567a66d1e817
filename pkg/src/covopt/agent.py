"""SMDP Q-learning with point options and the three discovery protocols.

* offline exact: options from the true state-transition graph;
* offline sampled: options from an incidence graph of random-policy
  trajectories, terminating whenever they leave the observed states;
* online: options discovered periodically from the agent's own experience,
  their policies learned off-policy from replay with an intrinsic reward.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .exceptions import Disconnected, OptionStuck
from .graph import Graph, graph_from_mdp
from .options import OptionSet, PointOption, discover, widen_initiation

log = logging.getLogger(__name__)

CURVE_COLUMNS = ("episode", "run", "reward", "cumulative_reward", "method", "num_options", "seed")


def run_seed(master: int, run: int) -> int:
    """Seed of run ``run`` under master seed ``master`` (shared across methods)."""
    return int(np.random.SeedSequence([int(master), int(run)]).generate_state(1)[0])


@dataclass
class QTable:
    """Action values over primitives (columns ``0..A-1``) then options.

    ``available[s]`` lists the columns usable in state ``s``: the MDP's
    primitive actions there, plus each option whose initiation set holds
    and whose policy acts at ``s``.
    """

    values: np.ndarray
    n_primitive: int
    options: list
    alpha: float = 0.1
    gamma: float = 0.95
    available: list = field(default_factory=list)

    @classmethod
    def for_mdp(cls, mdp, options=(), alpha=0.1, gamma=0.95, init=0.0) -> "QTable":
        q = cls(np.full((mdp.n_states, mdp.n_actions + len(options)), float(init)),
                mdp.n_actions, list(options), alpha, gamma)
        q._index(mdp)
        return q

    def _index(self, mdp):
        prim = mdp.available_mask()
        by_state = [[] for _ in range(mdp.n_states)]
        for i, o in enumerate(self.options):
            starts = (o.initiation,) if o.initiation_states is None else o.initiation_states
            for s in starts:
                if o.can_start(s) and o.action(s) is not None:
                    by_state[s].append(self.n_primitive + i)
        self.available = [np.concatenate([np.flatnonzero(prim[s]), np.asarray(by_state[s], dtype=np.int64)])
                          .astype(np.int64) for s in range(mdp.n_states)]

    def add_options(self, mdp, options, init=0.0):
        extra = np.full((self.values.shape[0], len(options)), float(init))
        self.values = np.hstack([self.values, extra])
        self.options = self.options + list(options)
        self._index(mdp)

    def greedy(self, s: int, rng) -> int:
        cols = self.available[s]
        vals = self.values[s, cols]
        best = cols[vals >= vals.max() - 1e-12]
        return int(best[0]) if len(best) == 1 else int(best[rng.integers(len(best))])

    def act(self, s: int, epsilon: float, rng) -> int:
        if rng.random() < epsilon:
            cols = self.available[s]
            return int(cols[rng.integers(len(cols))])
        return self.greedy(s, rng)

    def max_value(self, s: int) -> float:
        return float(self.values[s, self.available[s]].max())

    def update(self, s, col, discounted_return, duration, s_next, terminal):
        """SMDP update; with ``duration == 1`` this is one-step Q-learning."""
        boot = 0.0 if terminal else self.gamma ** duration * self.max_value(s_next)
        self.values[s, col] += self.alpha * (discounted_return + boot - self.values[s, col])


@dataclass
class LearningCurve:
    """Per-episode reward of several runs of one method.

    ``rewards[r, e]`` is the undiscounted environment reward of episode ``e``
    in run ``r``; ``num_options[r, e]`` the option count at its end.
    """

    rewards: np.ndarray
    seeds: list
    method: str
    num_options: np.ndarray

    @property
    def runs(self) -> int:
        return self.rewards.shape[0]

    @property
    def episodes(self) -> int:
        return self.rewards.shape[1]

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.rewards, axis=1)

    @property
    def mean_cumulative(self) -> np.ndarray:
        return self.cumulative.mean(axis=0)

    def rows(self):
        cum = self.cumulative
        for r in range(self.runs):
            for e in range(self.episodes):
                yield {"episode": e + 1, "run": r, "reward": float(self.rewards[r, e]),
                       "cumulative_reward": float(cum[r, e]), "method": self.method,
                       "num_options": int(self.num_options[r, e]), "seed": self.seeds[r]}

    @staticmethod
    def merge(curves) -> "LearningCurve":
        curves = list(curves)
        return LearningCurve(np.vstack([c.rewards for c in curves]),
                             [s for c in curves for s in c.seeds], curves[0].method,
                             np.vstack([c.num_options for c in curves]))


def curves_to_csv(curves) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CURVE_COLUMNS, lineterminator="\n")
    w.writeheader()
    for c in curves:
        for row in c.rows():
            row["reward"] = repr(row["reward"])
            row["cumulative_reward"] = repr(row["cumulative_reward"])
            w.writerow(row)
    return buf.getvalue()


# -- one episode of SMDP Q-learning ---------------------------------------


class _Dynamics:
    """Fast step function: table lookups when deterministic."""

    def __init__(self, mdp):
        self.mdp = mdp
        self.det = mdp.is_deterministic
        if self.det:
            self.nxt = mdp.next_table(absorbing=True)
            self.rew = mdp.reward_table(absorbing=True)
        self.terminal = mdp.terminal

    def step(self, s, a, rng):
        if self.det:
            t = int(self.nxt[s, a])
            return t, float(self.rew[s, a]), bool(self.terminal[t])
        return self.mdp.step(s, a, rng)


def _run_episode(dyn, q, max_steps, epsilon, rng, option_cap, on_step=None, pending=None):
    mdp = dyn.mdp
    s = mdp.sample_initial(rng)
    steps, total = 0, 0.0
    gamma = q.gamma
    while steps < max_steps:
        if pending:
            # options found mid-episode join the action set before the next decision
            q.add_options(mdp, pending)
            pending.clear()
        col = q.act(s, epsilon, rng)
        if col < q.n_primitive:
            t, r, done = dyn.step(s, col, rng)
            steps += 1
            total += r
            if on_step is not None:
                on_step(s, col, r, t)
            q.update(s, col, r, 1, t, done)
            s = t
        else:
            opt = q.options[col - q.n_primitive]
            s0, ret, tau, done = s, 0.0, 0, False
            while True:
                a = opt.action(s)
                if a is None:
                    if opt.known_states is None:
                        raise OptionStuck(opt, s)
                    break
                t, r, done = dyn.step(s, a, rng)
                if on_step is not None:
                    on_step(s, a, r, t)
                ret += gamma ** tau * r
                total += r
                tau += 1
                steps += 1
                s = t
                if done or steps >= max_steps or tau >= option_cap or opt.terminates(s):
                    break
            q.update(s0, col, ret, tau, s, done)
        if mdp.terminal[s]:
            break
    return total, steps


def q_learning(mdp, options=(), episodes=100, max_steps=100, alpha=0.1, gamma=0.95,
               epsilon=0.1, seed=0, q_init=0.0, method="q"):
    """Tabular Q-learning over primitive actions and point options.

    Options run call-and-return: once chosen, an option follows its policy
    until it reaches its termination condition, the episode ends, or it has
    run ``2 * n_states`` steps, and then receives one SMDP update.

    Parameters
    ----------
    mdp : TabularMDP
    options : OptionSet or sequence of PointOption
        Options with policies attached.
    episodes, max_steps : int
        ``max_steps`` counts primitive steps, including those inside options.
    alpha, gamma, epsilon : float
        Step size, discount, and epsilon-greedy exploration rate.
    seed : int
    q_init : float
    method : str
        Label stored on the returned curve.

    Returns
    -------
    (QTable, LearningCurve)
    """
    options = list(options)
    for o in options:
        if not (0 <= o.initiation < mdp.n_states and 0 <= o.termination < mdp.n_states):
            raise ValueError(f"option {o.initiation}->{o.termination} is outside the MDP")
    rng = np.random.default_rng(seed)
    q = QTable.for_mdp(mdp, options, alpha, gamma, q_init)
    dyn = _Dynamics(mdp)
    rewards = np.zeros(episodes)
    for e in range(episodes):
        rewards[e], _ = _run_episode(dyn, q, max_steps, epsilon, rng, 2 * mdp.n_states)
    counts = np.full((1, episodes), len(options))
    return q, LearningCurve(rewards[None, :], [int(seed)], method, counts)


# -- trajectories and incidence graphs ------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Transitions ``(state, action, reward, next_state)`` of one episode."""

    transitions: tuple
    episode: int
    seed: int

    @property
    def states(self) -> list[int]:
        if not self.transitions:
            return []
        return [self.transitions[0][0]] + [t[3] for t in self.transitions]


def sample_trajectories(mdp, count: int = 100, steps: int = 100, seed: int = 0) -> list[Trajectory]:
    """Episodes of the uniform random policy, each up to ``steps`` long."""
    if count < 1:
        raise ValueError("need at least one trajectory")
    rng = np.random.default_rng(seed)
    dyn = _Dynamics(mdp)
    out = []
    for ep in range(count):
        s = mdp.sample_initial(rng)
        trans = []
        for _ in range(steps):
            acts = mdp.actions(s)
            a = int(acts[rng.integers(len(acts))])
            t, r, done = dyn.step(s, a, rng)
            trans.append((s, a, r, t))
            s = t
            if done:
                break
        out.append(Trajectory(tuple(trans), ep, int(seed)))
    return out


def build_incidence_graph(trajectories) -> tuple[Graph, np.ndarray]:
    """Graph over observed states with an edge per observed transition.

    Returns the graph and ``states``, where node ``i`` is MDP state ``states[i]``.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("need at least one trajectory")
    seen, pairs = set(), set()
    for tr in trajectories:
        for s, _, _, t in tr.transitions:
            seen.update((s, t))
            if s != t:
                pairs.add((min(s, t), max(s, t)))
        if not tr.transitions:
            continue
    if not seen:
        raise ValueError("trajectories contain no transitions")
    states = np.array(sorted(seen), dtype=np.int64)
    local = {int(s): i for i, s in enumerate(states)}
    g = Graph.from_edges(len(states), [(local[a], local[b]) for a, b in pairs])
    return g, states


def discover_options(mdp, method: str, k: int, laplacian: str = "normalized",
                     graph: Graph | None = None, states=None, min_component: int = 3,
                     full_initiation: bool = False) -> OptionSet:
    """Discover ``k`` options per connected component of a state graph.

    ``graph`` defaults to the MDP's state-transition graph; when it is an
    incidence graph, ``states`` maps its nodes to MDP states and option
    policies are restricted to those states.  Components smaller than
    ``min_component`` nodes are skipped.
    """
    g = graph_from_mdp(mdp) if graph is None else graph
    states = np.arange(g.n) if states is None else np.asarray(states)
    known = None if graph is None else set(int(s) for s in states)
    comps = g.components()
    result = OptionSet([], method, laplacian, [], None)
    for ci, comp in enumerate(comps):
        if len(comp) < min_component and len(comps) > 1:
            continue
        sub, keep = g.subgraph(comp) if len(comps) > 1 else (g, np.arange(g.n))
        found = discover(method, sub, k, None, laplacian=laplacian).relabel(states[keep])
        for row in found.discovery_log:
            row["component"] = ci
        result = result.extend(found)
    result = result.with_policies(mdp, allowed=known)
    if graph is None:
        result.base_graph = g
    if full_initiation:
        result = widen_initiation(result, mdp)
    return result


def offline_sampled_discovery(mdp, method: str = "covering", trajectories: int = 100,
                              steps_per_traj: int = 100, k: int = 8, seed: int = 0,
                              laplacian: str = "normalized") -> OptionSet:
    """Options from an incidence graph of uniform-random-policy trajectories.

    Options terminate at their subgoal or on leaving the observed states.

    Raises
    ------
    Disconnected
        If the incidence graph is fragmented.
    """
    if trajectories < 1:
        raise ValueError("need at least one trajectory")
    g, states = build_incidence_graph(sample_trajectories(mdp, trajectories, steps_per_traj, seed))
    if not g.is_connected():
        raise Disconnected(len(g.components()),
                           f"incidence graph from {trajectories} trajectories is fragmented "
                           f"into {len(g.components())} components")
    opts = discover_options(mdp, method, k, laplacian, graph=g, states=states)
    return opts


# -- online discovery -----------------------------------------------------


@numba.njit(cache=True)
def _replay_sweeps(s, a, s2, subgoal, q, alpha, gamma, sweeps):
    for _ in range(sweeps):
        for i in range(len(s)):
            if s[i] == subgoal:
                continue
            if s2[i] == subgoal:
                target = 1.0
            else:
                target = gamma * q[s2[i]].max()
            q[s[i], a[i]] += alpha * (target - q[s[i], a[i]])
    return q


def learn_option_policy(mdp, replay, initiation: int, subgoal: int, alpha=0.1, gamma=0.95,
                        sweeps: int = 10) -> PointOption:
    """Point option whose policy is Q-learned off-policy from ``replay``.

    The intrinsic reward is 1 on reaching ``subgoal`` (treated as terminal);
    environment rewards are ignored.  The policy is greedy on every state
    with a positive learned value, and the option terminates elsewhere.
    """
    arr = np.asarray(replay, dtype=np.int64).reshape(-1, 3)
    q = np.zeros((mdp.n_states, mdp.n_actions))
    q = _replay_sweeps(arr[:, 0], arr[:, 1], arr[:, 2], int(subgoal), q, alpha, gamma, sweeps)
    best = q.max(axis=1)
    states = np.flatnonzero(best > 0)
    policy = {int(s): int(np.argmax(q[s])) for s in states if s != subgoal}
    known = frozenset(policy) | {int(subgoal)}
    path = [initiation]
    s = initiation
    while s in policy and len(path) <= 2 * mdp.n_states and s != subgoal:
        nxt, p, _ = mdp.dynamics(s, policy[s])
        s = int(nxt[int(np.argmax(p))])
        path.append(s)
    return PointOption(int(initiation), int(subgoal), tuple(path), policy, None, known)


def online_discovery_run(mdp, batch: int = 4, interval_steps: int = 500, max_options: int = 32,
                         episodes: int = 100, max_steps: int = 100, alpha=0.1, gamma=0.95,
                         epsilon=0.1, seed: int = 0, laplacian: str = "normalized",
                         sweeps: int = 10, method: str = "online"):
    """Q-learning while discovering ``batch`` covering options every ``interval_steps`` steps.

    At each discovery point the incidence graph of all experience so far is
    restricted to the component holding the current state, augmented with
    the edges of options found earlier, and extended by ``batch`` covering
    options.  Each new option's policy is learned from replay; option
    policies are frozen once learned.  Discovery is skipped (and logged) when
    that component has fewer than 3 states.

    Returns
    -------
    (QTable, LearningCurve, OptionSet)
    """
    if interval_steps < 1:
        raise ValueError("interval_steps must be >= 1")
    rng = np.random.default_rng(seed)
    q = QTable.for_mdp(mdp, (), alpha, gamma)
    dyn = _Dynamics(mdp)
    replay: list[tuple[int, int, int]] = []
    found = OptionSet([], "covering", laplacian, [], None)
    state = {"total": 0, "current": None}
    skipped = []

    def on_step(s, a, r, t):
        replay.append((s, a, t))
        state["total"] += 1
        state["current"] = t
        if state["total"] % interval_steps == 0 and len(found) < max_options:
            new = _discover_online(mdp, replay, found, t, min(batch, max_options - len(found)),
                                   laplacian, alpha, gamma, sweeps)
            if new is None:
                skipped.append(state["total"])
                log.info("online discovery skipped at step %d", state["total"])
            else:
                pending.extend(new.options)
                found.options.extend(new.options)
                found.discovery_log.extend(new.discovery_log)

    pending: list = []
    rewards = np.zeros(episodes)
    counts = np.zeros(episodes, dtype=np.int64)
    for e in range(episodes):
        rewards[e], _ = _run_episode(dyn, q, max_steps, epsilon, rng, 2 * mdp.n_states,
                                     on_step, pending)
        counts[e] = len(q.options) + len(pending)
    if pending:
        q.add_options(mdp, pending)
        pending.clear()
    found.skipped_steps = skipped
    curve = LearningCurve(rewards[None, :], [int(seed)], method, counts[None, :])
    return q, curve, found


def _discover_online(mdp, replay, found, current, batch, laplacian, alpha, gamma, sweeps):
    from .options import covering_options

    traj = Trajectory(tuple((s, a, 0.0, t) for s, a, t in replay), 0, 0)
    g, states = build_incidence_graph([traj])
    local = {int(s): i for i, s in enumerate(states)}
    comp = next(c for c in g.components() if local[int(current)] in c)
    if len(comp) < 3:
        return None
    sub, keep = g.subgraph(comp)
    pos = {int(states[u]): i for i, u in enumerate(keep)}
    prior = [(pos[o.initiation], pos[o.termination]) for o in found
             if o.initiation in pos and o.termination in pos]
    sub = sub.with_edges(prior)
    k = batch + (batch % 2)
    if sub.edge_count == sub.n * (sub.n - 1) // 2:
        return None
    new = covering_options(sub, k, None, laplacian=laplacian).relabel(states[keep])
    opts = [learn_option_policy(mdp, replay, o.initiation, o.termination, alpha, gamma, sweeps)
            for o in new.options[:batch]]
    return OptionSet(opts, "covering", laplacian, new.discovery_log[1:], None)


# -- experiment drivers ---------------------------------------------------


def run_method(mdp, method: str, k: int, runs: int = 5, episodes: int = 100, max_steps: int = 100,
               alpha=0.1, gamma=0.95, epsilon=0.1, seed: int = 0, laplacian: str = "normalized",
               protocol: str = "offline-exact", trajectories: int = 100, steps_per_traj: int = 100,
               interval_steps: int = 500, full_initiation: bool = False,
               batch: int = 4) -> LearningCurve:
    """Learning curves of one method over ``runs`` seeded runs."""
    curves = []
    exact = None
    if protocol == "offline-exact" and method != "none":
        exact = discover_options(mdp, method, k, laplacian, full_initiation=full_initiation)
    for r in range(runs):
        rs = run_seed(seed, r)
        if protocol == "online" and method != "none":
            if method != "covering":
                raise ValueError("online discovery is defined for covering options only")
            _, c, _ = online_discovery_run(mdp, batch, interval_steps, k, episodes, max_steps,
                                           alpha, gamma, epsilon, rs, laplacian, method="online")
            curves.append(c)
            continue
        if method == "none":
            opts = []
        elif protocol == "offline-sampled":
            opts = offline_sampled_discovery(mdp, method, trajectories, steps_per_traj, k, rs,
                                             laplacian)
            if full_initiation:
                opts = widen_initiation(opts, mdp)
        else:
            opts = exact
        _, c = q_learning(mdp, opts, episodes, max_steps, alpha, gamma, epsilon, rs, method=method)
        curves.append(c)
    return LearningCurve.merge(curves)


def option_count_sweep(mdp, counts, method: str = "covering", **kwargs) -> dict:
    """One merged learning curve per option count, with identical run seeds."""
    counts = list(counts)
    if any(c % 2 or c < 0 for c in counts) or counts != sorted(counts):
        raise ValueError("counts must be even, non-negative and ascending")
    out = {}
    for c in counts:
        curve = run_method(mdp, method if c else "none", c, **kwargs)
        out[c] = replace(curve, method=f"{method}-{c}")
    return out
