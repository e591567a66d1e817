"""Point options and the discovery algorithms that produce them.

Covering options greedily add the edge between the two extreme entries of
the Fiedler vector, recomputing it after every insertion.  Eigenoptions use
the first few eigenvectors of the unmodified graph, and betweenness options
target local maxima of shortest-path betweenness.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exceptions import CompleteGraph, CovoptError, MultiplicityAboveOne, Unreachable
from .graph import Graph
from .spectral import DEGENERACY_GAP, TIE_TOL, smallest_eigenpairs

LOG_COLUMNS = (
    "component", "iteration", "node_i", "node_j", "v_i", "v_j", "lambda2_before", "lambda3_before",
    "lambda2_after", "increment_F", "multiplicity", "fallback",
)


@dataclass(frozen=True, eq=True)
class PointOption:
    """Option ``(I, pi, beta)`` with a single initiation and termination state.

    Attributes
    ----------
    initiation, termination : int
    path : tuple of int
        States visited from ``initiation`` to ``termination`` when the
        dynamics are deterministic (empty until a policy is attached).
    policy : dict
        ``state -> primitive action`` on the states where the option acts.
    initiation_states : frozenset or None
        Widened initiation set; ``None`` means just ``initiation``.
    known_states : frozenset or None
        When set, the option also terminates on leaving these states.
    """

    initiation: int
    termination: int
    path: tuple = ()
    policy: dict = field(default_factory=dict, compare=False)
    initiation_states: frozenset | None = None
    known_states: frozenset | None = None

    __hash__ = None

    def __post_init__(self):
        if self.initiation == self.termination:
            raise ValueError(f"option initiation and termination coincide at {self.initiation}")

    @property
    def length(self) -> int:
        return max(len(self.path) - 1, 0)

    def can_start(self, s: int) -> bool:
        if self.initiation_states is not None:
            return s in self.initiation_states and s != self.termination
        return s == self.initiation

    def terminates(self, s: int) -> bool:
        if s == self.termination:
            return True
        return self.known_states is not None and s not in self.known_states

    def action(self, s: int):
        """Policy action at ``s``, or ``None`` where the policy is undefined."""
        return self.policy.get(s)

    def relabel(self, mapping) -> "PointOption":
        m = np.asarray(mapping)
        return PointOption(int(m[self.initiation]), int(m[self.termination]),
                           tuple(int(m[s]) for s in self.path))


@dataclass
class OptionSet:
    """Ordered options plus the record of how they were found.

    ``discovery_log`` holds one dict per iteration keyed by
    :data:`LOG_COLUMNS`; row 0 is the baseline (graph before any insertion).
    """

    options: list
    method: str = "covering"
    laplacian: str = "normalized"
    discovery_log: list = field(default_factory=list)
    base_graph: Graph | None = None

    def __len__(self):
        return len(self.options)

    def __iter__(self):
        return iter(self.options)

    def __getitem__(self, i):
        return self.options[i]

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Distinct undirected edges contributed by the options, in order."""
        out = []
        for o in self.options:
            e = (min(o.initiation, o.termination), max(o.initiation, o.termination))
            if e not in out:
                out.append(e)
        return out

    @property
    def augmented_graph(self) -> Graph:
        if self.base_graph is None:
            raise CovoptError("option set carries no base graph")
        return self.base_graph.with_edges(self.edges)

    @property
    def final_lambda2(self) -> float | None:
        if not self.discovery_log:
            return None
        return self.discovery_log[-1]["lambda2_after"]

    def relabel(self, mapping, base_graph: Graph | None = None) -> "OptionSet":
        """Map node ids through ``mapping`` (e.g. a subgraph's node array)."""
        m = np.asarray(mapping)
        log = []
        for row in self.discovery_log:
            row = dict(row)
            for key in ("node_i", "node_j"):
                if row.get(key) is not None:
                    row[key] = int(m[row[key]])
            log.append(row)
        return OptionSet([o.relabel(m) for o in self.options], self.method, self.laplacian,
                         log, base_graph)

    def extend(self, other: "OptionSet") -> "OptionSet":
        return OptionSet(self.options + list(other.options), self.method, self.laplacian,
                         self.discovery_log + list(other.discovery_log), self.base_graph)

    def with_policies(self, mdp, allowed=None) -> "OptionSet":
        """Attach shortest-path policies computed on ``mdp``."""
        opts = [attach_policy(o, mdp, allowed) for o in self.options]
        return replace(self, options=opts)

    # -- text serialization ----------------------------------------------

    def to_text(self) -> str:
        lines = ["optionset 1", f"method {self.method}", f"laplacian {self.laplacian}",
                 f"options {len(self.options)}"]
        for o in self.options:
            lines.append(f"option {o.initiation} {o.termination}")
            lines.append("path " + " ".join(map(str, o.path)))
            lines.append("policy " + " ".join(f"{s}:{a}" for s, a in sorted(o.policy.items())))
            if o.initiation_states is not None:
                lines.append("initiation " + " ".join(map(str, sorted(o.initiation_states))))
            if o.known_states is not None:
                lines.append("known " + " ".join(map(str, sorted(o.known_states))))
        lines.append(f"log {len(self.discovery_log)}")
        lines.append(",".join(LOG_COLUMNS))
        for row in self.discovery_log:
            lines.append(",".join(_fmt(row.get(c)) for c in LOG_COLUMNS))
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "OptionSet":
        lines = text.splitlines()
        pos = 0

        def take(prefix):
            nonlocal pos
            if pos >= len(lines) or not (lines[pos] == prefix or lines[pos].startswith(prefix + " ")):
                found = lines[pos] if pos < len(lines) else "end of file"
                raise CovoptError(f"option set line {pos + 1}: expected {prefix!r}, found {found!r}")
            rest = lines[pos][len(prefix):].strip()
            pos += 1
            return rest

        def peek(prefix):
            return pos < len(lines) and (lines[pos] == prefix or lines[pos].startswith(prefix + " "))

        if take("optionset") != "1":
            raise CovoptError("unsupported option set version")
        method = take("method")
        laplacian = take("laplacian")
        count = int(take("options"))
        options = []
        for _ in range(count):
            i, t = (int(x) for x in take("option").split())
            path = tuple(int(x) for x in take("path").split())
            policy = {}
            for item in take("policy").split():
                s, a = item.split(":")
                policy[int(s)] = int(a)
            init = known = None
            if peek("initiation"):
                init = frozenset(int(x) for x in take("initiation").split())
            if peek("known"):
                known = frozenset(int(x) for x in take("known").split())
            options.append(PointOption(i, t, path, policy, init, known))
        rows = int(take("log"))
        header = lines[pos].split(",") if pos < len(lines) else []
        pos += 1
        if tuple(header) != LOG_COLUMNS:
            raise CovoptError("option set log header does not match the expected columns")
        log = []
        for _ in range(rows):
            values = lines[pos].split(",")
            pos += 1
            log.append({c: _parse(c, v) for c, v in zip(LOG_COLUMNS, values)})
        take("end")
        return cls(options, method, laplacian, log)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="ascii")

    @classmethod
    def load(cls, path) -> "OptionSet":
        return cls.from_text(Path(path).read_text(encoding="ascii"))


_INT_COLUMNS = {"component", "iteration", "node_i", "node_j", "multiplicity"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _parse(col, v):
    if v == "":
        return None
    if col in _INT_COLUMNS:
        return int(v)
    if col == "fallback":
        return bool(int(v))
    return float(v)


# -- option policies ------------------------------------------------------


def _allowed_mask(mdp, allowed):
    if allowed is None:
        return np.ones(mdp.n_states, dtype=bool)
    mask = np.zeros(mdp.n_states, dtype=bool)
    mask[np.fromiter(allowed, dtype=np.int64)] = True
    return mask


def policy_toward(mdp, target: int, allowed=None):
    """Shortest-path policy toward ``target`` over every state that can reach it.

    Deterministic MDPs use a reverse breadth-first search over the
    free-running dynamics (lowest action index on ties); stochastic ones use
    value iteration with reward 1 on reaching ``target`` and discount 0.95.
    Only states in ``allowed`` (default: all) are traversed.

    Returns
    -------
    policy : dict
        ``state -> action`` for every state other than ``target`` that can
        reach it.
    dist : ndarray
        BFS distance to ``target`` (deterministic) or ``-1`` where unreachable;
        for stochastic MDPs, the optimal value (0 where unreachable).
    """
    mask = _allowed_mask(mdp, allowed)
    avail = mdp.available_mask()
    if mdp.is_deterministic:
        table = mdp.next_table(absorbing=False)
        preds = [[] for _ in range(mdp.n_states)]
        for s in np.flatnonzero(mask):
            for a in np.flatnonzero(avail[s]):
                t = int(table[s, a])
                if t != s and mask[t]:
                    preds[t].append(int(s))
        dist = np.full(mdp.n_states, -1, dtype=np.int64)
        dist[target] = 0
        queue = deque([target])
        while queue:
            t = queue.popleft()
            for s in preds[t]:
                if dist[s] < 0:
                    dist[s] = dist[t] + 1
                    queue.append(s)
        policy = {}
        for s in np.flatnonzero(dist > 0):
            nxt = table[s]
            ok = avail[s] & (dist[nxt] == dist[s] - 1) & mask[nxt]
            policy[int(s)] = int(np.flatnonzero(ok)[0])
        return policy, dist
    return _value_iteration_policy(mdp, target, mask, avail)


def _value_iteration_policy(mdp, target, mask, avail, gamma=0.95, tol=1e-10, max_iter=10_000):
    S, A = mdp.n_states, mdp.n_actions
    nxt, prob = mdp.next_state, mdp.prob
    starts = mdp.ptr[:-1]
    hit = (nxt == target).astype(float)
    ok_pair = (avail & mask[:, None]).ravel()
    # transitions leaving the allowed set are worth nothing
    inside = mask[nxt].astype(float)
    v = np.zeros(S)
    q = np.zeros(S * A)
    for _ in range(max_iter):
        cont = np.where(nxt == target, 0.0, v[nxt]) * inside
        q = np.add.reduceat(prob * (hit + gamma * cont), starts)
        q[~ok_pair] = -np.inf
        new = q.reshape(S, A).max(axis=1)
        new[target] = 0.0
        new[~mask] = 0.0
        new = np.maximum(new, 0.0)
        if np.max(np.abs(new - v)) < tol:
            v = new
            break
        v = new
    qa = q.reshape(S, A)
    policy = {int(s): int(np.argmax(qa[s])) for s in np.flatnonzero((v > 0) & mask)
              if s != target}
    return policy, v


def _rollout_path(mdp, start, target, policy, limit):
    path = [start]
    s = start
    while s != target and len(path) <= limit:
        a = policy.get(s)
        if a is None:
            return None
        nxt, p, _ = mdp.dynamics(s, a)
        s = int(nxt[int(np.argmax(p))])
        path.append(s)
    return tuple(path) if s == target else None


def option_policy(mdp, start: int, target: int, allowed=None):
    """Shortest-path policy from ``start`` to ``target``.

    Returns ``(policy, length, path)`` where the policy covers exactly the
    path states for deterministic MDPs.  For stochastic MDPs the policy
    covers every state that can reach ``target`` and the path follows the
    most likely outcome of each step.

    Raises
    ------
    Unreachable
        If ``target`` cannot be reached from ``start``.
    """
    if start == target:
        raise ValueError("option start and target must differ")
    full, dist = policy_toward(mdp, target, allowed)
    if start not in full:
        raise Unreachable(start, target)
    path = _rollout_path(mdp, start, target, full, 2 * mdp.n_states)
    if mdp.is_deterministic:
        policy = {s: full[s] for s in path[:-1]}
    else:
        policy = full
        if path is None:
            path = (start, target)
    return policy, len(path) - 1, path


def attach_policy(opt: PointOption, mdp, allowed=None) -> PointOption:
    policy, _, path = option_policy(mdp, opt.initiation, opt.termination, allowed)
    known = None if allowed is None else frozenset(int(s) for s in allowed)
    return replace(opt, policy=policy, path=path, known_states=known)


def widen_initiation(opts: OptionSet, mdp) -> OptionSet:
    """Make every option executable from any state that can reach its termination."""
    out = []
    for o in opts:
        policy, _ = policy_toward(mdp, o.termination)
        out.append(replace(o, policy=policy, initiation_states=frozenset(policy)))
    return replace(opts, options=out, method=opts.method + "+full")


# -- discovery ------------------------------------------------------------


def theorem2_increment(lambda2: float, lambda3: float, vi: float, vj: float) -> float:
    """Lower bound ``F`` on the gain in lambda2 from joining nodes ``i`` and ``j``.

    ``F = (v_i - v_j)^2 / (6 / (lambda3 - lambda2) + 3/2)``.

    Raises
    ------
    MultiplicityAboveOne
        If ``lambda3 - lambda2 < 1e-9``.
    """
    gap = lambda3 - lambda2
    if gap < DEGENERACY_GAP:
        raise MultiplicityAboveOne(f"lambda3 - lambda2 = {gap:.3e}; lambda2 is repeated")
    return (vi - vj) ** 2 / (6.0 / gap + 1.5)


def _extremes(v):
    top = int(np.flatnonzero(v >= v.max() - TIE_TOL)[0])
    bottom = int(np.flatnonzero(v <= v.min() + TIE_TOL)[0])
    return top, bottom


def _best_non_edge(g: Graph, v):
    best, pair = -1.0, None
    order = np.argsort(-v, kind="stable")
    for a in range(g.n):
        i = int(order[a])
        for b in range(g.n - 1, a, -1):
            j = int(order[b])
            if not g.has_edge(i, j):
                gap = abs(v[i] - v[j])
                if gap > best + TIE_TOL:
                    best, pair = gap, (i, j)
                break
    if pair is None:
        raise CompleteGraph()
    return pair


def _check_k(k):
    if k < 0 or k % 2:
        raise ValueError(f"option count must be even and non-negative, got {k}")


def _log_row(**values):
    row = dict.fromkeys(LOG_COLUMNS)
    row.update(values)
    return row


def _baseline_row(g, laplacian, tol):
    lam = smallest_eigenpairs(g, 2, tol=tol, laplacian=laplacian).algebraic_connectivity
    return _log_row(iteration=0, lambda2_after=lam), lam


def covering_options(g: Graph, k: int, mdp=None, laplacian: str = "normalized",
                     tol: float = 1e-8) -> OptionSet:
    """Greedy covering options.

    Each of the ``k / 2`` iterations takes the Fiedler vector of the current
    graph, joins its largest and smallest entries by a mirrored pair of
    point options, and inserts that edge before recomputing.

    Parameters
    ----------
    g : Graph
        Connected state-transition graph.
    k : int
        Even number of options.
    mdp : TabularMDP, optional
        When given (with one state per node), option policies are attached.
    laplacian : {"normalized", "combinatorial"}
    tol : float
        Eigensolver residual tolerance.

    Returns
    -------
    OptionSet
        Its log records lambda2 before and after each insertion, the
        lower-bound increment ``F`` (``None`` when lambda2 is repeated) and the
        multiplicity of lambda2.

    Raises
    ------
    Disconnected
    CompleteGraph
        When no non-edge is left to insert.
    """
    _check_k(k)
    g.require_connected()
    base, lam_prev = _baseline_row(g, laplacian, tol)
    log = [base]
    options = []
    cur = g
    for it in range(1, k // 2 + 1):
        if cur.edge_count == cur.n * (cur.n - 1) // 2:
            raise CompleteGraph()
        spec = smallest_eigenpairs(cur, min(3, cur.n), tol=tol, laplacian=laplacian)
        v = spec.fiedler_vector
        lam2 = spec.eigenvalues[1]
        lam3 = spec.eigenvalues[2] if spec.k > 2 else math.inf
        i, j = _extremes(v)
        fallback = cur.has_edge(i, j) or i == j
        if fallback:
            i, j = _best_non_edge(cur, v)
        multiplicity = 2 if lam3 - lam2 < DEGENERACY_GAP else 1
        inc = None if multiplicity > 1 else float(theorem2_increment(lam2, lam3, v[i], v[j]))
        cur = cur.with_edges([(i, j)])
        lam_after = smallest_eigenpairs(cur, 2, tol=tol, laplacian=laplacian).algebraic_connectivity
        log.append(_log_row(**{
            "iteration": it, "node_i": i, "node_j": j, "v_i": float(v[i]), "v_j": float(v[j]),
            "lambda2_before": float(lam2), "lambda3_before": float(lam3),
            "lambda2_after": float(lam_after), "increment_F": inc,
            "multiplicity": multiplicity, "fallback": fallback,
        }))
        options += [PointOption(i, j), PointOption(j, i)]
    out = OptionSet(options, "covering", laplacian, log, g)
    return out.with_policies(mdp) if mdp is not None else out


def eigenoptions_point(g: Graph, k: int, mdp=None, laplacian: str = "normalized",
                       tol: float = 1e-8) -> OptionSet:
    """Point-option eigenoptions from eigenvectors ``2 .. k/2 + 1`` of ``g``.

    The spectrum is computed once; option edges do not feed back into it.
    Log rows carry the lambda2 of the graph augmented with every pair so far.
    """
    _check_k(k)
    g.require_connected()
    base, _ = _baseline_row(g, laplacian, tol)
    log = [base]
    options = []
    if k == 0:
        return OptionSet([], "eigen", laplacian, log, g)
    m = k // 2
    if m + 1 > g.n:
        raise ValueError(f"{k} eigenoptions need at least {m + 1} nodes")
    spec = smallest_eigenpairs(g, m + 1, tol=tol, laplacian=laplacian)
    cur = g
    for it in range(1, m + 1):
        v = spec.eigenvectors[:, it]
        i, j = _extremes(v)
        cur = cur.with_edges([(i, j)])
        lam_after = smallest_eigenpairs(cur, 2, tol=tol, laplacian=laplacian).algebraic_connectivity
        log.append(_log_row(**{
            "iteration": it, "node_i": i, "node_j": j, "v_i": float(v[i]), "v_j": float(v[j]),
            "lambda2_before": float(spec.eigenvalues[it]), "lambda3_before": None,
            "lambda2_after": float(lam_after), "increment_F": None,
            "multiplicity": None, "fallback": False,
        }))
        options += [PointOption(i, j), PointOption(j, i)]
    out = OptionSet(options, "eigen", laplacian, log, g)
    return out.with_policies(mdp) if mdp is not None else out


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Exact shortest-path betweenness by Brandes accumulation (undirected, unnormalized)."""
    n = g.n
    bc = np.zeros(n)
    for s in range(n):
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        order = []
        preds = [[] for _ in range(n)]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in g.neighbors(u):
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
                if dist[w] == dist[u] + 1:
                    sigma[w] += sigma[u]
                    preds[w].append(u)
        delta = np.zeros(n)
        for w in reversed(order):
            for u in preds[w]:
                delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc / 2.0


def betweenness_options(g: Graph, k: int, mdp=None, tol: float = 1e-9) -> OptionSet:
    """One option per betweenness subgoal, from the subgoal's most distant node.

    Subgoals are local maxima of betweenness (no neighbour strictly higher),
    ranked by betweenness with ties to the lower node index.
    """
    if k < 0:
        raise ValueError("option count must be non-negative")
    g.require_connected()
    bc = betweenness_centrality(g)
    local = [u for u in range(g.n)
             if bc[u] > tol and all(bc[u] >= bc[w] - tol for w in g.neighbors(u))]
    local.sort(key=lambda u: (-bc[u], u))
    options, log = [], []
    for it, sub in enumerate(local[:k], start=1):
        dist = g.bfs_distances(sub)
        far = int(np.flatnonzero(dist == dist.max())[0])
        options.append(PointOption(far, sub))
        log.append(_log_row(iteration=it, node_i=far, node_j=sub, v_j=float(bc[sub])))
    out = OptionSet(options, "betweenness", "none", log, g)
    return out.with_policies(mdp) if mdp is not None else out


METHODS = {"covering": covering_options, "eigen": eigenoptions_point,
           "betweenness": betweenness_options}


def discover(method: str, g: Graph, k: int, mdp=None, laplacian: str = "normalized") -> OptionSet:
    """Dispatch to a discovery method by name (``"none"`` gives an empty set)."""
    if method == "none":
        return OptionSet([], method, laplacian, [], g)
    if method not in METHODS:
        raise ValueError(f"unknown discovery method {method!r}")
    if method == "betweenness":
        return betweenness_options(g, k, mdp)
    return METHODS[method](g, k, mdp, laplacian=laplacian)
