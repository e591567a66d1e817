"""Undirected, unweighted state-transition graphs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .exceptions import Disconnected, GraphError


def _canonical_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on nodes ``0 .. n-1``.

    Stored as adjacency lists in CSR form (``indptr``/``indices``) with a
    parallel degree array, so a Laplacian matvec costs O(|E|).

    Use :meth:`from_edges` rather than the constructor.
    """

    node_count: int
    edges: frozenset
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    degree: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if node_count < 1:
            raise GraphError("a graph needs at least one node")
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphError(f"edge ({u}, {v}) out of range for {node_count} nodes")
            canon.add(_canonical_edge(u, v))
        if canon:
            arr = np.array(sorted(canon), dtype=np.int64)
            rows = np.concatenate([arr[:, 0], arr[:, 1]])
            cols = np.concatenate([arr[:, 1], arr[:, 0]])
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        degree = np.bincount(rows, minlength=node_count).astype(np.int64)
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        for a in (indptr, cols, degree):
            a.setflags(write=False)
        return cls(node_count, frozenset(canon), indptr, cols, degree)

    @classmethod
    def from_adjacency(cls, adjacency) -> "Graph":
        """Build from a dense or sparse symmetric 0/1 matrix; the diagonal is ignored."""
        a = sp.coo_matrix(adjacency)
        if a.shape[0] != a.shape[1]:
            raise GraphError(f"adjacency matrix must be square, got {a.shape}")
        mask = (a.row != a.col) & (a.data != 0)
        return cls.from_edges(a.shape[0], zip(a.row[mask], a.col[mask]))

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        return _canonical_edge(int(u), int(v)) in self.edges

    def with_edges(self, new_edges: Iterable[tuple[int, int]]) -> "Graph":
        return Graph.from_edges(self.node_count, list(self.edges) + list(new_edges))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self, dense: bool = False):
        data = np.ones(len(self.indices))
        a = sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
        return a.toarray() if dense else a

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest member."""
        label = np.full(self.n, -1, dtype=np.int64)
        comps = []
        for root in range(self.n):
            if label[root] >= 0:
                continue
            label[root] = len(comps)
            members = [root]
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v in self.neighbors(u):
                    if label[v] < 0:
                        label[v] = len(comps)
                        members.append(int(v))
                        queue.append(v)
            comps.append(sorted(members))
        return comps

    def is_connected(self) -> bool:
        return bool(np.all(self.bfs_distances(0) >= 0))

    def require_connected(self) -> None:
        if self.n > 1 and not self.is_connected():
            raise Disconnected(len(self.components()))

    def bfs_distances(self, source: int) -> np.ndarray:
        """Hop distances from ``source``; unreachable nodes get -1."""
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.neighbors(u):
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def subgraph(self, nodes: Iterable[int]) -> tuple["Graph", np.ndarray]:
        """Induced subgraph and the array mapping its node ids back to ``self``."""
        keep = np.array(sorted(set(int(u) for u in nodes)), dtype=np.int64)
        local = {int(u): i for i, u in enumerate(keep)}
        edges = [(local[u], local[v]) for u, v in self.edges if u in local and v in local]
        return Graph.from_edges(len(keep), edges), keep

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and self.edges == other.edges

    def __hash__(self):
        return hash((self.node_count, self.edges))

    def __repr__(self):
        return f"Graph(n={self.node_count}, m={self.edge_count})"


def graph_from_mdp(mdp) -> Graph:
    """State-transition graph: an edge joins s != s' when some action moves s to s' or back.

    Uses the MDP's transition function as exposed to agents, so terminal states
    are absorbing and contribute only their incoming edges.
    """
    edges = set()
    for s in range(mdp.n_states):
        for t in mdp.successors(s):
            if t != s:
                edges.add(_canonical_edge(s, int(t)))
    return Graph.from_edges(mdp.n_states, edges)


# -- edge-list text format: "n m" header then m lines "u v", 0-based ---------

def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise GraphError("edge list must start with a 'n m' header line")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from None
    if len(edges) != m:
        raise GraphError(f"header announces {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text(encoding="ascii"))


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="ascii")
