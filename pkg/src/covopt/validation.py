"""Input coercion shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .exceptions import GraphError
from .graph import Graph, graph_from_mdp
from .spectral import LAPLACIANS


def check_graph(X, require_connected: bool = True) -> Graph:
    """Coerce ``X`` to a :class:`Graph`.

    Accepts a Graph, a TabularMDP (its state-transition graph), or a square
    symmetric 0/1 adjacency matrix, dense or sparse.
    """
    if isinstance(X, Graph):
        g = X
    elif hasattr(X, "n_states") and hasattr(X, "successors"):
        g = graph_from_mdp(X)
    else:
        a = sp.csr_matrix(X) if sp.issparse(X) else sp.csr_matrix(np.asarray(X, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError(f"adjacency matrix must be square, got shape {a.shape}")
        if a.shape[0] == 0:
            raise GraphError("adjacency matrix is empty")
        if a.nnz and abs(a - a.T).max() > 0:
            raise GraphError("adjacency matrix must be symmetric")
        if a.nnz and not np.all(np.isin(a.data, (0.0, 1.0))):
            raise GraphError("adjacency entries must be 0 or 1")
        g = Graph.from_adjacency(a)
    if require_connected:
        g.require_connected()
    return g


def check_option_count(k, even: bool = True) -> int:
    if not isinstance(k, numbers.Integral) or isinstance(k, bool):
        raise TypeError(f"option count must be an integer, got {type(k).__name__}")
    if k < 0 or (even and k % 2):
        raise ValueError(f"option count must be {'even and ' if even else ''}non-negative, got {k}")
    return int(k)


def check_laplacian(kind: str) -> str:
    if kind not in LAPLACIANS:
        raise ValueError(f"laplacian must be one of {LAPLACIANS}, got {kind!r}")
    return kind


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
