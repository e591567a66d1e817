"""Graph Laplacians and a matvec-only solver for their smallest eigenpairs.

The solver is a Chebyshev-filtered block subspace iteration with
Rayleigh-Ritz projection.  The known bottom eigenvector (``sqrt(d)`` for the
normalized Laplacian, the constant vector for the combinatorial one) is
deflated explicitly, so only the next ``k - 1`` pairs are iterated on.

Repeated eigenvalues are common on symmetric state spaces (the square grid
has a doubly degenerate Fiedler value).  Any orthonormal basis of such an
eigenspace is a valid answer, so the solver replaces it by a canonical one
that depends only on the subspace: the orthonormalized projections of the
unit vectors ``e_0, e_1, ...`` onto it.  Downstream option discovery is then
deterministic regardless of the random start block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import GraphError, IsolatedNode, NoConvergence
from .graph import Graph

LAPLACIANS = ("normalized", "combinatorial")

# Eigenvalues closer than this are treated as one repeated eigenvalue.
DEGENERACY_GAP = 1e-9
# Vector entries closer than this are ties; ties go to the lowest node index.
TIE_TOL = 1e-7


def normalized_laplacian(g: Graph) -> sp.csr_matrix:
    """``I - D^{-1/2} A D^{-1/2}`` as a sparse symmetric matrix."""
    isolated = np.flatnonzero(g.degree == 0)
    if len(isolated):
        raise IsolatedNode(int(isolated[0]))
    a = g.adjacency()
    s = sp.diags(1.0 / np.sqrt(g.degree))
    return (sp.identity(g.n, format="csr") - s @ a @ s).tocsr()


def combinatorial_laplacian(g: Graph) -> sp.csr_matrix:
    """``D - A``."""
    return (sp.diags(g.degree.astype(float)) - g.adjacency()).tocsr()


def laplacian_matrix(g: Graph, kind: str = "normalized") -> sp.csr_matrix:
    _check_kind(kind)
    return normalized_laplacian(g) if kind == "normalized" else combinatorial_laplacian(g)


def null_vector(g: Graph, kind: str = "normalized") -> np.ndarray:
    """Unit eigenvector for eigenvalue 0 of a connected graph's Laplacian."""
    _check_kind(kind)
    v = np.sqrt(g.degree.astype(float)) if kind == "normalized" else np.ones(g.n)
    return v / np.linalg.norm(v)


def spectral_radius_bound(g: Graph, kind: str = "normalized") -> float:
    _check_kind(kind)
    return 2.0 if kind == "normalized" else 2.0 * float(g.degree.max())


def _check_kind(kind):
    if kind not in LAPLACIANS:
        raise ValueError(f"laplacian must be one of {LAPLACIANS}, got {kind!r}")


@dataclass(frozen=True)
class Spectrum:
    """The ``k`` smallest eigenpairs of a graph Laplacian.

    Attributes
    ----------
    eigenvalues : ndarray of shape (k,)
        Ascending.
    eigenvectors : ndarray of shape (n, k)
        Unit-norm columns matching ``eigenvalues``.
    tolerance : float
        Largest residual ``||L v - lambda v||`` over the returned pairs.
    laplacian : str
        Which Laplacian the pairs belong to.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    tolerance: float
    laplacian: str = "normalized"

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def algebraic_connectivity(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def fiedler_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 1]

    def lambda2_is_degenerate(self, gap: float = DEGENERACY_GAP) -> bool:
        """True when lambda2 == lambda3 within ``gap``; needs ``k >= 3``."""
        if self.k < 3:
            raise ValueError("need at least 3 eigenpairs to test the multiplicity of lambda2")
        return bool(self.eigenvalues[2] - self.eigenvalues[1] < gap)


def _clusters(values, gap):
    out, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] >= gap:
            out.append((start, i))
            start = i
    return out


def canonical_basis(block: np.ndarray) -> np.ndarray:
    """Canonical orthonormal basis of ``span(block)`` (columns assumed orthonormal)."""
    n, m = block.shape
    if m == 1:
        return block.copy()
    chosen = []
    for e in range(n):
        x = block @ block[e]
        for c in chosen:
            x -= c * (c @ x)
        norm = np.linalg.norm(x)
        if norm > 1e-6:
            chosen.append(x / norm)
            if len(chosen) == m:
                break
    return np.column_stack(chosen)


def fix_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its largest-magnitude entry is positive (lowest index on ties)."""
    mag = np.abs(v)
    idx = int(np.flatnonzero(mag >= mag.max() - TIE_TOL)[0])
    return -v if v[idx] < 0 else v


def _deflate(x, u):
    return x - np.outer(u, u @ x)


def _rayleigh_ritz(lap, x, u):
    q, _ = np.linalg.qr(_deflate(x, u))
    h = q.T @ (lap @ q)
    theta, w = np.linalg.eigh((h + h.T) / 2)
    return theta, q @ w


def _chebyshev_filter(lap, x, degree, low, high, u):
    """Damp the spectrum inside [low, high], amplify below ``low``."""
    e = (high - low) / 2.0
    c = (high + low) / 2.0
    y_prev = x
    y = (lap @ x - c * x) / e
    for _ in range(1, degree):
        y_next = 2.0 * (lap @ y - c * y) / e - y_prev
        y_prev, y = y, _deflate(y_next, u)
    return y


def smallest_eigenpairs(
    g: Graph,
    k: int,
    tol: float = 1e-8,
    laplacian: str = "normalized",
    max_iter: int | None = None,
    seed: int = 0,
) -> Spectrum:
    """Compute the ``k`` smallest eigenpairs of the graph's Laplacian.

    Parameters
    ----------
    g : Graph
        Connected graph.
    k : int
        Number of pairs, ``2 <= k <= n``.
    tol : float
        Residual bound for every returned pair.
    laplacian : {"normalized", "combinatorial"}
    max_iter : int, optional
        Outer iteration cap, default ``10 * n * k``.
    seed : int
        Seed for the random start block.  Results do not depend on it beyond
        rounding, because degenerate eigenspaces are canonicalized.

    Raises
    ------
    Disconnected
        If ``g`` has more than one component.
    NoConvergence
        If the residuals stay above ``tol`` after ``max_iter`` iterations.
    """
    _check_kind(laplacian)
    n = g.n
    if not 2 <= k <= n:
        raise GraphError(f"need 2 <= k <= n, got k={k}, n={n}")
    g.require_connected()
    lap = laplacian_matrix(g, laplacian)
    u = null_vector(g, laplacian)
    high = spectral_radius_bound(g, laplacian)
    if max_iter is None:
        max_iter = 10 * n * k

    m = k - 1
    p = min(n - 1, max(2 * m, m + 8))
    rng = np.random.default_rng(seed)
    theta, x = _rayleigh_ritz(lap, rng.standard_normal((n, p)), u)

    residual = np.inf
    for it in range(max_iter + 1):
        want = m
        while want < p and theta[want] - theta[want - 1] < 1e-6:
            want += 1
        r = lap @ x[:, :want] - x[:, :want] * theta[:want]
        residual = float(np.linalg.norm(r, axis=0).max())
        if residual <= tol:
            break
        if it == max_iter:
            raise NoConvergence(it, residual)
        low = theta[-1]
        if high - low < 1e-12:
            low = high - 1e-3 * high
        x0 = (high + low) / (high - low)
        degree = int(np.clip(np.arccosh(1e6) / np.arccosh(max(x0, 1.0 + 1e-12)), 1, 30))
        x = _chebyshev_filter(lap, x, degree, low, high, u)
        theta, x = _rayleigh_ritz(lap, x, u)

    vals = np.concatenate([[0.0], theta[:want]])
    vecs = np.column_stack([u, x[:, :want]])
    for a, b in _clusters(vals, DEGENERACY_GAP):
        if b - a > 1:
            vecs[:, a:b] = canonical_basis(vecs[:, a:b])
    vecs = np.column_stack([fix_sign(vecs[:, i]) for i in range(vecs.shape[1])])
    vals, vecs = vals[:k], vecs[:, :k]
    achieved = float(np.linalg.norm(lap @ vecs - vecs * vals, axis=0).max())
    return Spectrum(vals, vecs, achieved, laplacian)


def algebraic_connectivity(g: Graph, laplacian: str = "normalized", tol: float = 1e-8) -> float:
    return smallest_eigenpairs(g, 2, tol=tol, laplacian=laplacian).algebraic_connectivity


def spectral_drawing(g: Graph, laplacian: str = "normalized", tol: float = 1e-8) -> np.ndarray:
    """Place node ``u`` at ``(v2[u], v3[u])``; returns an ``(n, 2)`` array."""
    if g.n < 3:
        raise GraphError("spectral drawing needs at least 3 nodes")
    spec = smallest_eigenpairs(g, 3, tol=tol, laplacian=laplacian)
    return spec.eigenvectors[:, 1:3].copy()
