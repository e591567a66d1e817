import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covopt.exceptions import Disconnected
from covopt.graph import Graph, graph_from_mdp
from covopt.envs import load_grid
from covopt.spectral import algebraic_connectivity, smallest_eigenpairs, spectral_drawing

from oracles import dense_laplacian, jacobi_eigenvalues, random_connected_edges


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


@pytest.mark.parametrize("kind", ["normalized", "combinatorial"])
@pytest.mark.parametrize("seed", range(10))
def test_eigenvalues_match_jacobi(kind, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 13))
    edges = random_connected_edges(n, rng, 0.3)
    ref, _ = jacobi_eigenvalues(dense_laplacian(n, edges, kind))
    k = min(4, n)
    spec = smallest_eigenpairs(Graph.from_edges(n, edges), k, laplacian=kind)
    assert np.allclose(spec.eigenvalues, ref[:k], atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 14), st.integers(0, 2 ** 32 - 1), st.sampled_from(["normalized", "combinatorial"]))
def test_residuals_and_orthonormality(n, seed, kind):
    edges = random_connected_edges(n, np.random.default_rng(seed), 0.25)
    g = Graph.from_edges(n, edges)
    spec = smallest_eigenpairs(g, 3, laplacian=kind, tol=1e-9)
    lap = dense_laplacian(n, edges, kind)
    v = spec.eigenvectors
    assert np.allclose(v.T @ v, np.eye(3), atol=1e-8)
    assert np.abs(lap @ v - v * spec.eigenvalues).max() <= 1e-8
    assert spec.eigenvalues[0] == 0.0
    assert np.all(np.diff(spec.eigenvalues) >= -1e-12)


def test_closed_forms():
    # combinatorial: path 2(1 - cos(pi/n)), cycle 2(1 - cos(2 pi/n)), complete n
    assert algebraic_connectivity(path(7), "combinatorial") == pytest.approx(2 * (1 - math.cos(math.pi / 7)), abs=1e-9)
    assert algebraic_connectivity(cycle(8), "combinatorial") == pytest.approx(2 * (1 - math.cos(2 * math.pi / 8)), abs=1e-9)
    assert algebraic_connectivity(complete(5), "combinatorial") == pytest.approx(5.0, abs=1e-9)
    # normalized: complete n/(n-1), cycle 1 - cos(2 pi/n)
    assert algebraic_connectivity(complete(5)) == pytest.approx(5 / 4, abs=1e-9)
    assert algebraic_connectivity(cycle(8)) == pytest.approx(1 - math.cos(2 * math.pi / 8), abs=1e-9)


def test_grid9x9_values():
    g = graph_from_mdp(load_grid("grid9x9"))
    # Cartesian product of paths P9 x P9 shares lambda2 with P9
    assert algebraic_connectivity(g, "combinatorial") == pytest.approx(2 * (1 - math.cos(math.pi / 9)), abs=1e-8)
    ref, _ = jacobi_eigenvalues(dense_laplacian(g.n, g.sorted_edges()), tol=1e-12)
    assert algebraic_connectivity(g) == pytest.approx(ref[1], abs=1e-6)
    assert algebraic_connectivity(g) == pytest.approx(0.0359, abs=1e-4)


def test_degenerate_basis_is_canonical_and_seed_independent():
    g = graph_from_mdp(load_grid("grid9x9"))
    a = smallest_eigenpairs(g, 3, seed=0)
    b = smallest_eigenpairs(g, 3, seed=123)
    assert a.lambda2_is_degenerate()
    assert np.allclose(a.eigenvectors, b.eigenvectors, atol=1e-6)


def test_sign_convention():
    spec = smallest_eigenpairs(path(6), 3)
    for i in range(3):
        v = spec.eigenvectors[:, i]
        big = np.flatnonzero(np.abs(v) >= np.abs(v).max() - 1e-7)[0]
        assert v[big] > 0


def test_disconnected_raises():
    with pytest.raises(Disconnected):
        smallest_eigenpairs(Graph.from_edges(4, [(0, 1), (2, 3)]), 2)


def test_spectral_drawing_shape():
    xy = spectral_drawing(cycle(10))
    assert xy.shape == (10, 2)
