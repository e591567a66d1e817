"""scikit-learn style wrappers around the functional API.

Every estimator takes a graph-like ``X`` (a :class:`~covopt.graph.Graph`, a
TabularMDP, or a symmetric 0/1 adjacency matrix) in :meth:`fit`; ``y`` is
ignored.  Learned state lives in trailing-underscore attributes.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cover_time import RandomWalk, estimate_cover_time
from .options import betweenness_options, covering_options, eigenoptions_point
from .spectral import algebraic_connectivity, spectral_drawing
from .validation import check_graph, check_laplacian, check_option_count, check_positive_int


class _OptionDiscovery(TransformerMixin, BaseEstimator):
    """Shared fit/transform; ``transform`` returns the augmented adjacency."""

    def _discover(self, g, mdp):
        raise NotImplementedError

    def fit(self, X, y=None):
        g = check_graph(X)
        mdp = X if hasattr(X, "n_states") else None
        self.option_set_ = self._discover(g, mdp)
        self.options_ = list(self.option_set_.options)
        self.discovery_log_ = list(self.option_set_.discovery_log)
        self.augmented_graph_ = self.option_set_.augmented_graph
        self.n_nodes_ = g.n
        self.algebraic_connectivity_ = algebraic_connectivity(
            self.augmented_graph_, laplacian=getattr(self, "laplacian", "normalized"))
        return self

    def transform(self, X):
        """Sparse adjacency of the fitted graph plus one edge per option pair."""
        check_is_fitted(self, "augmented_graph_")
        if check_graph(X, require_connected=False).n != self.n_nodes_:
            raise ValueError("X has a different node count than the fitted graph")
        return self.augmented_graph_.adjacency()


class CoveringOptions(_OptionDiscovery):
    """Covering options as an estimator.

    Parameters
    ----------
    n_options : int, default=8
        Even number of options (two per inserted edge).
    laplacian : {"normalized", "combinatorial"}, default="normalized"
    tol : float, default=1e-8

    Attributes
    ----------
    options_ : list of PointOption
    discovery_log_ : list of dict
    augmented_graph_ : Graph
    algebraic_connectivity_ : float
        lambda2 of ``augmented_graph_``.
    """

    def __init__(self, n_options=8, laplacian="normalized", tol=1e-8):
        self.n_options = n_options
        self.laplacian = laplacian
        self.tol = tol

    def _discover(self, g, mdp):
        k = check_option_count(self.n_options)
        return covering_options(g, k, mdp, laplacian=check_laplacian(self.laplacian), tol=self.tol)


class EigenOptions(_OptionDiscovery):
    """Point-option eigenoptions; parameters as :class:`CoveringOptions`."""

    def __init__(self, n_options=8, laplacian="normalized", tol=1e-8):
        self.n_options = n_options
        self.laplacian = laplacian
        self.tol = tol

    def _discover(self, g, mdp):
        k = check_option_count(self.n_options)
        return eigenoptions_point(g, k, mdp, laplacian=check_laplacian(self.laplacian), tol=self.tol)


class BetweennessOptions(_OptionDiscovery):
    """One option per betweenness subgoal."""

    def __init__(self, n_options=4):
        self.n_options = n_options

    def _discover(self, g, mdp):
        return betweenness_options(g, check_option_count(self.n_options, even=False), mdp)


class SpectralDrawing(TransformerMixin, BaseEstimator):
    """Node coordinates ``(v2[u], v3[u])``.

    Attributes
    ----------
    embedding_ : ndarray of shape (n_nodes, 2)
    """

    def __init__(self, laplacian="normalized", tol=1e-8):
        self.laplacian = laplacian
        self.tol = tol

    def fit(self, X, y=None):
        g = check_graph(X)
        self.embedding_ = spectral_drawing(g, check_laplacian(self.laplacian), self.tol)
        return self

    def transform(self, X):
        check_is_fitted(self, "embedding_")
        return self.embedding_

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).embedding_


class CoverTimeEstimator(BaseEstimator):
    """Monte-Carlo cover time of the uniform random walk.

    For a TabularMDP the walk picks primitive actions uniformly (plus any
    ``options``), otherwise it moves to a uniform neighbour.

    Parameters
    ----------
    trajectories_per_start : int, default=10000
    seed : int, default=0
    metric : {"hitting", "max", "mean"}, default="hitting"
        ``"hitting"`` averages the per-start maximum first-visit time over
        starts; ``"max"`` and ``"mean"`` aggregate visit-all cover times.
    options : sequence of PointOption, optional

    Attributes
    ----------
    estimate_ : CoverTimeEstimate
    cover_time_ : float
    cover_time_stderr_ : float
    """

    def __init__(self, trajectories_per_start=10_000, seed=0, metric="hitting", options=None):
        self.trajectories_per_start = trajectories_per_start
        self.seed = seed
        self.metric = metric
        self.options = options

    def fit(self, X, y=None):
        m = check_positive_int(self.trajectories_per_start, "trajectories_per_start")
        if self.metric not in ("hitting", "max", "mean"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if hasattr(X, "n_states"):
            walk = RandomWalk.from_mdp(X, self.options or ())
        else:
            walk = RandomWalk.from_graph(check_graph(X).with_edges(_option_edges(self.options)))
        est = estimate_cover_time(walk, m, seed=self.seed)
        self.estimate_ = est
        self.cover_time_, self.cover_time_stderr_ = {
            "hitting": (est.hitting_cover_time, est.hitting_cover_time_stderr),
            "max": (est.max_over_starts, est.max_over_starts_stderr),
            "mean": (est.mean_over_starts, est.mean_over_starts_stderr),
        }[self.metric]
        return self

    def score(self, X=None, y=None):
        """Negative cover time, so that larger is better."""
        check_is_fitted(self, "cover_time_")
        return -self.cover_time_


def _option_edges(options):
    return [(o.initiation, o.termination) for o in options or ()]


__all__ = ["BetweennessOptions", "CoverTimeEstimator", "CoveringOptions", "EigenOptions",
           "SpectralDrawing"]
