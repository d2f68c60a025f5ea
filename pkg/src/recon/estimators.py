"""Scikit-learn style estimators wrapping the reconstruction pipeline.

``ChainReconstruction.fit(X)`` solves the least-energy cycle problem on a
point cloud and exposes the solved chain, the delloc complex and the quality
report as fitted attributes.  ``MoserTardosPerturbation`` is a stateless
transformer: ``transform(X)`` resamples the cloud until no height/protection
violation remains.  Both follow the ``get_params``/``set_params`` contract, so
they compose with pipelines and grid search.
"""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .complexes import ball_small_simplices
from .delloc import delloc_complex
from .lp import certify_solution, solve_lp
from .perturb import PerturbConfig, moser_tardos
from .pipeline import build_complex, euler_characteristic
from .problem import (
    analytic_normalization,
    assemble_problem,
    extract_solution,
    realistic_normalization,
)
from .validation import check_point_cloud, check_scalar
from .weights import weight_table


class ChainReconstruction(BaseEstimator):
    """Fit a triangulating d-chain to a point cloud.

    Parameters mirror the CLI: the complex scale ``scale_r`` defaults to
    ``epsilon``, the locality scale ``rho`` defaults to ``rho_mult * epsilon``.
    ``manifold`` enables the analytic normalization mode and the delloc sign
    reference; without it the realistic (sample-only) mode is used.

    Attributes after ``fit``: ``chain_`` (raw), ``support_`` (snapped
    simplices), ``result_``, ``complex_``, ``delloc_``, ``certificate_``,
    ``euler_characteristic_``.
    """

    def __init__(self, d=1, epsilon=None, rho=None, rho_mult=16.0, scale_r=None,
                 complex_kind="rips", normalization=None, manifold=None,
                 pca_scale=None, load_radius=None, seed=0):
        self.d = d
        self.epsilon = epsilon
        self.rho = rho
        self.rho_mult = rho_mult
        self.scale_r = scale_r
        self.complex_kind = complex_kind
        self.normalization = normalization
        self.manifold = manifold
        self.pca_scale = pca_scale
        self.load_radius = load_radius
        self.seed = seed

    def fit(self, X, y=None):
        X = check_point_cloud(X, min_points=self.d + 2)
        if self.epsilon is None:
            if self.manifold is None:
                raise ValueError("epsilon is required when no manifold is given")
            from .manifolds import verify_density

            epsilon = verify_density(self.manifold, X).epsilon
        else:
            epsilon = check_scalar(self.epsilon, "epsilon", positive=True)
        rho = self.rho if self.rho is not None else self.rho_mult * epsilon
        scale_r = self.scale_r if self.scale_r is not None else epsilon
        mode = self.normalization or (
            "analytic-m0" if self.manifold is not None else "realistic-p0"
        )

        K = build_complex(X, self.complex_kind, scale_r, self.d)
        weights = weight_table(K.simplex_list(self.d), X)
        if mode == "analytic-m0":
            norm = analytic_normalization(self.manifold, seed=self.seed)
        else:
            norm = realistic_normalization(X, self.d, rho, seed=self.seed,
                                           pca_scale=self.pca_scale,
                                           load_radius=self.load_radius)
        problem = assemble_problem(K, weights, norm, rho, d=self.d)
        solution = solve_lp(problem)
        if not solution.optimal:
            raise RuntimeError(f"LP status {solution.status!r}")
        candidates = ball_small_simplices(X, epsilon, self.d)
        delloc = delloc_complex(X, rho, self.d, candidates=candidates)
        result = extract_solution(solution, problem, delloc=delloc, cloud=X,
                                  manifold=self.manifold, weights=weights,
                                  pca_scale=self.pca_scale)
        self.epsilon_ = epsilon
        self.rho_ = rho
        self.complex_ = K
        self.weights_ = weights
        self.problem_ = problem
        self.solution_ = solution
        self.delloc_ = delloc
        self.result_ = result
        self.chain_ = result.chain
        self.support_ = sorted(result.rounded_chain.support)
        self.certificate_ = certify_solution(problem, solution)
        self.euler_characteristic_ = euler_characteristic(result.rounded_chain)
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("call fit first")

    def score(self, X=None, y=None):
        """Negative chain energy (higher is better), for model selection."""
        self._check_fitted()
        return -self.result_.energy


class MoserTardosPerturbation(TransformerMixin, BaseEstimator):
    """Resample points in estimated tangent disks until no bad event remains.

    Stateless by design: ``transform`` runs the (seeded, deterministic)
    perturbation on the given cloud.  The most recent run's trace is kept in
    ``rounds_`` and ``status_``.
    """

    def __init__(self, d=2, rho=1.0, r_pert=0.1, height_min=0.01, prot_min=1e-4,
                 max_rounds=50, schedule="worst", seed=0):
        self.d = d
        self.rho = rho
        self.r_pert = r_pert
        self.height_min = height_min
        self.prot_min = prot_min
        self.max_rounds = max_rounds
        self.schedule = schedule
        self.seed = seed

    def _config(self):
        return PerturbConfig(
            dim=self.d, rho=self.rho, r_pert=self.r_pert,
            height_min=self.height_min, prot_min=self.prot_min,
            max_rounds=self.max_rounds, seed=self.seed, schedule=self.schedule,
        )

    def fit(self, X, y=None):
        check_point_cloud(X, min_points=self.d + 1)
        return self

    def transform(self, X):
        X = check_point_cloud(X, min_points=self.d + 1)
        result = moser_tardos(X, self._config())
        self.status_ = result.status
        self.rounds_ = result.rounds
        return result.points
