"""sklearn-style facade so the engine composes with the wider ecosystem."""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from .engine import RepresentationArchive, RunConfig, run
from .model import ModelSpec, validate_model
from .objectives import evaluate_batch
from .solver import SolverConfig


def _check_model(model: ModelSpec) -> ModelSpec:
    if not isinstance(model, ModelSpec):
        raise TypeError(f"expected a ModelSpec, got {type(model).__name__}")
    violations = validate_model(model)
    if violations:
        raise ValueError("invalid model: " + "; ".join(str(v) for v in violations))
    return model


class ObjectiveEvaluator(TransformerMixin, BaseEstimator):
    """Maps portfolio weight rows to their active objective values.

    ``transform(X)`` with X of shape (k, n_assets) returns a (k, m) array of
    natural-sense objective values, columns in canonical objective order.
    """

    def __init__(self, model: Optional[ModelSpec] = None):
        self.model = model

    def fit(self, X=None, y=None):
        self.model_ = _check_model(self.model)
        self.n_features_in_ = self.model_.n
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            self.fit()
        X = check_array(X, dtype=float, ensure_2d=True)
        if X.shape[1] != self.model_.n:
            raise ValueError(f"X has {X.shape[1]} columns, model has {self.model_.n} assets")
        sums = X.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-6) or np.any(X < -1e-9):
            raise ValueError("rows of X must be simplex points (non-negative, summing to 1)")
        return evaluate_batch(X, self.model_)

    def get_feature_names_out(self, input_features=None):
        if not hasattr(self, "model_"):
            self.fit()
        return np.array([o.value for o in self.model_.active_objectives])


class BoxFrontExplorer(BaseEstimator):
    """Fits a well-spread Pareto-front representation to an allocation model.

    Parameters mirror the run configuration; ``fit(model)`` executes the
    payoff table plus the box-refinement loop and exposes the results as
    fitted attributes (``archive_``, ``records_``, ``front_``).
    """

    def __init__(
        self,
        maxit: int = 10,
        seed: int = 0,
        multistart: int = 8,
        tol_feas: float = 1e-8,
        tol_opt: float = 1e-6,
        max_evals: int = 5000,
        min_edge_floor: float = 1e-6,
        lift_l1: bool = False,
    ):
        self.maxit = maxit
        self.seed = seed
        self.multistart = multistart
        self.tol_feas = tol_feas
        self.tol_opt = tol_opt
        self.max_evals = max_evals
        self.min_edge_floor = min_edge_floor
        self.lift_l1 = lift_l1

    def _run_config(self) -> RunConfig:
        return RunConfig(
            maxit=self.maxit,
            solver=SolverConfig(
                tol_feas=self.tol_feas,
                tol_opt=self.tol_opt,
                max_evals=self.max_evals,
                multistart_count=self.multistart,
                seed=self.seed,
                lift_l1=self.lift_l1,
            ),
            min_edge_floor=self.min_edge_floor,
        )

    def fit(self, X: ModelSpec, y=None) -> "BoxFrontExplorer":
        model = _check_model(X)
        archive: RepresentationArchive = run(model, self._run_config())
        self.archive_ = archive
        self.records_ = list(archive.records)
        self.objectives_ = archive.objectives
        self.initial_lower_ = archive.initial_lower.copy()
        self.initial_upper_ = archive.initial_upper.copy()
        # natural-sense objective values, one row per archived portfolio
        self.front_ = np.vstack([r.values.values for r in archive.records])
        self.weights_ = np.vstack([r.weights for r in archive.records])
        return self

    def fit_predict(self, X: ModelSpec, y=None) -> np.ndarray:
        return self.fit(X).front_
