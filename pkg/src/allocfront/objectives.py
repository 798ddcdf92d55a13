"""The four objective functions and the solvency chain they build on.

All functions are pure and operate on plain arrays in natural sense
(return and solvency are values to be maximized, volatility and distance
to be minimized). Subgradient conventions at the kinks are fixed so that
solves are deterministic: sign(0) = 0 for absolute values, and the first
argument wins ties in every max{., .}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AssetUniverse, ModelSpec, Objective, PortfolioWeights, SolvencyCalibration

__all__ = [
    "ObjectiveVector",
    "IndefiniteCovarianceError",
    "portfolio_return",
    "return_gradient",
    "portfolio_volatility",
    "volatility_gradient",
    "net_risk",
    "aggregate_risks",
    "aggregate_jacobian",
    "market_risk",
    "market_risk_gradient",
    "constant_risk_adjust",
    "constant_risk_derivative",
    "solvency_ratio",
    "solvency_ratio_gradient",
    "l1_distance",
    "l1_subgradient",
    "evaluate_all",
    "evaluate_batch",
]

RADICAND_TOL = 1e-12


class IndefiniteCovarianceError(ValueError):
    """The portfolio variance came out negative beyond rounding tolerance."""


def _as_array(w) -> np.ndarray:
    if isinstance(w, PortfolioWeights):
        return w.w
    return np.asarray(w, dtype=float)


@dataclass(frozen=True, eq=False)
class ObjectiveVector:
    """Objective values for one portfolio, in canonical order, natural sense."""

    objectives: tuple[Objective, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "objectives", tuple(Objective(o) for o in self.objectives))

    def value(self, objective: Objective) -> float:
        return float(self.values[self.objectives.index(objective)])

    def as_dict(self) -> dict[str, float]:
        return {o.value: float(v) for o, v in zip(self.objectives, self.values)}


def portfolio_return(w, universe: AssetUniverse) -> float:
    """Expected annual portfolio return, sum_i w_i mu_i."""
    return float(_as_array(w) @ universe.mu)


def return_gradient(universe: AssetUniverse) -> np.ndarray:
    return universe.mu.copy()


def _clamped_sqrt(radicand: float, context: str) -> float:
    if radicand < -RADICAND_TOL:
        raise IndefiniteCovarianceError(f"{context}: negative radicand {radicand:.3e}")
    return float(np.sqrt(max(radicand, 0.0)))


def portfolio_volatility(w, universe: AssetUniverse) -> float:
    """Portfolio volatility sqrt(w' Sigma w); tiny negative radicands clamp to 0."""
    w = _as_array(w)
    radicand = float(w @ universe.covariance() @ w)
    return _clamped_sqrt(radicand, "portfolio variance")


def volatility_gradient(w, universe: AssetUniverse) -> np.ndarray:
    """Gradient Sigma w / sigma(w); the zero vector where sigma vanishes."""
    w = _as_array(w)
    cov_w = universe.covariance() @ w
    vol = _clamped_sqrt(float(w @ cov_w), "portfolio variance")
    if vol < 1e-12:
        return np.zeros_like(w)
    return cov_w / vol


def net_risk(w, cal: SolvencyCalibration) -> np.ndarray:
    """Net-risk vector A w + b, ordered as in RISK_TYPES."""
    w = _as_array(w)
    if cal.A.shape[1] != w.shape[0]:
        raise ValueError(f"calibration expects {cal.A.shape[1]} assets, got {w.shape[0]}")
    return cal.A @ w + cal.b


def aggregate_risks(x) -> np.ndarray:
    """Collapse the 8 net risks into 5 aggregated components.

    (max{x1,x2}, sqrt(x3^2 + 1.5 x3 x4 + x4^2), x5, x6, max{x7,x8});
    the equity radicand equals (x3+x4)^2 - 0.5 x3 x4 and is non-negative,
    tiny negatives from rounding clamp to 0.
    """
    x = np.asarray(x, dtype=float)
    equity = max(x[2] * x[2] + 1.5 * x[2] * x[3] + x[3] * x[3], 0.0)
    return np.array(
        [
            x[0] if x[0] >= x[1] else x[1],
            float(np.sqrt(equity)),
            x[4],
            x[5],
            x[6] if x[6] >= x[7] else x[7],
        ]
    )


def aggregate_jacobian(x) -> np.ndarray:
    """5x8 Jacobian of aggregate_risks; first argument wins ties in max."""
    x = np.asarray(x, dtype=float)
    jac = np.zeros((5, 8))
    jac[0, 0 if x[0] >= x[1] else 1] = 1.0
    r = float(np.sqrt(max(x[2] * x[2] + 1.5 * x[2] * x[3] + x[3] * x[3], 0.0)))
    if r > 1e-12:
        jac[1, 2] = (2.0 * x[2] + 1.5 * x[3]) / (2.0 * r)
        jac[1, 3] = (2.0 * x[3] + 1.5 * x[2]) / (2.0 * r)
    jac[2, 4] = 1.0
    jac[3, 5] = 1.0
    jac[4, 6 if x[6] >= x[7] else 7] = 1.0
    return jac


def market_risk(x, cal: SolvencyCalibration) -> float:
    """sqrt(max of the two scenario quadratic forms + c1^2), always >= c1."""
    x = np.asarray(x, dtype=float)
    q0 = float(x @ cal.P0 @ x)
    qh = float(x @ cal.Phalf @ x)
    q = max(q0 if q0 >= qh else qh, 0.0)
    return float(np.sqrt(q + cal.c1 * cal.c1))


def market_risk_gradient(x, cal: SolvencyCalibration) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    q0 = float(x @ cal.P0 @ x)
    qh = float(x @ cal.Phalf @ x)
    active = cal.P0 if q0 >= qh else cal.Phalf
    value = float(np.sqrt(max(q0 if q0 >= qh else qh, 0.0) + cal.c1 * cal.c1))
    if value < 1e-12:
        return np.zeros_like(x)
    return (active @ x) / value


def constant_risk_adjust(x: float, cal: SolvencyCalibration) -> float:
    """Fold the weight-independent risks into the ratio: c2 sqrt(x^2 + c3 x + c4) + c5."""
    x = float(x)
    return cal.c2 * float(np.sqrt(x * x + cal.c3 * x + cal.c4)) + cal.c5


def constant_risk_derivative(x: float, cal: SolvencyCalibration) -> float:
    x = float(x)
    root = float(np.sqrt(x * x + cal.c3 * x + cal.c4))
    if root < 1e-300:
        return 0.0
    return cal.c2 * (2.0 * x + cal.c3) / (2.0 * root)


def solvency_ratio(w, cal: SolvencyCalibration) -> float:
    """The composed solvency objective; exactly the four-stage chain."""
    return constant_risk_adjust(market_risk(aggregate_risks(net_risk(w, cal)), cal), cal)


def solvency_ratio_gradient(w, cal: SolvencyCalibration) -> np.ndarray:
    x8 = net_risk(w, cal)
    x5 = aggregate_risks(x8)
    m = market_risk(x5, cal)
    outer = constant_risk_derivative(m, cal)
    grad5 = market_risk_gradient(x5, cal)
    grad8 = aggregate_jacobian(x8).T @ grad5
    return outer * (cal.A.T @ grad8)


def l1_distance(w, reference) -> float:
    """Turnover proxy: l1 distance between two weight vectors, in [0, 2]."""
    return float(np.abs(_as_array(w) - _as_array(reference)).sum())


def l1_subgradient(w, reference) -> np.ndarray:
    """sign(w - reference) with 0 at the kink."""
    return np.sign(_as_array(w) - _as_array(reference))


def evaluate_all(w, spec: ModelSpec) -> ObjectiveVector:
    """All active objective values for one portfolio, natural sense."""
    w = _as_array(w)
    values = []
    for objective in spec.active_objectives:
        if objective is Objective.RETURN:
            values.append(portfolio_return(w, spec.universe))
        elif objective is Objective.VOLATILITY:
            values.append(portfolio_volatility(w, spec.universe))
        elif objective is Objective.SOLVENCY:
            if spec.solvency is None:
                raise ValueError("solvency objective active but no calibration provided")
            values.append(solvency_ratio(w, spec.solvency))
        else:
            values.append(l1_distance(w, spec.reference.w))
    return ObjectiveVector(spec.active_objectives, np.array(values))


def evaluate_batch(W: np.ndarray, spec: ModelSpec) -> np.ndarray:
    """Active objective values for each row of W, shape (k, m). Vectorized."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[1] != spec.n:
        raise ValueError(f"expected weights of shape (k, {spec.n}), got {W.shape}")
    cols = []
    for objective in spec.active_objectives:
        if objective is Objective.RETURN:
            cols.append(W @ spec.universe.mu)
        elif objective is Objective.VOLATILITY:
            quad = np.einsum("ki,ij,kj->k", W, spec.universe.covariance(), W)
            cols.append(np.sqrt(np.clip(quad, 0.0, None)))
        elif objective is Objective.SOLVENCY:
            cal = spec.solvency
            if cal is None:
                raise ValueError("solvency objective active but no calibration provided")
            x = W @ cal.A.T + cal.b  # (k, 8)
            equity = np.sqrt(
                np.clip(x[:, 2] ** 2 + 1.5 * x[:, 2] * x[:, 3] + x[:, 3] ** 2, 0.0, None)
            )
            agg = np.column_stack(
                [np.maximum(x[:, 0], x[:, 1]), equity, x[:, 4], x[:, 5], np.maximum(x[:, 6], x[:, 7])]
            )
            q0 = np.einsum("ki,ij,kj->k", agg, cal.P0, agg)
            qh = np.einsum("ki,ij,kj->k", agg, cal.Phalf, agg)
            m = np.sqrt(np.clip(np.maximum(q0, qh), 0.0, None) + cal.c1 * cal.c1)
            cols.append(cal.c2 * np.sqrt(m * m + cal.c3 * m + cal.c4) + cal.c5)
        else:
            cols.append(np.abs(W - spec.reference.w).sum(axis=1))
    return np.column_stack(cols)
