"""Internal minimize-sense view of a model.

Everything downstream of this module (scalarizations, solver, box search)
works on minimize-converted objectives; maximized objectives are negated
here, exactly once, and un-negated when results are reported. The feasible
set is the simplex plus group bounds plus any hard objective bounds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import objectives as obj
from .model import ModelSpec, Objective

__all__ = [
    "InternalObjective",
    "SmoothConstraint",
    "MultiObjectiveProblem",
    "from_model",
    "to_internal",
    "to_natural",
]

GradFn = Callable[[np.ndarray], np.ndarray]
ValueFn = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class InternalObjective:
    """One objective in minimize sense, with its natural-sense counterpart."""

    objective: Objective
    value: ValueFn
    gradient: GradFn
    natural_value: ValueFn
    # Optional smooth stand-in with the same argmin, used for the
    # single-objective payoff solves (variance for volatility).
    surrogate_value: Optional[ValueFn] = None
    surrogate_gradient: Optional[GradFn] = None
    # Set only for the turnover objective; enables the lifted formulation.
    l1_reference: Optional[np.ndarray] = None

    @property
    def sign(self) -> float:
        return -1.0 if self.objective.is_maximized else 1.0


@dataclass(frozen=True)
class SmoothConstraint:
    """A vector-valued inequality g(w) <= 0 with Jacobian rows matching g."""

    fun: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    label: str = ""


@dataclass(frozen=True, eq=False)
class MultiObjectiveProblem:
    """Minimize-sense objectives over the allocation feasible set."""

    n: int
    objectives: tuple[InternalObjective, ...]
    # Linear feasible-set pieces: sum(w) = 1 and group bounds G w <= h.
    group_matrix: np.ndarray  # (k, n), possibly k = 0
    group_rhs: np.ndarray
    extra_ineqs: tuple[SmoothConstraint, ...] = ()
    reference: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return len(self.objectives)

    def internal_values(self, w: np.ndarray) -> np.ndarray:
        return np.array([o.value(w) for o in self.objectives])

    def natural_values(self, w: np.ndarray) -> np.ndarray:
        return np.array([o.natural_value(w) for o in self.objectives])

    def constraint_violation(self, w: np.ndarray) -> float:
        """Worst violation of simplex, bounds, groups and extra constraints."""
        viol = abs(float(w.sum()) - 1.0)
        viol = max(viol, float(np.clip(-w, 0.0, None).max(initial=0.0)))
        viol = max(viol, float(np.clip(w - 1.0, 0.0, None).max(initial=0.0)))
        if self.group_matrix.shape[0]:
            g = self.group_matrix @ w - self.group_rhs
            viol = max(viol, float(np.clip(g, 0.0, None).max(initial=0.0)))
        for con in self.extra_ineqs:
            g = np.atleast_1d(con.fun(w))
            viol = max(viol, float(np.clip(g, 0.0, None).max(initial=0.0)))
        return viol


def to_internal(values: np.ndarray, objs: tuple[Objective, ...]) -> np.ndarray:
    """Natural-sense values -> minimize-sense values."""
    signs = np.array([-1.0 if o.is_maximized else 1.0 for o in objs])
    return np.asarray(values, dtype=float) * signs


def to_natural(values: np.ndarray, objs: tuple[Objective, ...]) -> np.ndarray:
    """Minimize-sense values -> natural-sense values (an involution)."""
    return to_internal(values, objs)


def _internal_objective(objective: Objective, spec: ModelSpec) -> InternalObjective:
    universe = spec.universe
    if objective is Objective.RETURN:
        mu = universe.mu

        def value(w: np.ndarray) -> float:
            return -float(w @ mu)

        def gradient(w: np.ndarray) -> np.ndarray:
            return -mu

        return InternalObjective(
            objective, value, gradient, natural_value=lambda w: float(w @ mu)
        )
    if objective is Objective.VOLATILITY:
        cov = universe.covariance()

        def vol(w: np.ndarray) -> float:
            return _sqrt0(float(w @ cov @ w))

        def vol_grad(w: np.ndarray) -> np.ndarray:
            cw = cov @ w
            v = _sqrt0(float(w @ cw))
            return np.zeros_like(w) if v < 1e-12 else cw / v

        def var(w: np.ndarray) -> float:
            return float(w @ cov @ w)

        def var_grad(w: np.ndarray) -> np.ndarray:
            return 2.0 * (cov @ w)

        return InternalObjective(
            objective,
            vol,
            vol_grad,
            natural_value=vol,
            surrogate_value=var,
            surrogate_gradient=var_grad,
        )
    if objective is Objective.SOLVENCY:
        cal = spec.solvency
        if cal is None:
            raise ValueError("solvency objective requires a calibration")

        def value(w: np.ndarray) -> float:
            return -obj.solvency_ratio(w, cal)

        def gradient(w: np.ndarray) -> np.ndarray:
            return -obj.solvency_ratio_gradient(w, cal)

        return InternalObjective(
            objective, value, gradient, natural_value=lambda w: obj.solvency_ratio(w, cal)
        )
    reference = spec.reference.w

    def dist(w: np.ndarray) -> float:
        return float(np.abs(w - reference).sum())

    def dist_grad(w: np.ndarray) -> np.ndarray:
        return np.sign(w - reference)

    return InternalObjective(
        objective, dist, dist_grad, natural_value=dist, l1_reference=reference
    )


def _sqrt0(radicand: float) -> float:
    if radicand < -obj.RADICAND_TOL:
        raise obj.IndefiniteCovarianceError(f"negative variance {radicand:.3e}")
    return float(np.sqrt(max(radicand, 0.0)))


def _bound_constraint(internal: InternalObjective, lower, upper) -> SmoothConstraint:
    rows: list[tuple[float, float]] = []  # (sign, offset): sign * natural(w) + offset <= 0
    if lower is not None:
        rows.append((-1.0, float(lower)))
    if upper is not None:
        rows.append((1.0, -float(upper)))
    signs = np.array([s for s, _ in rows])
    offsets = np.array([o for _, o in rows])
    natural = internal.natural_value
    internal_sign = internal.sign

    def fun(w: np.ndarray) -> np.ndarray:
        return signs * natural(w) + offsets

    def jac(w: np.ndarray) -> np.ndarray:
        # gradient of the natural value = internal gradient / sign flip
        g = internal.gradient(w) * internal_sign
        return np.outer(signs, g)

    return SmoothConstraint(fun, jac, label=f"bound:{internal.objective.value}")


def from_model(spec: ModelSpec) -> MultiObjectiveProblem:
    """Build the internal problem bundle for a validated model."""
    internals = tuple(_internal_objective(o, spec) for o in spec.active_objectives)
    by_objective = {io.objective: io for io in internals}

    rows = []
    rhs = []
    for group in spec.groups:
        indicator = np.zeros(spec.n)
        indicator[list(group.indices)] = 1.0
        rows.append(indicator)
        rhs.append(group.upper)
        rows.append(-indicator)
        rhs.append(-group.lower)
    group_matrix = np.array(rows) if rows else np.zeros((0, spec.n))
    group_rhs = np.array(rhs) if rhs else np.zeros(0)

    extra = []
    for objective, bound in spec.objective_bounds:
        if bound.lower is None and bound.upper is None:
            continue
        internal = by_objective.get(objective)
        if internal is None:
            # Bounds may constrain objectives that are not being optimized.
            internal = _internal_objective(objective, spec)
        extra.append(_bound_constraint(internal, bound.lower, bound.upper))

    return MultiObjectiveProblem(
        n=spec.n,
        objectives=internals,
        group_matrix=group_matrix,
        group_rhs=group_rhs,
        extra_ineqs=tuple(extra),
        reference=spec.reference.w,
    )
