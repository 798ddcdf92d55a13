"""Single-objective problems built from the multi-objective model.

Builders accept either a ModelSpec or an already-converted
MultiObjectiveProblem and always produce minimize-sense problems. The
decision vector is z = (w, [t], [d]) where t is the epigraph variable of
the Tchebycheff reformulation and d are the optional auxiliary variables
that lift the l1 turnover objective to a smooth form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .boxes import BoxRegion, DegenerateBoxError
from .model import ModelSpec, Objective
from .problem import MultiObjectiveProblem, from_model

__all__ = [
    "TchebycheffParams",
    "ScalarConstraint",
    "ScalarProblem",
    "tchebycheff_weights",
    "tchebycheff_vertex",
    "build_tchebycheff",
    "build_weighted_sum",
    "build_epsilon_constraint",
]

ModelLike = Union[ModelSpec, MultiObjectiveProblem]


@dataclass(frozen=True, eq=False)
class TchebycheffParams:
    """Reference point (the box lower bound) and strictly positive weights."""

    reference: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        ref = np.array(self.reference, dtype=float)
        wts = np.array(self.weights, dtype=float)
        if np.any(wts <= 0):
            raise ValueError("Tchebycheff weights must be strictly positive")
        ref.flags.writeable = False
        wts.flags.writeable = False
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "weights", wts)


def tchebycheff_weights(box: BoxRegion) -> TchebycheffParams:
    """Weights 1 / ((u_i - l_i) sum_j 1/(u_j - l_j)); they sum to one."""
    edges = box.edges()
    if np.any(edges <= 0):
        raise DegenerateBoxError(f"box has a non-positive edge: {edges}")
    inv = 1.0 / edges
    weights = inv / inv.sum()
    return TchebycheffParams(reference=box.lower, weights=weights)


def tchebycheff_vertex(l: np.ndarray, t: float, w: np.ndarray) -> np.ndarray:
    """The diagonal point s_i = l_i + t / w_i reached at epigraph level t."""
    l = np.asarray(l, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("Tchebycheff weights must be strictly positive")
    return l + float(t) / w


@dataclass(frozen=True)
class ScalarConstraint:
    """g(z) <= 0 (kind='ineq') or h(z) = 0 (kind='eq'), vector valued."""

    kind: str
    fun: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    label: str = ""


@dataclass(frozen=True, eq=False)
class ScalarProblem:
    """A ready-to-solve single-objective problem over z = (w, [t], [d])."""

    n_weights: int
    n_vars: int
    has_t: bool
    n_lift: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    constraints: tuple[ScalarConstraint, ...]
    bounds: tuple[tuple[Optional[float], Optional[float]], ...]
    extend_start: Callable[[np.ndarray], np.ndarray]
    source: MultiObjectiveProblem
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def weights_of(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float)[: self.n_weights]

    def t_of(self, z: np.ndarray) -> Optional[float]:
        return float(z[self.n_weights]) if self.has_t else None


def _as_problem(model: ModelLike) -> MultiObjectiveProblem:
    if isinstance(model, ModelSpec):
        return from_model(model)
    return model


def _pad(jac_w: np.ndarray, n_vars: int) -> np.ndarray:
    """Pad a Jacobian over w with zero columns for the auxiliary variables."""
    jac_w = np.atleast_2d(jac_w)
    out = np.zeros((jac_w.shape[0], n_vars))
    out[:, : jac_w.shape[1]] = jac_w
    return out


def _feasible_set_constraints(problem: MultiObjectiveProblem, n_vars: int) -> list[ScalarConstraint]:
    n = problem.n
    ones = np.zeros((1, n_vars))
    ones[0, :n] = 1.0

    cons = [
        ScalarConstraint(
            "eq",
            lambda z: np.array([z[:n].sum() - 1.0]),
            lambda z, _ones=ones: _ones,
            label="simplex",
        )
    ]
    if problem.group_matrix.shape[0]:
        G = problem.group_matrix
        h = problem.group_rhs
        Gz = _pad(G, n_vars)
        cons.append(
            ScalarConstraint(
                "ineq",
                lambda z, _G=G, _h=h: _G @ z[:n] - _h,
                lambda z, _Gz=Gz: _Gz,
                label="groups",
            )
        )
    for con in problem.extra_ineqs:
        cons.append(
            ScalarConstraint(
                "ineq",
                lambda z, _c=con: np.atleast_1d(_c.fun(z[:n])),
                lambda z, _c=con, _nv=n_vars: _pad(_c.jac(z[:n]), _nv),
                label=con.label,
            )
        )
    return cons


def _lift_pieces(problem: MultiObjectiveProblem, lift_l1: bool):
    """Locate the turnover objective and decide whether to lift it."""
    if not lift_l1:
        return None
    for idx, io in enumerate(problem.objectives):
        if io.l1_reference is not None:
            return idx, io.l1_reference
    return None


def _lift_constraints(
    n: int, n_vars: int, d_offset: int, reference: np.ndarray
) -> ScalarConstraint:
    """d_i >= |w_i - ref_i| as 2n linear rows: +-(w - ref) - d <= 0."""
    rows = np.zeros((2 * n, n_vars))
    rows[:n, :n] = np.eye(n)
    rows[:n, d_offset : d_offset + n] = -np.eye(n)
    rows[n:, :n] = -np.eye(n)
    rows[n:, d_offset : d_offset + n] = -np.eye(n)
    offset = np.concatenate([-reference, reference])

    return ScalarConstraint(
        "ineq",
        lambda z, _rows=rows, _off=offset: _rows @ z + _off,
        lambda z, _rows=rows: _rows,
        label="l1-lift",
    )


def build_weighted_sum(
    model: ModelLike,
    lam: Sequence[float],
    *,
    lift_l1: bool = False,
    use_surrogate: bool = False,
) -> ScalarProblem:
    """min sum_i lam_i f_i(w) over the feasible set (internal sense).

    With ``use_surrogate`` and a single active term, an equivalent smooth
    stand-in with the same argmin replaces the raw objective when one is
    defined (variance for volatility).
    """
    problem = _as_problem(model)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (problem.m,):
        raise ValueError(f"expected {problem.m} weights, got shape {lam.shape}")
    if np.any(lam < 0):
        raise ValueError("weighted-sum multipliers must be non-negative")

    lift = _lift_pieces(problem, lift_l1)
    n = problem.n
    active = [i for i in range(problem.m) if lam[i] != 0.0]
    surrogate_ok = use_surrogate and len(active) == 1

    n_lift = n if lift is not None and lam[lift[0]] != 0.0 else 0
    n_vars = n + n_lift
    d_offset = n

    terms = []
    for i in active:
        io = problem.objectives[i]
        if surrogate_ok and io.surrogate_value is not None:
            value, grad = io.surrogate_value, io.surrogate_gradient
        else:
            value, grad = io.value, io.gradient
        if n_lift and io.l1_reference is not None:
            terms.append((float(lam[i]), None, None))  # handled via d block
        else:
            terms.append((float(lam[i]), value, grad))

    def objective(z: np.ndarray) -> float:
        w = z[:n]
        total = 0.0
        for coeff, value, _ in terms:
            total += coeff * (float(z[d_offset:].sum()) if value is None else value(w))
        return total

    def gradient(z: np.ndarray) -> np.ndarray:
        w = z[:n]
        g = np.zeros(n_vars)
        for coeff, value, grad in terms:
            if value is None:
                g[d_offset:] += coeff
            else:
                g[:n] += coeff * grad(w)
        return g

    cons = _feasible_set_constraints(problem, n_vars)
    if n_lift:
        cons.append(_lift_constraints(n, n_vars, d_offset, lift[1]))

    def extend_start(w0: np.ndarray) -> np.ndarray:
        if not n_lift:
            return np.array(w0, dtype=float)
        return np.concatenate([w0, np.abs(w0 - lift[1])])

    bounds = tuple([(0.0, 1.0)] * n + [(0.0, 1.0)] * n_lift)
    return ScalarProblem(
        n_weights=n,
        n_vars=n_vars,
        has_t=False,
        n_lift=n_lift,
        objective=objective,
        gradient=gradient,
        constraints=tuple(cons),
        bounds=bounds,
        extend_start=extend_start,
        source=problem,
        metadata={"scalarization": "weighted-sum", "lambda": lam.tolist()},
    )


def build_epsilon_constraint(
    model: ModelLike,
    keep: Union[int, Objective],
    eps: Sequence[float],
    *,
    lift_l1: bool = False,
) -> ScalarProblem:
    """min f_keep subject to f_k <= eps_k for all other objectives.

    eps is given in internal (minimize) sense, aligned with the active
    objectives in order, skipping the kept one.
    """
    problem = _as_problem(model)
    if isinstance(keep, Objective):
        keep_idx = next(
            i for i, io in enumerate(problem.objectives) if io.objective is keep
        )
    else:
        keep_idx = int(keep)
    if not 0 <= keep_idx < problem.m:
        raise ValueError(f"keep index {keep_idx} out of range")
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (problem.m - 1,):
        raise ValueError(f"expected {problem.m - 1} epsilon values, got shape {eps.shape}")

    lift = _lift_pieces(problem, lift_l1)
    n = problem.n
    n_lift = n if lift is not None else 0
    n_vars = n + n_lift
    d_offset = n

    def term(io):
        if n_lift and io.l1_reference is not None:
            return (
                lambda z: float(z[d_offset:].sum()),
                lambda z: np.concatenate([np.zeros(n), np.ones(n)]),
            )
        return (
            lambda z, _v=io.value: _v(z[:n]),
            lambda z, _g=io.gradient: _pad(_g(z[:n]), n_vars)[0],
        )

    others = [i for i in range(problem.m) if i != keep_idx]
    keep_value, keep_grad = term(problem.objectives[keep_idx])

    cons = _feasible_set_constraints(problem, n_vars)
    for pos, i in enumerate(others):
        value, grad = term(problem.objectives[i])
        bound = float(eps[pos])
        if not np.isfinite(bound):
            continue  # +inf bound: unconstrained in that objective
        cons.append(
            ScalarConstraint(
                "ineq",
                lambda z, _v=value, _b=bound: np.array([_v(z) - _b]),
                lambda z, _g=grad: np.atleast_2d(_g(z)),
                label=f"epsilon:{problem.objectives[i].objective.value}",
            )
        )
    if n_lift:
        cons.append(_lift_constraints(n, n_vars, d_offset, lift[1]))

    def extend_start(w0: np.ndarray) -> np.ndarray:
        if not n_lift:
            return np.array(w0, dtype=float)
        return np.concatenate([w0, np.abs(w0 - lift[1])])

    bounds = tuple([(0.0, 1.0)] * n + [(0.0, 1.0)] * n_lift)
    return ScalarProblem(
        n_weights=n,
        n_vars=n_vars,
        has_t=False,
        n_lift=n_lift,
        objective=lambda z: keep_value(z),
        gradient=lambda z: keep_grad(z),
        constraints=tuple(cons),
        bounds=bounds,
        extend_start=extend_start,
        source=problem,
        metadata={"scalarization": "epsilon-constraint", "keep": keep_idx, "eps": eps.tolist()},
    )


def build_tchebycheff(
    model: ModelLike, params: TchebycheffParams, *, lift_l1: bool = False
) -> ScalarProblem:
    """The differentiable reformulation: min t s.t. t >= w_i (f_i(x) - z*_i)."""
    problem = _as_problem(model)
    if params.weights.shape != (problem.m,) or params.reference.shape != (problem.m,):
        raise ValueError("parameter dimensions do not match the active objectives")

    lift = _lift_pieces(problem, lift_l1)
    n = problem.n
    n_lift = n if lift is not None else 0
    t_index = n
    d_offset = n + 1
    n_vars = n + 1 + n_lift

    wts = params.weights
    ref = params.reference
    ios = problem.objectives

    def epigraph(z: np.ndarray) -> np.ndarray:
        w = z[:n]
        t = z[t_index]
        vals = np.empty(problem.m)
        for i, io in enumerate(ios):
            if n_lift and io.l1_reference is not None:
                vals[i] = float(z[d_offset:].sum())
            else:
                vals[i] = io.value(w)
        return wts * (vals - ref) - t

    def epigraph_jac(z: np.ndarray) -> np.ndarray:
        w = z[:n]
        jac = np.zeros((problem.m, n_vars))
        for i, io in enumerate(ios):
            if n_lift and io.l1_reference is not None:
                jac[i, d_offset:] = wts[i]
            else:
                jac[i, :n] = wts[i] * io.gradient(w)
            jac[i, t_index] = -1.0
        return jac

    cons = _feasible_set_constraints(problem, n_vars)
    cons.append(ScalarConstraint("ineq", epigraph, epigraph_jac, label="epigraph"))
    if n_lift:
        cons.append(_lift_constraints(n, n_vars, d_offset, lift[1]))

    grad = np.zeros(n_vars)
    grad[t_index] = 1.0
    grad.flags.writeable = False

    def extend_start(w0: np.ndarray) -> np.ndarray:
        w0 = np.asarray(w0, dtype=float)
        vals = np.array([io.value(w0) for io in ios])
        t0 = float((wts * (vals - ref)).max())
        parts = [w0, np.array([t0])]
        if n_lift:
            parts.append(np.abs(w0 - lift[1]))
        return np.concatenate(parts)

    bounds = tuple([(0.0, 1.0)] * n + [(None, None)] + [(0.0, 1.0)] * n_lift)
    return ScalarProblem(
        n_weights=n,
        n_vars=n_vars,
        has_t=True,
        n_lift=n_lift,
        objective=lambda z: float(z[t_index]),
        gradient=lambda z: grad,
        constraints=tuple(cons),
        bounds=bounds,
        extend_start=extend_start,
        source=problem,
        metadata={
            "scalarization": "tchebycheff",
            "weights": wts.tolist(),
            "reference": ref.tolist(),
        },
    )
