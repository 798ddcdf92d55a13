"""Local solves of scalarized problems.

The backend is sequential least-squares programming (scipy's SLSQP) wrapped
in a deterministic multistart: the reference portfolio, the best single-asset
vertex, the uniform mix, and Dirichlet draws repaired onto the feasible set.
Results merge with a fixed tie-break (lowest objective, then lexicographically
smallest weights), so the outcome depends only on (problem, config, seed).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize, nnls

from .problem import MultiObjectiveProblem
from .scalarize import ScalarProblem

__all__ = [
    "SolverStatus",
    "SolverConfig",
    "SolverDiagnostics",
    "SolverResult",
    "InfeasibleError",
    "feasible_start",
    "solve",
    "kkt_residual",
]


class InfeasibleError(RuntimeError):
    """No feasible point could be produced."""


class SolverStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    BUDGET_EXCEEDED = "budget_exceeded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SolverConfig:
    tol_feas: float = 1e-8
    tol_opt: float = 1e-6
    max_evals: int = 5000
    multistart_count: int = 8
    seed: int = 0
    lift_l1: bool = False

    def __post_init__(self) -> None:
        if min(self.tol_feas, self.tol_opt) <= 0:
            raise ValueError("tolerances must be strictly positive")
        if self.max_evals <= 0 or self.multistart_count <= 0:
            raise ValueError("budgets must be strictly positive")


@dataclass(frozen=True)
class SolverDiagnostics:
    n_evaluations: int = 0
    best_violation: float = float("inf")
    kkt_residual: Optional[float] = None
    start_objectives: tuple = ()
    raw_t: Optional[float] = None
    message: str = ""


@dataclass(frozen=True, eq=False)
class SolverResult:
    status: SolverStatus
    x: Optional[np.ndarray]  # portfolio weights (simplex point) when available
    objective: Optional[float]
    t: Optional[float]
    diagnostics: SolverDiagnostics

    @property
    def ok(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    @property
    def usable(self) -> bool:
        """A feasible point exists even if optimality was not certified."""
        return self.x is not None and self.status in (
            SolverStatus.OPTIMAL,
            SolverStatus.BUDGET_EXCEEDED,
        )


class _NonFinite(RuntimeError):
    pass


def feasible_start(
    problem: MultiObjectiveProblem,
    seed: Union[int, np.random.Generator] = 0,
    max_attempts: int = 16,
    tol: float = 1e-9,
) -> np.ndarray:
    """A point satisfying simplex and group constraints.

    Dirichlet sampling followed by a projection repair; raises
    InfeasibleError after ``max_attempts`` failed repairs.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = problem.n
    has_groups = problem.group_matrix.shape[0] > 0
    for _ in range(max_attempts):
        sample = rng.dirichlet(np.ones(n))
        if not has_groups:
            return sample
        if _linear_violation(problem, sample) <= tol:
            return sample
        projected = _project(problem, sample)
        if projected is not None and _linear_violation(problem, projected) <= tol:
            return projected
    raise InfeasibleError("no feasible start within the repair attempt budget")


def _linear_violation(problem: MultiObjectiveProblem, w: np.ndarray) -> float:
    viol = abs(float(w.sum()) - 1.0)
    viol = max(viol, float(np.clip(-w, 0.0, None).max(initial=0.0)))
    viol = max(viol, float(np.clip(w - 1.0, 0.0, None).max(initial=0.0)))
    if problem.group_matrix.shape[0]:
        g = problem.group_matrix @ w - problem.group_rhs
        viol = max(viol, float(np.clip(g, 0.0, None).max(initial=0.0)))
    return viol


def _project(problem: MultiObjectiveProblem, target: np.ndarray) -> Optional[np.ndarray]:
    """Euclidean projection onto the simplex intersected with the group bounds."""
    n = problem.n
    cons = [
        {"type": "eq", "fun": lambda w: np.array([w.sum() - 1.0]), "jac": lambda w: np.ones((1, n))}
    ]
    if problem.group_matrix.shape[0]:
        G, h = problem.group_matrix, problem.group_rhs
        cons.append(
            {"type": "ineq", "fun": lambda w: h - G @ w, "jac": lambda w: -G}
        )
    res = minimize(
        lambda w: float(((w - target) ** 2).sum()),
        target,
        jac=lambda w: 2.0 * (w - target),
        method="SLSQP",
        bounds=[(0.0, 1.0)] * n,
        constraints=cons,
        options={"maxiter": 200, "ftol": 1e-12},
    )
    return res.x if res.x is not None else None


def violation(problem: ScalarProblem, z: np.ndarray) -> float:
    """Worst constraint or bound violation of a candidate point."""
    worst = 0.0
    for lo_hi, value in zip(problem.bounds, z):
        lo, hi = lo_hi
        if lo is not None:
            worst = max(worst, lo - value)
        if hi is not None:
            worst = max(worst, value - hi)
    for con in problem.constraints:
        vals = np.atleast_1d(con.fun(z))
        if con.kind == "eq":
            worst = max(worst, float(np.abs(vals).max(initial=0.0)))
        else:
            worst = max(worst, float(np.clip(vals, 0.0, None).max(initial=0.0)))
    return float(worst)


def kkt_residual(problem: ScalarProblem, z: np.ndarray, act_tol: float = 1e-7) -> float:
    """First-order stationarity proxy: minimal norm of the KKT stationarity
    equation over non-negative multipliers of the active constraints."""
    g0 = problem.gradient(z)
    columns = []
    for con in problem.constraints:
        vals = np.atleast_1d(con.fun(z))
        jac = np.atleast_2d(con.jac(z))
        for i, v in enumerate(vals):
            if con.kind == "eq":
                columns.append(jac[i])
                columns.append(-jac[i])
            elif v >= -act_tol:
                columns.append(jac[i])
    for i, (lo, hi) in enumerate(problem.bounds):
        if lo is not None and z[i] <= lo + act_tol:
            e = np.zeros(problem.n_vars)
            e[i] = -1.0
            columns.append(e)
        if hi is not None and z[i] >= hi - act_tol:
            e = np.zeros(problem.n_vars)
            e[i] = 1.0
            columns.append(e)
    if not columns:
        return float(np.linalg.norm(g0))
    C = np.array(columns).T
    _, residual = nnls(C, -g0)
    return float(residual)


def _clean(problem: ScalarProblem, z: np.ndarray) -> np.ndarray:
    """Snap tiny bound violations on the weights and re-extend the auxiliaries."""
    w = np.array(problem.weights_of(z), dtype=float)
    w[np.abs(w) < 1e-12] = 0.0
    w = np.clip(w, 0.0, 1.0)
    total = float(w.sum())
    if total > 0 and 1e-12 < abs(total - 1.0) <= 1e-6:
        w = w / total
    return problem.extend_start(w)


def _start_points(problem: ScalarProblem, cfg: SolverConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    n = problem.n_weights
    starts: list[np.ndarray] = []
    if problem.source.reference is not None:
        starts.append(np.array(problem.source.reference, dtype=float))
    # best single-asset vertex for this scalar objective
    best_vertex, best_val = None, np.inf
    for i in range(n):
        vertex = np.zeros(n)
        vertex[i] = 1.0
        try:
            val = problem.objective(problem.extend_start(vertex))
        except Exception:
            continue
        if np.isfinite(val) and val < best_val:
            best_vertex, best_val = vertex, val
    if best_vertex is not None:
        starts.append(best_vertex)
    starts.append(np.full(n, 1.0 / n))
    while len(starts) < cfg.multistart_count:
        try:
            starts.append(feasible_start(problem.source, rng))
        except InfeasibleError:
            break
    return starts[: max(cfg.multistart_count, 1)]


def solve(problem: ScalarProblem, cfg: SolverConfig = SolverConfig()) -> SolverResult:
    """Best local solution over the deterministic multistart."""
    eval_count = 0
    saw_non_finite = False

    def objective(z: np.ndarray) -> float:
        nonlocal eval_count
        eval_count += 1
        val = problem.objective(z)
        if not np.isfinite(val):
            raise _NonFinite(f"objective returned {val}")
        return val

    scipy_cons = []
    for con in problem.constraints:
        if con.kind == "eq":
            scipy_cons.append({"type": "eq", "fun": con.fun, "jac": con.jac})
        else:
            scipy_cons.append(
                {
                    "type": "ineq",
                    "fun": lambda z, _f=con.fun: -np.atleast_1d(_f(z)),
                    "jac": lambda z, _j=con.jac: -np.atleast_2d(_j(z)),
                }
            )

    candidates: list[tuple[float, tuple, np.ndarray, float]] = []
    start_objectives: list[float] = []

    def add_candidate(z: np.ndarray) -> Optional[float]:
        try:
            val = problem.objective(z)
        except Exception:
            return None
        if not np.isfinite(val):
            return None
        candidates.append((float(val), tuple(z.tolist()), z, float(violation(problem, z))))
        return float(val)

    for w0 in _start_points(problem, cfg):
        if eval_count >= cfg.max_evals:
            break
        z0 = problem.extend_start(w0)
        # a feasible start is itself a valid fallback candidate
        add_candidate(z0)
        try:
            res = minimize(
                objective,
                z0,
                jac=problem.gradient,
                method="SLSQP",
                bounds=list(problem.bounds),
                constraints=scipy_cons,
                options={"maxiter": 300, "ftol": 1e-12},
            )
            z_raw = np.asarray(res.x, dtype=float)
        except _NonFinite:
            saw_non_finite = True
            continue
        except (ValueError, FloatingPointError):
            saw_non_finite = True
            continue
        z_clean = _clean(problem, z_raw)
        viol_raw, viol_clean = violation(problem, z_raw), violation(problem, z_clean)
        z = z_clean if viol_clean <= viol_raw else z_raw
        val = add_candidate(z)
        if val is None:
            saw_non_finite = True
            continue
        start_objectives.append(val)

    if not candidates:
        status = SolverStatus.NUMERICAL_FAILURE if saw_non_finite else SolverStatus.INFEASIBLE
        return SolverResult(
            status,
            x=None,
            objective=None,
            t=None,
            diagnostics=SolverDiagnostics(
                n_evaluations=eval_count,
                message="no candidate produced",
                start_objectives=tuple(start_objectives),
            ),
        )

    feasible = [c for c in candidates if c[3] <= cfg.tol_feas]
    best_violation = min(c[3] for c in candidates)
    if not feasible:
        return SolverResult(
            SolverStatus.INFEASIBLE,
            x=None,
            objective=None,
            t=None,
            diagnostics=SolverDiagnostics(
                n_evaluations=eval_count,
                best_violation=best_violation,
                start_objectives=tuple(start_objectives),
                message="no start reached feasibility",
            ),
        )

    val, _, z_best, viol = min(feasible, key=lambda c: (c[0], c[1]))
    residual = kkt_residual(problem, z_best, act_tol=max(1e-7, 10 * cfg.tol_feas))
    scale = max(1.0, float(np.linalg.norm(problem.gradient(z_best))))
    certified = residual / scale <= cfg.tol_opt and eval_count <= cfg.max_evals
    status = SolverStatus.OPTIMAL if certified else SolverStatus.BUDGET_EXCEEDED
    return SolverResult(
        status,
        x=problem.weights_of(z_best).copy(),
        objective=float(val),
        t=problem.t_of(z_best),
        diagnostics=SolverDiagnostics(
            n_evaluations=eval_count,
            best_violation=viol,
            kkt_residual=residual,
            start_objectives=tuple(start_objectives),
            raw_t=problem.t_of(z_best),
        ),
    )
