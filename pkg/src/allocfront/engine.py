"""The representation engine: payoff initialization and the box-search loop.

Each iteration picks the box with the largest normalized smallest edge,
solves the weighted Tchebycheff reformulation anchored at its lower bound,
and either archives the new point (splitting the local bound sets) or
discards the box. Box geometry (selection, the archive margin and the edge
floor) is computed on objectives rescaled by the initial payoff ranges so
that disparate units do not bias the search.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .boxes import BoxRegion, LocalBoundSets, min_edge
from .model import ModelSpec, Objective, ObjectiveBound, validate_model
from .objectives import ObjectiveVector
from .problem import MultiObjectiveProblem, from_model, to_natural
from .scalarize import build_tchebycheff, build_weighted_sum, tchebycheff_vertex, tchebycheff_weights
from .solver import InfeasibleError, SolverConfig, SolverResult, solve

__all__ = [
    "RunConfig",
    "PortfolioRecord",
    "IterationLog",
    "RepresentationArchive",
    "payoff_table",
    "run",
    "restrict_and_rerun",
    "InfeasibleError",
]

logger = logging.getLogger(__name__)

ARCHIVE_MARGIN = 1e-9  # strictness margin for f(x) < u, in normalized units
DEGENERATE_EDGE = 1e-12

RecordCallback = Callable[["PortfolioRecord"], None]
ProgressCallback = Callable[[int, int], None]
BoundsCallback = Callable[[int, list, list], None]  # iteration, L, U snapshots


@dataclass(frozen=True)
class RunConfig:
    maxit: int = 10
    solver: SolverConfig = field(default_factory=SolverConfig)
    min_edge_floor: float = 1e-6  # normalized units

    def __post_init__(self) -> None:
        if self.maxit < 1:
            raise ValueError("maxit must be at least 1")


@dataclass(frozen=True, eq=False)
class PortfolioRecord:
    """One archived portfolio with full provenance."""

    index: int  # 1-based position in the archive
    kind: str  # "payoff" | "intermediate"
    iteration: int  # 0 for payoff records
    weights: np.ndarray
    values: ObjectiveVector  # natural sense
    internal: np.ndarray  # minimize sense
    box_lower: Optional[np.ndarray] = None  # originating box, internal sense
    box_upper: Optional[np.ndarray] = None
    scalarization: Mapping[str, object] = field(default_factory=dict)
    solver_info: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class IterationLog:
    iteration: int
    box_lower: np.ndarray
    box_upper: np.ndarray
    norm_min_edge: float
    outcome: str  # "archived" | "discarded_outside" | "discarded_failure"
    detail: str = ""


@dataclass(eq=False)
class RepresentationArchive:
    """Payoff records plus the archived intermediate portfolios of one run."""

    objectives: tuple[Objective, ...]
    asset_names: tuple[str, ...]
    initial_lower: np.ndarray  # internal sense
    initial_upper: np.ndarray
    records: list[PortfolioRecord] = field(default_factory=list)
    iterations: list[IterationLog] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.objectives)

    @property
    def payoff_records(self) -> list[PortfolioRecord]:
        return [r for r in self.records if r.kind == "payoff"]

    @property
    def intermediate_records(self) -> list[PortfolioRecord]:
        return [r for r in self.records if r.kind == "intermediate"]

    def natural_ranges(self) -> tuple[np.ndarray, np.ndarray]:
        """Initial per-objective ranges in natural sense (lo, hi)."""
        lo = to_natural(self.initial_lower, self.objectives)
        hi = to_natural(self.initial_upper, self.objectives)
        return np.minimum(lo, hi), np.maximum(lo, hi)

    def normalization(self) -> np.ndarray:
        ranges = self.initial_upper - self.initial_lower
        return np.where(ranges > DEGENERATE_EDGE, ranges, 1.0)

    def selected_min_edges(self) -> list[float]:
        return [log.norm_min_edge for log in self.iterations]


def _mixed_seed(base: int, ordinal: int) -> int:
    return int(np.random.SeedSequence([int(base), int(ordinal)]).generate_state(1)[0])


def _solver_info(result: SolverResult) -> dict:
    d = result.diagnostics
    return {
        "status": result.status.value,
        "n_evaluations": d.n_evaluations,
        "constraint_violation": d.best_violation,
        "kkt_residual": d.kkt_residual,
        "raw_t": d.raw_t,
    }


def _ensure_problem(model: Union[ModelSpec, MultiObjectiveProblem]) -> MultiObjectiveProblem:
    if isinstance(model, ModelSpec):
        violations = validate_model(model)
        if violations:
            raise ValueError(
                "model is invalid: " + "; ".join(str(v) for v in violations)
            )
        return from_model(model)
    return model


def payoff_table(
    model: Union[ModelSpec, MultiObjectiveProblem],
    cfg: RunConfig = RunConfig(),
    on_record: Optional[RecordCallback] = None,
) -> tuple[np.ndarray, np.ndarray, list[PortfolioRecord]]:
    """Optimize each objective individually; bounds are component-wise
    extremes over the resulting objective vectors."""
    problem = _ensure_problem(model)
    records: list[PortfolioRecord] = []
    vectors = []
    for i, io in enumerate(problem.objectives):
        lam = np.zeros(problem.m)
        lam[i] = 1.0
        sp = build_weighted_sum(
            problem, lam, lift_l1=cfg.solver.lift_l1, use_surrogate=True
        )
        solver_cfg = replace(cfg.solver, seed=_mixed_seed(cfg.solver.seed, i))
        result = solve(sp, solver_cfg)
        if not result.usable:
            raise InfeasibleError(
                f"payoff solve for objective '{io.objective.value}' failed: "
                f"{result.status.value}"
            )
        internal = problem.internal_values(result.x)
        record = PortfolioRecord(
            index=len(records) + 1,
            kind="payoff",
            iteration=0,
            weights=result.x,
            values=ObjectiveVector(
                tuple(o.objective for o in problem.objectives),
                to_natural(internal, tuple(o.objective for o in problem.objectives)),
            ),
            internal=internal,
            scalarization={"scalarization": "weighted-sum", "lambda": lam.tolist()},
            solver_info=_solver_info(result),
        )
        records.append(record)
        vectors.append(internal)
        if on_record is not None:
            on_record(record)
    stacked = np.vstack(vectors)
    return stacked.min(axis=0), stacked.max(axis=0), records


class _BoxBook:
    """Current box set with stable creation order and discard memory."""

    def __init__(self) -> None:
        self._creation: dict[tuple, int] = {}
        self._removed: set[tuple] = set()
        self.current: list[BoxRegion] = []

    def rebuild(self, bounds: LocalBoundSets) -> None:
        entries = []
        for box in bounds.boxes():
            key = box.key()
            if key in self._removed:
                continue
            if key not in self._creation:
                self._creation[key] = len(self._creation)
            entries.append((self._creation[key], box))
        entries.sort(key=lambda e: e[0])
        self.current = [box for _, box in entries]

    def seed(self, box: BoxRegion) -> None:
        self._creation[box.key()] = len(self._creation)
        self.current = [box]

    def remove(self, box: BoxRegion) -> None:
        self._removed.add(box.key())
        self.current = [b for b in self.current if b.key() != box.key()]


def run(
    model: Union[ModelSpec, MultiObjectiveProblem],
    cfg: RunConfig = RunConfig(),
    on_record: Optional[RecordCallback] = None,
    on_progress: Optional[ProgressCallback] = None,
    on_bounds: Optional[BoundsCallback] = None,
) -> RepresentationArchive:
    """Full box-search run: payoff table plus up to maxit refinement steps."""
    problem = _ensure_problem(model)
    asset_names = (
        model.universe.names if isinstance(model, ModelSpec) else tuple(
            f"asset_{i}" for i in range(problem.n)
        )
    )
    objectives = tuple(io.objective for io in problem.objectives)

    l0, u0, records = payoff_table(problem, cfg, on_record=on_record)
    archive = RepresentationArchive(
        objectives=objectives,
        asset_names=asset_names,
        initial_lower=l0,
        initial_upper=u0,
        records=list(records),
    )

    ranges = u0 - l0
    if np.any(ranges <= DEGENERATE_EDGE):
        logger.info("initial box is degenerate; no refinement possible")
        if on_progress is not None:
            on_progress(cfg.maxit, cfg.maxit)
        return archive

    scale = archive.normalization()
    bounds = LocalBoundSets(l0, u0)
    book = _BoxBook()
    book.seed(BoxRegion(l0, u0))

    def normalized(v: np.ndarray) -> np.ndarray:
        return (v - l0) / scale

    iteration = 0
    while iteration < cfg.maxit:
        if not book.current:
            logger.info("box set exhausted after %d iterations", iteration)
            break
        idx = _select(book.current, scale)
        box = book.current[idx]
        edge = min_edge(box, scale)
        if edge < cfg.min_edge_floor:
            logger.info("smallest selected edge %.3e below floor; stopping", edge)
            break
        iteration += 1

        params = tchebycheff_weights(box)
        sp = build_tchebycheff(problem, params, lift_l1=cfg.solver.lift_l1)
        solver_cfg = replace(
            cfg.solver, seed=_mixed_seed(cfg.solver.seed, problem.m + iteration)
        )
        result = solve(sp, solver_cfg)

        if not result.usable:
            archive.iterations.append(
                IterationLog(
                    iteration,
                    box.lower,
                    box.upper,
                    edge,
                    "discarded_failure",
                    detail=result.status.value,
                )
            )
            logger.warning(
                "iteration %d: solver status %s; box discarded", iteration, result.status.value
            )
            book.remove(box)
            if on_progress is not None:
                on_progress(iteration, cfg.maxit)
            continue

        z = problem.internal_values(result.x)
        # The epigraph-optimal level for the solved point; the solver's own
        # auxiliary variable is kept in diagnostics only.
        t_star = float((params.weights * (z - params.reference)).max())
        vertex = tchebycheff_vertex(box.lower, t_star, params.weights)

        inside = bool(np.all(normalized(z) < normalized(box.upper) - ARCHIVE_MARGIN))
        if inside:
            record = PortfolioRecord(
                index=len(archive.records) + 1,
                kind="intermediate",
                iteration=iteration,
                weights=result.x,
                values=ObjectiveVector(objectives, to_natural(z, objectives)),
                internal=z,
                box_lower=box.lower,
                box_upper=box.upper,
                scalarization=dict(sp.metadata),
                solver_info=_solver_info(result),
            )
            archive.records.append(record)
            archive.iterations.append(
                IterationLog(iteration, box.lower, box.upper, edge, "archived")
            )
            bounds.add_point(z, vertex)
            book.rebuild(bounds)
            if on_record is not None:
                on_record(record)
            if on_bounds is not None:
                on_bounds(iteration, [l.copy() for l in bounds.lower], [u.copy() for u in bounds.upper])
        else:
            archive.iterations.append(
                IterationLog(
                    iteration,
                    box.lower,
                    box.upper,
                    edge,
                    "discarded_outside",
                    detail=f"point {z.tolist()} not strictly inside the box upper bound",
                )
            )
            logger.info("iteration %d: point outside selected box; box discarded", iteration)
            book.remove(box)
        if on_progress is not None:
            on_progress(iteration, cfg.maxit)

    if on_progress is not None:
        on_progress(cfg.maxit, cfg.maxit)
    return archive


def _select(boxes: Sequence[BoxRegion], scale: np.ndarray) -> int:
    best_idx, best_val = 0, min_edge(boxes[0], scale)
    for i in range(1, len(boxes)):
        val = min_edge(boxes[i], scale)
        if val > best_val:
            best_idx, best_val = i, val
    return best_idx


def restrict_and_rerun(
    spec: ModelSpec,
    bounds: Mapping[Objective, ObjectiveBound],
    cfg: RunConfig = RunConfig(),
    on_record: Optional[RecordCallback] = None,
    on_progress: Optional[ProgressCallback] = None,
) -> RepresentationArchive:
    """Install hard natural-sense objective bounds and rerun the search.

    The payoff table is recomputed, so the initial box tightens to the
    restricted feasible set; infeasible bounds raise InfeasibleError.
    """
    restricted = spec.with_bounds(dict(bounds))
    return run(restricted, cfg, on_record=on_record, on_progress=on_progress)
