"""Core value types for the multicriteria allocation engine.

All percentages are stored as fractions (0.0427, not 4.27); rendering to
percent happens at the file/report boundary only. Every type here is an
immutable container; invariants are checked by the ``validate_*`` functions,
which return violations as data instead of raising.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import numpy as np

__all__ = [
    "Sense",
    "Objective",
    "CANONICAL_OBJECTIVES",
    "RISK_TYPES",
    "market_correlation",
    "P_MARKET_0",
    "P_MARKET_HALF",
    "Violation",
    "AssetUniverse",
    "PortfolioWeights",
    "GroupConstraint",
    "SolvencyCalibration",
    "ObjectiveBound",
    "ModelSpec",
    "validate_universe",
    "validate_weights",
    "validate_group",
    "validate_calibration",
    "validate_model",
]

# Order of the net-risk components; the aggregation formulas depend on it.
RISK_TYPES = (
    "interest_up",
    "interest_down",
    "equity_1",
    "equity_2",
    "property",
    "spread",
    "currency_up",
    "currency_down",
)

SIMPLEX_SUM_TOL = 1e-8
RENORMALIZE_TOL = 0.005  # weight sums within 0.5% of 1 are re-normalized by loaders
PSD_EIG_TOL = 1e-9


def market_correlation(rho: float) -> np.ndarray:
    """The fixed 5x5 market-risk aggregation matrix for scenario parameter rho."""
    r = float(rho)
    m = np.array(
        [
            [1.0, r, r, r, 0.25],
            [r, 1.0, 0.75, 0.75, 0.25],
            [r, 0.75, 1.0, 0.5, 0.25],
            [r, 0.75, 0.5, 1.0, 0.25],
            [0.25, 0.25, 0.25, 0.25, 1.0],
        ]
    )
    m.flags.writeable = False
    return m


P_MARKET_0 = market_correlation(0.0)
P_MARKET_HALF = market_correlation(0.5)


class Sense(Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class Objective(Enum):
    """The four allocation criteria, in canonical order."""

    RETURN = "return"
    VOLATILITY = "volatility"
    SOLVENCY = "solvency"
    DISTANCE = "distance"

    @property
    def sense(self) -> Sense:
        return _SENSES[self]

    @property
    def is_maximized(self) -> bool:
        return self.sense is Sense.MAXIMIZE


_SENSES = {
    Objective.RETURN: Sense.MAXIMIZE,
    Objective.VOLATILITY: Sense.MINIMIZE,
    Objective.SOLVENCY: Sense.MAXIMIZE,
    Objective.DISTANCE: Sense.MINIMIZE,
}

CANONICAL_OBJECTIVES = (
    Objective.RETURN,
    Objective.VOLATILITY,
    Objective.SOLVENCY,
    Objective.DISTANCE,
)


def _frozen_array(value, dtype=float) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Violation:
    """One broken invariant: a machine-readable code plus a human message."""

    code: str
    message: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True, eq=False)
class AssetUniverse:
    """Asset classes with expected returns, volatilities and correlations."""

    names: tuple[str, ...]
    mu: np.ndarray  # expected annual returns, fraction / year
    sigma: np.ndarray  # volatilities, fraction / sqrt(year)
    rho: np.ndarray  # n x n correlation matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        object.__setattr__(self, "mu", _frozen_array(self.mu))
        object.__setattr__(self, "sigma", _frozen_array(self.sigma))
        object.__setattr__(self, "rho", _frozen_array(self.rho))

    @property
    def n(self) -> int:
        return len(self.names)

    def covariance(self) -> np.ndarray:
        """Covariance matrix sigma_i sigma_j rho_ij."""
        return np.outer(self.sigma, self.sigma) * self.rho


@dataclass(frozen=True, eq=False)
class PortfolioWeights:
    """A point on the n-simplex: non-negative weights summing to one."""

    w: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", _frozen_array(self.w))

    @property
    def n(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class GroupConstraint:
    """Bounds on the aggregate weight of a subset of assets."""

    indices: tuple[int, ...]
    lower: float
    upper: float
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))


@dataclass(frozen=True, eq=False)
class SolvencyCalibration:
    """Net-risk sensitivities and aggregation constants of the solvency chain.

    The two scenario matrices are fixed constants of the standard formula;
    they are carried here for completeness but never read from files.
    """

    A: np.ndarray  # 8 x n net-risk sensitivities
    b: np.ndarray  # 8-vector offset
    c1: float  # constant concentration risk, >= 0
    c2: float  # > 0
    c3: float  # > 0
    c4: float  # > 0
    c5: float
    P0: np.ndarray = field(default_factory=lambda: P_MARKET_0)
    Phalf: np.ndarray = field(default_factory=lambda: P_MARKET_HALF)

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", _frozen_array(self.A))
        object.__setattr__(self, "b", _frozen_array(self.b))
        object.__setattr__(self, "P0", _frozen_array(self.P0))
        object.__setattr__(self, "Phalf", _frozen_array(self.Phalf))
        for name in ("c1", "c2", "c3", "c4", "c5"):
            object.__setattr__(self, name, float(getattr(self, name)))


@dataclass(frozen=True)
class ObjectiveBound:
    """Optional hard bounds on one objective, in natural (user-facing) sense."""

    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self) -> None:
        if self.lower is not None:
            object.__setattr__(self, "lower", float(self.lower))
        if self.upper is not None:
            object.__setattr__(self, "upper", float(self.upper))

    def merged(self, other: "ObjectiveBound") -> "ObjectiveBound":
        """Intersection of two bounds (tighter wins on each side)."""
        lower = self.lower if other.lower is None else (
            other.lower if self.lower is None else max(self.lower, other.lower)
        )
        upper = self.upper if other.upper is None else (
            other.upper if self.upper is None else min(self.upper, other.upper)
        )
        return ObjectiveBound(lower, upper)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """The full allocation problem: data, constraints and active criteria."""

    universe: AssetUniverse
    reference: PortfolioWeights
    groups: tuple[GroupConstraint, ...] = ()
    solvency: Optional[SolvencyCalibration] = None
    objective_bounds: tuple[tuple[Objective, ObjectiveBound], ...] = ()
    active_objectives: tuple[Objective, ...] = CANONICAL_OBJECTIVES

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(
            self,
            "objective_bounds",
            tuple((Objective(o), b) for o, b in self.objective_bounds),
        )
        object.__setattr__(
            self, "active_objectives", tuple(Objective(o) for o in self.active_objectives)
        )

    @property
    def n(self) -> int:
        return self.universe.n

    @property
    def m(self) -> int:
        return len(self.active_objectives)

    def bound_for(self, objective: Objective) -> Optional[ObjectiveBound]:
        for obj, bound in self.objective_bounds:
            if obj is objective:
                return bound
        return None

    def with_bounds(self, bounds: Mapping[Objective, ObjectiveBound]) -> "ModelSpec":
        """A copy with the given bounds intersected onto the existing ones."""
        merged: dict[Objective, ObjectiveBound] = {o: b for o, b in self.objective_bounds}
        for obj, bound in bounds.items():
            obj = Objective(obj)
            merged[obj] = merged[obj].merged(bound) if obj in merged else bound
        ordered = tuple(
            (o, merged[o]) for o in CANONICAL_OBJECTIVES if o in merged
        )
        return ModelSpec(
            universe=self.universe,
            reference=self.reference,
            groups=self.groups,
            solvency=self.solvency,
            objective_bounds=ordered,
            active_objectives=self.active_objectives,
        )


def validate_universe(universe: AssetUniverse) -> list[Violation]:
    out: list[Violation] = []
    n = universe.n
    if n < 2:
        out.append(Violation("universe_size", f"need at least 2 assets, got {n}"))
        return out
    if universe.mu.shape != (n,):
        out.append(Violation("mu_shape", f"mu has shape {universe.mu.shape}, expected ({n},)"))
    if universe.sigma.shape != (n,):
        out.append(
            Violation("sigma_shape", f"sigma has shape {universe.sigma.shape}, expected ({n},)")
        )
    elif np.any(universe.sigma < 0):
        bad = [universe.names[i] for i in np.flatnonzero(universe.sigma < 0)]
        out.append(Violation("sigma_negative", f"negative volatility for {', '.join(bad)}"))
    rho = universe.rho
    if rho.shape != (n, n):
        out.append(Violation("rho_shape", f"rho has shape {rho.shape}, expected ({n}, {n})"))
        return out
    if not np.allclose(rho, rho.T, atol=1e-12, rtol=0.0):
        out.append(Violation("correlation_symmetry", "correlation matrix is not symmetric"))
    if not np.allclose(np.diag(rho), 1.0, atol=1e-12, rtol=0.0):
        out.append(Violation("correlation_diagonal", "correlation diagonal must be 1"))
    if np.any(np.abs(rho) > 1.0 + 1e-12):
        out.append(Violation("correlation_range", "correlation entries must lie in [-1, 1]"))
    else:
        min_eig = float(np.linalg.eigvalsh((rho + rho.T) / 2.0).min())
        if min_eig < -PSD_EIG_TOL:
            out.append(
                Violation(
                    "correlation_psd",
                    f"correlation matrix is not positive semi-definite (min eigenvalue {min_eig:.3e})",
                )
            )
    return out


def validate_weights(weights: PortfolioWeights, n: Optional[int] = None) -> list[Violation]:
    out: list[Violation] = []
    w = weights.w
    if n is not None and w.shape != (n,):
        out.append(Violation("weights_shape", f"weights have shape {w.shape}, expected ({n},)"))
        return out
    if np.any(w < -1e-12):
        out.append(Violation("weights_negative", "weights must be non-negative (no short selling)"))
    total = float(w.sum())
    if abs(total - 1.0) > SIMPLEX_SUM_TOL:
        out.append(Violation("simplex_sum", f"weights sum to {total:.10f}, expected 1"))
    return out


def validate_group(group: GroupConstraint, n: int) -> list[Violation]:
    out: list[Violation] = []
    label = group.label or f"group{group.indices}"
    if len(group.indices) == 0:
        out.append(Violation("group_empty", f"{label}: index set is empty"))
    if len(set(group.indices)) != len(group.indices):
        out.append(Violation("group_duplicate", f"{label}: duplicate indices"))
    if any(i < 0 or i >= n for i in group.indices):
        out.append(Violation("group_range", f"{label}: index out of range 0..{n - 1}"))
    if not (0.0 <= group.lower <= 1.0 and 0.0 <= group.upper <= 1.0):
        out.append(Violation("group_bounds", f"{label}: bounds must lie in [0, 1]"))
    if group.lower > group.upper:
        out.append(Violation("group_bounds", f"{label}: lower {group.lower} > upper {group.upper}"))
    return out


def validate_calibration(cal: SolvencyCalibration, n: int) -> list[Violation]:
    out: list[Violation] = []
    if cal.A.shape != (len(RISK_TYPES), n):
        out.append(
            Violation(
                "calibration_shape",
                f"A has shape {cal.A.shape}, expected ({len(RISK_TYPES)}, {n})",
            )
        )
    if cal.b.shape != (len(RISK_TYPES),):
        out.append(
            Violation("calibration_shape", f"b has shape {cal.b.shape}, expected ({len(RISK_TYPES)},)")
        )
    if cal.c1 < 0:
        out.append(Violation("calibration_constants", "c1 must be non-negative"))
    for name in ("c2", "c3", "c4"):
        if getattr(cal, name) <= 0:
            out.append(Violation("calibration_constants", f"{name} must be strictly positive"))
    if not np.array_equal(cal.P0, P_MARKET_0) or not np.array_equal(cal.Phalf, P_MARKET_HALF):
        out.append(
            Violation("scenario_matrices", "scenario matrices differ from the fixed constants")
        )
    return out


def validate_model(spec: ModelSpec) -> list[Violation]:
    """Every invariant violation of the model; an empty list means valid."""
    out = validate_universe(spec.universe)
    n = spec.universe.n
    # The reference is only held to the simplex constraints; whether it must
    # satisfy group constraints of a restricted run is left open on purpose.
    for v in validate_weights(spec.reference, n):
        out.append(Violation(f"reference_{v.code}", f"reference portfolio: {v.message}"))
    for group in spec.groups:
        out.extend(validate_group(group, n))
    if spec.solvency is not None:
        out.extend(validate_calibration(spec.solvency, n))
    actives = spec.active_objectives
    if not (2 <= len(actives) <= 4):
        out.append(
            Violation("active_objectives", f"need 2..4 active objectives, got {len(actives)}")
        )
    if len(set(actives)) != len(actives):
        out.append(Violation("active_objectives", "duplicate active objectives"))
    if Objective.SOLVENCY in actives and spec.solvency is None:
        out.append(
            Violation("active_objectives", "solvency objective active but no calibration provided")
        )
    for obj, bound in spec.objective_bounds:
        if bound.lower is not None and bound.upper is not None and bound.lower > bound.upper:
            out.append(
                Violation(
                    "objective_bounds",
                    f"{obj.value}: lower bound {bound.lower} exceeds upper bound {bound.upper}",
                )
            )
    return out
