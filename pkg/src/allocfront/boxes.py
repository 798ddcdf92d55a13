"""Boxes and local bound sets for the search-region decomposition.

Upper bounds describe the region not yet dominated by archived points, as
the antichain of corner points; lower bounds mirror that for the reached
Tchebycheff vertices. Updates follow the child-split rule: a bound strictly
dominated by the new point is replaced by at most m children, one per
coordinate, and children that are dominated by another member of the
updated set are not inserted. Comparisons are exact: normalization and
tolerances live in the engine, not here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "DegenerateBoxError",
    "BoxRegion",
    "LocalBoundSets",
    "new_upper_bounds",
    "new_lower_bounds",
    "select_box",
    "min_edge",
]


class DegenerateBoxError(ValueError):
    """A box with a non-positive edge length."""


@dataclass(frozen=True, eq=False)
class BoxRegion:
    """A rectangular region [lower, upper] in internal objective space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("box bounds must be vectors of equal length")
        if not np.all(lower < upper):
            raise DegenerateBoxError(f"box has a non-positive edge: l={lower}, u={upper}")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def m(self) -> int:
        return self.lower.shape[0]

    def edges(self) -> np.ndarray:
        return self.upper - self.lower

    def key(self) -> tuple:
        return (tuple(self.lower.tolist()), tuple(self.upper.tolist()))


def min_edge(box: BoxRegion, scale: Optional[np.ndarray] = None) -> float:
    """Smallest edge of the box, optionally rescaled component-wise."""
    edges = box.edges()
    if scale is not None:
        edges = edges / scale
    return float(edges.min())


def select_box(boxes: Sequence[BoxRegion], scale: Optional[np.ndarray] = None) -> int:
    """Index of the box with the largest smallest edge; earliest wins ties."""
    if not boxes:
        raise ValueError("cannot select from an empty box set")
    best_idx = 0
    best_val = min_edge(boxes[0], scale)
    for i in range(1, len(boxes)):
        val = min_edge(boxes[i], scale)
        if val > best_val:
            best_idx, best_val = i, val
    return best_idx


def _split_against(
    bounds: Sequence[np.ndarray], point: np.ndarray, direction: int
) -> list[np.ndarray]:
    """Shared child-split update.

    direction=+1 updates upper bounds with a dominating point (point < u),
    direction=-1 updates lower bounds with the mirrored rule (point > l).
    """
    point = np.asarray(point, dtype=float)
    m = point.shape[0]

    def beats(p: np.ndarray, q: np.ndarray) -> bool:
        # p strictly inside q's cone, all components
        return bool(np.all(direction * p < direction * q))

    split = [b for b in bounds if beats(point, b)]
    if not split:
        return [np.array(b, dtype=float) for b in bounds]
    keep = [np.array(b, dtype=float) for b in bounds if not beats(point, b)]

    children: list[np.ndarray] = []
    for parent in split:
        for i in range(m):
            child = np.array(parent, dtype=float)
            child[i] = point[i]
            children.append(child)

    def dominated(child: np.ndarray, other: np.ndarray) -> bool:
        # child redundant when component-wise covered by another bound
        return bool(np.all(direction * child <= direction * other))

    result = list(keep)
    accepted: list[np.ndarray] = []
    for idx, child in enumerate(children):
        redundant = any(dominated(child, k) for k in keep)
        if not redundant:
            for jdx, other in enumerate(children):
                if jdx == idx:
                    continue
                if np.array_equal(child, other):
                    if jdx < idx:  # duplicate: keep the first occurrence only
                        redundant = True
                        break
                    continue
                if dominated(child, other):
                    redundant = True
                    break
        if not redundant:
            accepted.append(child)
    result.extend(accepted)
    return result


def new_upper_bounds(U: Sequence[np.ndarray], z: np.ndarray) -> list[np.ndarray]:
    """Update the local upper bounds with a newly archived point z."""
    return _split_against(U, z, direction=+1)


def new_lower_bounds(L: Sequence[np.ndarray], s: np.ndarray) -> list[np.ndarray]:
    """Update the local lower bounds with a reached Tchebycheff vertex s."""
    return _split_against(L, s, direction=-1)


class LocalBoundSets:
    """The evolving bound sets L and U driving the box decomposition."""

    def __init__(self, lower0: np.ndarray, upper0: np.ndarray):
        self.lower: list[np.ndarray] = [np.array(lower0, dtype=float)]
        self.upper: list[np.ndarray] = [np.array(upper0, dtype=float)]

    def add_point(self, z: np.ndarray, s: np.ndarray) -> None:
        self.upper = new_upper_bounds(self.upper, z)
        self.lower = new_lower_bounds(self.lower, s)

    def boxes(self) -> list[BoxRegion]:
        """All pairs [l, u] with l < u, in deterministic l-major order."""
        out = []
        for l in self.lower:
            for u in self.upper:
                if np.all(l < u):
                    out.append(BoxRegion(l, u))
        return out

    def upper_is_antichain(self) -> bool:
        return _is_antichain(self.upper, direction=+1)

    def lower_is_antichain(self) -> bool:
        return _is_antichain(self.lower, direction=-1)


def _is_antichain(bounds: Sequence[np.ndarray], direction: int) -> bool:
    for i, a in enumerate(bounds):
        for j, b in enumerate(bounds):
            if i == j:
                continue
            if np.all(direction * a <= direction * b):
                return False
    return True
