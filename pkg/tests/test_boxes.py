from __future__ import annotations

import numpy as np
import pytest

from allocfront import (
    BoxRegion,
    DegenerateBoxError,
    LocalBoundSets,
    new_lower_bounds,
    new_upper_bounds,
    select_box,
)
from allocfront.boxes import _is_antichain, min_edge

from oracles import local_lower_bounds_oracle, local_upper_bounds_oracle


def as_set(bounds):
    return {tuple(np.asarray(b).tolist()) for b in bounds}


# --- BoxRegion / selection ------------------------------------------------------


def test_box_rejects_non_positive_edges():
    with pytest.raises(DegenerateBoxError):
        BoxRegion([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(DegenerateBoxError):
        BoxRegion([0.0, 2.0], [1.0, 1.0])


def test_select_single_box():
    boxes = [BoxRegion([0, 0], [1, 1])]
    assert select_box(boxes) == 0


def test_select_prefers_largest_min_edge():
    boxes = [BoxRegion([0, 0], [1, 0.1]), BoxRegion([0, 0], [0.5, 0.5])]
    assert select_box(boxes) == 1


def test_select_breaks_ties_by_creation_order():
    boxes = [
        BoxRegion([0, 0], [0.3, 1.0]),
        BoxRegion([0, 0], [1.0, 0.3]),
        BoxRegion([0, 0], [0.2, 0.2]),
    ]
    assert select_box(boxes) == 0  # min edges (0.3, 0.3, 0.2): first max wins


def test_select_respects_scale():
    boxes = [BoxRegion([0, 0], [1.0, 0.2]), BoxRegion([0, 0], [0.5, 0.5])]
    # normalizing the second axis by 0.2 makes box 0 the widest
    assert select_box(boxes, scale=np.array([1.0, 0.2])) == 0
    assert min_edge(boxes[0], np.array([1.0, 0.2])) == pytest.approx(1.0)


# --- split updates ----------------------------------------------------------------


def test_upper_update_2d_example():
    out = new_upper_bounds([np.array([4.0, 4.0])], np.array([2.0, 2.0]))
    assert as_set(out) == {(2.0, 4.0), (4.0, 2.0)}


def test_upper_update_no_strict_dominance_is_noop():
    U = [np.array([4.0, 4.0])]
    out = new_upper_bounds(U, np.array([4.0, 2.0]))  # equal in one component
    assert as_set(out) == as_set(U)


def test_upper_update_3d_example():
    out = new_upper_bounds([np.array([1.0, 1.0, 1.0])], np.array([0.0, 0.0, 0.0]))
    assert as_set(out) == {(0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 0.0)}


def test_lower_update_2d_example():
    out = new_lower_bounds([np.array([0.0, 0.0])], np.array([1.0, 1.0]))
    assert as_set(out) == {(1.0, 0.0), (0.0, 1.0)}


def test_lower_update_outside_cone_is_noop():
    L = [np.array([0.0, 0.0])]
    out = new_lower_bounds(L, np.array([-1.0, 1.0]))
    assert as_set(out) == as_set(L)


def test_lower_update_3d_example():
    out = new_lower_bounds([np.array([0.0, 0.0, 0.0])], np.array([0.5, 0.5, 0.5]))
    assert as_set(out) == {(0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.5)}


def test_updates_match_oracle_on_seeded_sequences():
    # smaller version of the acceptance sweep for unit-level feedback
    rng = np.random.default_rng(42)
    for case in range(30):
        m = int(rng.integers(2, 5))
        k = int(rng.integers(1, 13))
        u0 = np.full(m, 1.0)
        l0 = np.zeros(m)
        points = [rng.uniform(0.0, 1.0, size=m) for _ in range(k)]
        U = [u0.copy()]
        L = [l0.copy()]
        for p in points:
            U = new_upper_bounds(U, p)
            L = new_lower_bounds(L, p)
        assert as_set(U) == local_upper_bounds_oracle(points, u0), f"case {case} (upper)"
        assert as_set(L) == local_lower_bounds_oracle(points, l0), f"case {case} (lower)"
        assert _is_antichain(U, +1)
        assert _is_antichain(L, -1)


def test_duplicate_points_do_not_duplicate_bounds():
    u0 = np.array([1.0, 1.0])
    p = np.array([0.4, 0.6])
    U = new_upper_bounds([u0], p)
    U = new_upper_bounds(U, p.copy())
    assert as_set(U) == local_upper_bounds_oracle([p, p], u0)


def test_dominated_new_point_leaves_bounds_unchanged():
    u0 = np.array([1.0, 1.0, 1.0])
    first = np.array([0.2, 0.2, 0.2])
    worse = np.array([0.5, 0.5, 0.5])  # strictly dominated by first
    U1 = new_upper_bounds([u0], first)
    U2 = new_upper_bounds(U1, worse)
    assert as_set(U1) == as_set(U2)


def test_local_bound_sets_box_enumeration():
    sets = LocalBoundSets(np.zeros(2), np.ones(2))
    sets.add_point(np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    boxes = sets.boxes()
    keys = {b.key() for b in boxes}
    assert ((0.0, 0.5), (1.0, 1.0)) not in keys  # l < u must hold strictly everywhere
    for box in boxes:
        assert np.all(box.lower < box.upper)
    assert sets.upper_is_antichain() and sets.lower_is_antichain()
