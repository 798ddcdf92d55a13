from __future__ import annotations

import numpy as np
import pytest

from allocfront import (
    AssetUniverse,
    GroupConstraint,
    ModelSpec,
    Objective,
    ObjectiveBound,
    PortfolioWeights,
    SolvencyCalibration,
    validate_model,
)
from allocfront.model import (
    P_MARKET_0,
    P_MARKET_HALF,
    validate_calibration,
    validate_group,
    validate_universe,
    validate_weights,
)

from conftest import two_asset_universe


def codes(violations):
    return {v.code for v in violations}


def test_bundled_model_is_valid(example_spec):
    assert validate_model(example_spec) == []


def test_example_universe_with_identity_rho_and_current_weights(asset_path):
    from allocfront import dataio

    names, weights, mu, sigma, _ = dataio.load_asset_table(asset_path)
    spec = ModelSpec(
        universe=AssetUniverse(tuple(names), mu, sigma, np.eye(len(names))),
        reference=PortfolioWeights(weights),
        solvency=None,
        active_objectives=("return", "volatility", "distance"),
    )
    assert validate_model(spec) == []


def test_simplex_sum_violation():
    bad = PortfolioWeights(np.array([0.5, 0.6]))
    assert "simplex_sum" in codes(validate_weights(bad))


def test_negative_weight_violation():
    assert "weights_negative" in codes(validate_weights(PortfolioWeights(np.array([-0.1, 1.1]))))


def test_correlation_out_of_range():
    universe = two_asset_universe(rho=np.array([[1.0, 1.2], [1.2, 1.0]]))
    assert "correlation_range" in codes(validate_universe(universe))


def test_correlation_symmetry_and_diagonal():
    universe = two_asset_universe(rho=np.array([[1.0, 0.2], [0.3, 1.0]]))
    assert "correlation_symmetry" in codes(validate_universe(universe))
    universe = two_asset_universe(rho=np.array([[0.9, 0.2], [0.2, 1.0]]))
    assert "correlation_diagonal" in codes(validate_universe(universe))


def test_correlation_psd_check():
    rho = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    universe = AssetUniverse(("a", "b", "c"), np.zeros(3), np.ones(3), rho)
    assert "correlation_psd" in codes(validate_universe(universe))


def test_negative_sigma_flagged():
    universe = two_asset_universe(sigma=(-0.1, 0.2))
    assert "sigma_negative" in codes(validate_universe(universe))


def test_group_validation():
    assert validate_group(GroupConstraint((0, 1), 0.1, 0.5), n=3) == []
    assert "group_empty" in codes(validate_group(GroupConstraint((), 0.1, 0.5), 3))
    assert "group_duplicate" in codes(validate_group(GroupConstraint((1, 1), 0.1, 0.5), 3))
    assert "group_range" in codes(validate_group(GroupConstraint((5,), 0.1, 0.5), 3))
    assert "group_bounds" in codes(validate_group(GroupConstraint((0,), 0.6, 0.4), 3))


def test_calibration_validation(calibration):
    assert validate_calibration(calibration, n=13) == []
    bad = SolvencyCalibration(
        A=np.zeros((8, 13)), b=np.zeros(8), c1=0.0, c2=-1.0, c3=1.0, c4=1.0, c5=0.0
    )
    assert "calibration_constants" in codes(validate_calibration(bad, 13))
    wrong_shape = SolvencyCalibration(
        A=np.zeros((8, 12)), b=np.zeros(8), c1=0.0, c2=1.0, c3=1.0, c4=1.0, c5=0.0
    )
    assert "calibration_shape" in codes(validate_calibration(wrong_shape, 13))
    tampered = SolvencyCalibration(
        A=np.zeros((8, 13)), b=np.zeros(8), c1=0.0, c2=1.0, c3=1.0, c4=1.0, c5=0.0,
        P0=np.eye(5), Phalf=P_MARKET_HALF,
    )
    assert "scenario_matrices" in codes(validate_calibration(tampered, 13))


def test_scenario_matrices_are_psd():
    for matrix in (P_MARKET_0, P_MARKET_HALF):
        assert np.allclose(matrix, matrix.T)
        assert float(np.linalg.eigvalsh(matrix).min()) >= -1e-9


def test_scenario_matrix_entries():
    expected_half = np.array(
        [
            [1.0, 0.5, 0.5, 0.5, 0.25],
            [0.5, 1.0, 0.75, 0.75, 0.25],
            [0.5, 0.75, 1.0, 0.5, 0.25],
            [0.5, 0.75, 0.5, 1.0, 0.25],
            [0.25, 0.25, 0.25, 0.25, 1.0],
        ]
    )
    assert np.array_equal(P_MARKET_HALF, expected_half)
    assert np.array_equal(P_MARKET_0[0], np.array([1.0, 0.0, 0.0, 0.0, 0.25]))


def test_active_objectives_validation(two_asset_spec):
    too_few = ModelSpec(
        universe=two_asset_spec.universe,
        reference=two_asset_spec.reference,
        active_objectives=("return",),
    )
    assert "active_objectives" in codes(validate_model(too_few))
    solvency_without_cal = ModelSpec(
        universe=two_asset_spec.universe,
        reference=two_asset_spec.reference,
        active_objectives=("return", "solvency"),
    )
    assert "active_objectives" in codes(validate_model(solvency_without_cal))


def test_objective_bounds_validation(two_asset_spec):
    bad = ModelSpec(
        universe=two_asset_spec.universe,
        reference=two_asset_spec.reference,
        objective_bounds=((Objective.RETURN, ObjectiveBound(lower=0.1, upper=0.05)),),
        active_objectives=("return", "volatility"),
    )
    assert "objective_bounds" in codes(validate_model(bad))


def test_with_bounds_merges_tighter(two_asset_spec):
    spec = two_asset_spec.with_bounds({Objective.RETURN: ObjectiveBound(lower=0.01)})
    spec = spec.with_bounds({Objective.RETURN: ObjectiveBound(lower=0.02, upper=0.08)})
    bound = spec.bound_for(Objective.RETURN)
    assert bound.lower == 0.02 and bound.upper == 0.08


def test_negation_convention_on_grid():
    # minimizers of -f coincide with maximizers of f on an enumerated simplex grid
    rng = np.random.default_rng(3)
    mu = rng.normal(size=3)
    grid = []
    k = 20
    for i in range(k + 1):
        for j in range(k + 1 - i):
            grid.append((i / k, j / k, (k - i - j) / k))
    grid = np.array(grid)
    f = grid @ mu
    max_set = set(np.flatnonzero(f == f.max()).tolist())
    min_set = set(np.flatnonzero(-f == (-f).min()).tolist())
    assert max_set == min_set


def test_domain_types_are_immutable(example_spec):
    with pytest.raises(ValueError):
        example_spec.universe.mu[0] = 1.0
    with pytest.raises(ValueError):
        example_spec.reference.w[0] = 1.0
