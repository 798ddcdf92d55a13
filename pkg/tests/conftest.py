from __future__ import annotations

import numpy as np
import pytest

from allocfront import (
    AssetUniverse,
    ModelSpec,
    Objective,
    PortfolioWeights,
    RunConfig,
    SolverConfig,
    dataio,
)
from allocfront.problem import InternalObjective, MultiObjectiveProblem


@pytest.fixture(scope="session")
def asset_path():
    return dataio.bundled_path("example_assets.csv")


@pytest.fixture(scope="session")
def calibration_path():
    return dataio.bundled_path("synthetic_calibration.yaml")


@pytest.fixture(scope="session")
def reference_path():
    return dataio.bundled_path("example_reference.csv")


@pytest.fixture(scope="session")
def solvopt_path():
    return dataio.bundled_path("example_solvency_optimal.csv")


@pytest.fixture(scope="session")
def example_spec(asset_path, calibration_path, reference_path) -> ModelSpec:
    """The four-objective example model: bundled asset data and reference
    portfolio, synthetic calibration, identity correlation."""
    spec, _ = dataio.load_model(
        asset_path, calibration_path=calibration_path, reference_path=reference_path
    )
    return spec


@pytest.fixture(scope="session")
def example_reference(example_spec) -> np.ndarray:
    return example_spec.reference.w


@pytest.fixture(scope="session")
def solvency_optimal_weights(example_spec, solvopt_path) -> np.ndarray:
    w, _ = dataio.load_weights(solvopt_path, example_spec.universe.names)
    return w


@pytest.fixture(scope="session")
def calibration(example_spec):
    return example_spec.solvency


@pytest.fixture
def fast_cfg() -> RunConfig:
    return RunConfig(maxit=5, solver=SolverConfig(seed=0, multistart_count=3))


def two_asset_universe(sigma=(0.1, 0.2), mu=(0.05, 0.1), rho=None) -> AssetUniverse:
    rho = np.eye(2) if rho is None else np.asarray(rho)
    return AssetUniverse(("a", "b"), np.asarray(mu), np.asarray(sigma), rho)


@pytest.fixture
def two_asset_spec() -> ModelSpec:
    universe = two_asset_universe()
    return ModelSpec(
        universe=universe,
        reference=PortfolioWeights(np.array([0.5, 0.5])),
        active_objectives=("return", "volatility"),
    )


def toy_biobjective() -> MultiObjectiveProblem:
    """f = (w1, w2) on the 2-simplex: both minimized, front is the diagonal."""

    def f1(w):
        return float(w[0])

    def f2(w):
        return float(w[1])

    objs = (
        InternalObjective(
            Objective.VOLATILITY, f1, lambda w: np.array([1.0, 0.0]), natural_value=f1
        ),
        InternalObjective(
            Objective.DISTANCE, f2, lambda w: np.array([0.0, 1.0]), natural_value=f2
        ),
    )
    return MultiObjectiveProblem(
        n=2,
        objectives=objs,
        group_matrix=np.zeros((0, 2)),
        group_rhs=np.zeros(0),
        reference=np.array([0.5, 0.5]),
    )


@pytest.fixture
def toy_problem() -> MultiObjectiveProblem:
    return toy_biobjective()
