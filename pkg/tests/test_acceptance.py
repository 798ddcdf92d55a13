"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion. The synthetic calibration is a stand-in, so solvency-dependent
checks are property-based, never value-matching.
"""
from __future__ import annotations

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from allocfront import (
    InfeasibleError,
    Objective,
    ObjectiveBound,
    RunConfig,
    SolverConfig,
    SolverStatus,
    build_weighted_sum,
    new_lower_bounds,
    new_upper_bounds,
    payoff_table,
    restrict_and_rerun,
    run,
    solve,
)
from allocfront.cli import main as cli_main
from allocfront.model import AssetUniverse, ModelSpec, PortfolioWeights
from allocfront.objectives import l1_distance, market_risk, solvency_ratio
from allocfront.problem import from_model
from allocfront.service import create_app

from oracles import (
    grid_minimum,
    local_lower_bounds_oracle,
    local_upper_bounds_oracle,
    solvency_chain_oracle,
    strictly_dominates,
)


def _pass(name: str) -> None:
    print(f"\nACCEPTANCE PASS: {name}")


@pytest.fixture(scope="module")
def fifty_runs(example_spec):
    """50 seeded full runs with maxit cycling through {5, 10, 20}."""
    problem = from_model(example_spec)
    started = time.monotonic()
    archives = []
    for seed in range(50):
        maxit = (5, 10, 20)[seed % 3]
        cfg = RunConfig(maxit=maxit, solver=SolverConfig(seed=seed, multistart_count=3))
        archives.append(run(problem, cfg))
    elapsed = time.monotonic() - started
    return archives, elapsed


def test_payoff_extremes(example_spec):
    """Payoff extremes: best return 8.50% at 100% Private Equity, best
    volatility 0.00% all-cash, min-return payoff value 0.00%;
    tolerance 1e-6 relative; < 5 s."""
    started = time.monotonic()
    cfg = RunConfig(maxit=1, solver=SolverConfig(seed=0, multistart_count=8))
    l0, u0, records = payoff_table(example_spec, cfg)
    elapsed = time.monotonic() - started

    names = example_spec.universe.names
    ret_record = records[0]
    best_return = ret_record.values.value(Objective.RETURN)
    assert abs(best_return - 0.085) <= 1e-6 * 0.085
    assert ret_record.weights[names.index("Private Equity")] >= 1.0 - 1e-6

    vol_record = records[1]
    assert abs(vol_record.values.value(Objective.VOLATILITY)) <= 1e-6
    assert vol_record.weights[names.index("Cash")] >= 1.0 - 1e-6

    min_return_payoff = -float(u0[0])  # internal sense: worst return across payoff solves
    assert abs(min_return_payoff) <= 1e-6

    assert elapsed < 5.0, f"payoff table took {elapsed:.2f}s"
    _pass(f"payoff extremes (8.50% PE / 0.00% cash / 0.00% floor) in {elapsed:.2f}s")


def test_distance_values(example_spec, example_reference, solvency_optimal_weights):
    """199.76% +- 0.01pp to 100% Private Equity; 111.5% +- 0.05pp to the
    solvency-optimal portfolio."""
    e_pe = np.zeros(example_spec.n)
    e_pe[example_spec.universe.names.index("Private Equity")] = 1.0
    d1 = l1_distance(e_pe, example_reference) * 100.0
    assert abs(d1 - 199.76) <= 0.01

    d2 = l1_distance(solvency_optimal_weights, example_reference) * 100.0
    assert abs(d2 - 111.5) <= 0.05
    _pass(f"distance values ({d1:.4f}% and {d2:.4f}%)")


def test_bound_update_oracle_equivalence():
    """200 seeded random point sequences, m in {2,3,4}, <= 12 points each:
    incremental updates equal the brute-force local-bound sets exactly."""
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    for case in range(200):
        m = int(rng.integers(2, 5))
        k = int(rng.integers(1, 13))
        u0 = rng.uniform(1.5, 3.0, size=m)
        l0 = rng.uniform(-1.0, 0.5, size=m)
        points = [rng.uniform(l0, u0) for _ in range(k)]
        U = [u0.copy()]
        L = [l0.copy()]
        for p in points:
            U = new_upper_bounds(U, p)
            L = new_lower_bounds(L, p)
        got_u = {tuple(u.tolist()) for u in U}
        got_l = {tuple(l.tolist()) for l in L}
        assert got_u == local_upper_bounds_oracle(points, u0), f"upper mismatch, case {case}"
        assert got_l == local_lower_bounds_oracle(points, l0), f"lower mismatch, case {case}"
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.2f}s"
    _pass(f"bound-update oracle equivalence (200 sequences) in {elapsed:.2f}s")


def test_archive_nondominance_and_in_box(fifty_runs):
    """50 seeded runs: no archived vector strictly dominates another
    (tolerance 1e-9, normalized units); every archived intermediate lies
    strictly inside its originating box's upper bound; < 5 min total."""
    archives, elapsed = fifty_runs
    assert len(archives) == 50
    for archive in archives:
        scale = archive.normalization()
        normalized = [(r.internal - archive.initial_lower) / scale for r in archive.records]
        for i, a in enumerate(normalized):
            for j, b in enumerate(normalized):
                if i != j:
                    assert not strictly_dominates(a, b, margin=1e-9)
        for record in archive.intermediate_records:
            assert np.all(record.internal < record.box_upper)
    assert elapsed < 300.0, f"50 runs took {elapsed:.1f}s"
    _pass(f"archive nondominance + in-box over 50 runs in {elapsed:.1f}s")


def test_monotone_refinement(fifty_runs):
    """The selected-box normalized min-edge sequence is non-increasing in
    every run."""
    archives, _ = fifty_runs
    for archive in archives:
        edges = archive.selected_min_edges()
        for earlier, later in zip(edges, edges[1:]):
            assert later <= earlier + 1e-12
    _pass("monotone refinement across all 50 runs")


def test_coverage_at_budget_10(example_spec):
    """Unrestricted four-objective run, maxit=10: intermediate records land
    below and above the midpoint of every objective's initial range."""
    cfg = RunConfig(maxit=10, solver=SolverConfig(seed=0, multistart_count=3))
    archive = run(example_spec, cfg)
    assert len(archive.intermediate_records) == 10
    lo, hi = archive.natural_ranges()
    mid = 0.5 * (lo + hi)
    values = np.vstack([r.values.values for r in archive.intermediate_records])
    for k, objective in enumerate(archive.objectives):
        below = bool(np.any(values[:, k] < mid[k]))
        above = bool(np.any(values[:, k] > mid[k]))
        assert below and above, f"{objective.value}: intermediates do not straddle the midpoint"
    _pass("coverage at budget 10 (all four objectives straddle their midpoints)")


def test_solver_sanity_two_asset_and_grid():
    """Analytic 2-asset minimum variance within 1e-6; n<=3 convex instances
    match a dense-grid brute force within 1e-3 objective value."""
    universe = AssetUniverse(("a", "b"), np.array([0.05, 0.1]), np.array([0.1, 0.2]), np.eye(2))
    spec = ModelSpec(
        universe=universe,
        reference=PortfolioWeights(np.array([0.5, 0.5])),
        active_objectives=("return", "volatility"),
    )
    problem = from_model(spec)
    result = solve(build_weighted_sum(problem, [0.0, 1.0], use_surrogate=True),
                   SolverConfig(seed=0, multistart_count=4))
    assert result.ok
    assert abs(result.x[0] - 0.8) <= 1e-6

    universe3 = AssetUniverse(
        ("a", "b", "c"),
        np.array([0.02, 0.05, 0.09]),
        np.array([0.05, 0.12, 0.2]),
        np.eye(3),
    )
    spec3 = ModelSpec(
        universe=universe3,
        reference=PortfolioWeights(np.full(3, 1 / 3)),
        active_objectives=("return", "volatility"),
    )
    problem3 = from_model(spec3)
    cov = universe3.covariance()
    quad = solve(build_weighted_sum(problem3, [0.0, 1.0], use_surrogate=True),
                 SolverConfig(seed=1, multistart_count=4))
    grid_val, _ = grid_minimum(lambda w: float(w @ cov @ w), n=3, step=1e-3)
    assert abs(float(quad.x @ cov @ quad.x) - grid_val) <= 1e-3

    lin = solve(build_weighted_sum(problem3, [1.0, 0.0]), SolverConfig(seed=2, multistart_count=4))
    grid_lin, _ = grid_minimum(lambda w: -float(w @ universe3.mu), n=3, step=1e-3)
    assert abs(lin.objective - grid_lin) <= 1e-3
    _pass("solver sanity (2-asset analytic + n<=3 grid brute force)")


def test_solvency_composition_properties(calibration):
    """Radicand nonnegativity over 1e5 random pairs; market risk >= c1;
    composition identity exact on 100 random portfolios."""
    rng = np.random.default_rng(77)
    x3 = rng.uniform(-10, 10, size=100_000)
    x4 = rng.uniform(-10, 10, size=100_000)
    assert float((x3 * x3 + 1.5 * x3 * x4 + x4 * x4).min()) >= -1e-9

    for _ in range(2000):
        x = rng.normal(scale=4.0, size=5)
        assert market_risk(x, calibration) >= calibration.c1 - 1e-15

    A = calibration.A.tolist()
    b = calibration.b.tolist()
    P0 = calibration.P0.tolist()
    Ph = calibration.Phalf.tolist()
    for w in rng.dirichlet(np.ones(13), size=100):
        expected = solvency_chain_oracle(
            w, A, b, calibration.c1, calibration.c2, calibration.c3, calibration.c4,
            calibration.c5, P0, Ph,
        )
        assert solvency_ratio(w, calibration) == pytest.approx(expected, rel=1e-12)
    _pass("solvency composition properties (radicand, floor, chain identity)")


def test_restricted_run_workflow(example_spec):
    """Bounds return >= 1.83%, volatility <= 4.27%, distance <= 50% yield a
    payoff table with return floor >= 1.83% and distance ceiling <= 50%;
    return >= 9% is Infeasible."""
    cfg = RunConfig(maxit=3, solver=SolverConfig(seed=0, multistart_count=3))
    archive = restrict_and_rerun(
        example_spec,
        {
            Objective.RETURN: ObjectiveBound(lower=0.0183),
            Objective.VOLATILITY: ObjectiveBound(upper=0.0427),
            Objective.DISTANCE: ObjectiveBound(upper=0.50),
        },
        cfg,
    )
    lo, hi = archive.natural_ranges()
    by_obj = dict(zip(archive.objectives, zip(lo, hi)))
    assert by_obj[Objective.RETURN][0] >= 0.0183 - 1e-9
    assert by_obj[Objective.DISTANCE][1] <= 0.50 + 1e-9
    assert by_obj[Objective.VOLATILITY][1] <= 0.0427 + 1e-9

    with pytest.raises(InfeasibleError):
        restrict_and_rerun(
            example_spec, {Objective.RETURN: ObjectiveBound(lower=0.09)}, cfg
        )
    # the failure is surfaced as an infeasible solver status underneath
    infeasible_spec = example_spec.with_bounds({Objective.RETURN: ObjectiveBound(lower=0.09)})
    problem = from_model(infeasible_spec)
    result = solve(build_weighted_sum(problem, [1.0, 0, 0, 0]), SolverConfig(seed=0, multistart_count=3))
    assert result.status is SolverStatus.INFEASIBLE
    _pass("restricted-run workflow (tightened payoff + infeasible detection)")


def test_end_to_end_determinism(tmp_path, asset_path, calibration_path, reference_path):
    """Identical inputs and seed produce byte-identical artifacts via both
    the CLI and the service."""
    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    runner = CliRunner()
    args = [
        "optimize",
        "--assets", str(asset_path),
        "--calibration", str(calibration_path),
        "--reference", str(reference_path),
        "--maxit", "3",
        "--seed", "11",
        "--multistart", "3",
        "--format", "structured",
    ]
    for out in (out_a, out_b):
        result = runner.invoke(cli_main, args + ["--out", str(out)], catch_exceptions=False)
        assert result.exit_code == 0
    cli_bytes = out_a.read_bytes()
    assert cli_bytes == out_b.read_bytes()

    with TestClient(create_app(workers=1)) as client:
        payload = {
            "assets": asset_path.read_text(),
            "calibration": calibration_path.read_text(),
            "reference": reference_path.read_text(),
        }
        model_id = client.post("/models", json=payload).json()["model_id"]
        run_id = client.post(
            f"/models/{model_id}/runs", json={"maxit": 3, "seed": 11, "multistart": 3}
        ).json()["id"]
        deadline = time.monotonic() + 120
        while time.monotonic() < deadline:
            if client.get(f"/runs/{run_id}").json()["state"] in ("done", "failed"):
                break
            time.sleep(0.1)
        service_bytes = client.get(f"/runs/{run_id}/archive").content
    assert service_bytes == cli_bytes
    doc = json.loads(cli_bytes)
    assert doc["config"]["solver"]["seed"] == 11
    _pass("end-to-end determinism (CLI twice + service byte-identical)")
