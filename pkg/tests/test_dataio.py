from __future__ import annotations

import numpy as np
import pytest

from allocfront import Objective, RunConfig, SolverConfig, run
from allocfront import dataio
from allocfront.dataio import (
    DataFormatError,
    ModelValidationError,
    artifact_bytes,
    build_artifact,
    delimited_bytes,
    export_archive,
    load_artifact,
    load_asset_table,
    load_calibration,
    load_constraints,
    load_correlation,
    load_delimited,
    load_model,
    load_weights,
    model_from_dict,
    model_hash,
    model_to_dict,
    render_report,
    run_config_dict,
)


@pytest.fixture(scope="module")
def small_archive(asset_path, calibration_path, reference_path):
    spec, _ = load_model(asset_path, calibration_path=calibration_path, reference_path=reference_path)
    cfg = RunConfig(maxit=3, solver=SolverConfig(seed=5, multistart_count=3))
    archive = run(spec, cfg)
    return spec, cfg, archive


# --- parsing -----------------------------------------------------------------


def test_load_asset_table_bundled(asset_path):
    names, weights, mu, sigma, notes = load_asset_table(asset_path)
    assert len(names) == 13
    assert mu[names.index("Private Equity")] == pytest.approx(0.085)
    assert sigma[names.index("Cash")] == 0.0
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert notes == []  # the bundled weights sum to exactly 100%


def test_load_asset_table_errors(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("asset,w,r,v\nCash,100,0,0\n")
    with pytest.raises(DataFormatError):
        load_asset_table(bad_header)

    bad_number = tmp_path / "n.csv"
    bad_number.write_text("name,weight,expected_return,volatility\nCash,abc,0,0\n")
    with pytest.raises(DataFormatError) as err:
        load_asset_table(bad_number)
    assert "2" in str(err.value)  # line number in the message

    duplicate = tmp_path / "d.csv"
    duplicate.write_text(
        "name,weight,expected_return,volatility\nCash,50,0,0\nCash,50,0,0\n"
    )
    with pytest.raises(DataFormatError):
        load_asset_table(duplicate)


def test_correlation_dimension_error(tmp_path):
    path = tmp_path / "corr.csv"
    path.write_text("\n".join(",".join(["1.0"] * 12) for _ in range(12)) + "\n")
    with pytest.raises(DataFormatError):
        load_correlation(path, 13)


def test_correlation_with_header_and_labels(tmp_path):
    path = tmp_path / "corr.csv"
    path.write_text(",a,b\na,1.0,0.25\nb,0.25,1.0\n")
    rho = load_correlation(path, 2)
    assert np.allclose(rho, [[1.0, 0.25], [0.25, 1.0]])


def test_load_calibration_bundled(calibration_path):
    cal = load_calibration(calibration_path)
    assert cal.A.shape == (8, 13)
    assert cal.c2 > 0 and cal.c3 > 0 and cal.c4 > 0
    text = calibration_path.read_text()
    assert "synthetic-calibration" in text  # provenance label stays in the file


def test_load_calibration_missing_key(tmp_path):
    path = tmp_path / "cal.yaml"
    path.write_text("A: [[0.0]]\nb: [0.0]\nc1: 0\nc2: 1\nc3: 1\n")
    with pytest.raises(DataFormatError) as err:
        load_calibration(path)
    assert "c4" in str(err.value)


def test_load_constraints(tmp_path, asset_path):
    names, *_ = load_asset_table(asset_path)
    path = tmp_path / "constraints.yaml"
    path.write_text(
        """
groups:
  - label: real estate
    assets: ["Real Estate Germany", "Real Estate Intl."]
    lower: 0.05
    upper: 0.25
objective_bounds:
  distance: {max: 0.5}
  return: {min: 0.0183}
"""
    )
    groups, bounds = load_constraints(path, names)
    assert groups[0].indices == (0, 1)
    assert bounds[Objective.DISTANCE].upper == 0.5
    assert bounds[Objective.RETURN].lower == 0.0183

    bad = tmp_path / "bad.yaml"
    bad.write_text("groups:\n  - assets: ['Nope']\n    lower: 0\n    upper: 1\n")
    with pytest.raises(DataFormatError):
        load_constraints(bad, names)
    bad2 = tmp_path / "bad2.yaml"
    bad2.write_text("objective_bounds:\n  sharpe: {max: 1}\n")
    with pytest.raises(DataFormatError):
        load_constraints(bad2, names)


def test_load_weights_renormalizes(reference_path, asset_path):
    names, *_ = load_asset_table(asset_path)
    w, notes = load_weights(reference_path, names)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert notes and "re-normalized" in notes[0]


def test_load_weights_missing_asset(tmp_path, asset_path):
    names, *_ = load_asset_table(asset_path)
    path = tmp_path / "w.csv"
    path.write_text("name,weight\nCash,100\n")
    with pytest.raises(DataFormatError):
        load_weights(path, names)


def test_load_model_without_calibration_disables_solvency(asset_path):
    spec, notes = load_model(asset_path)
    assert spec.solvency is None
    assert Objective.SOLVENCY not in spec.active_objectives
    assert len(spec.active_objectives) == 3
    assert any("solvency objective disabled" in n for n in notes)
    assert any("identity" in n for n in notes)


def test_load_model_rejects_bad_weight_sum(tmp_path, calibration_path):
    path = tmp_path / "assets.csv"
    path.write_text(
        "name,weight,expected_return,volatility\na,50,1,5\nb,30,2,10\n"
    )  # sums to 80%: beyond the 0.5% re-normalization window
    with pytest.raises(ModelValidationError) as err:
        load_model(path)
    assert any("simplex_sum" in v.code for v in err.value.violations)


# --- model round trip -----------------------------------------------------------


def test_model_dict_round_trip(example_spec):
    doc = model_to_dict(example_spec)
    clone = model_from_dict(doc)
    assert clone.universe.names == example_spec.universe.names
    assert np.array_equal(clone.universe.mu, example_spec.universe.mu)
    assert np.array_equal(clone.universe.rho, example_spec.universe.rho)
    assert np.array_equal(clone.reference.w, example_spec.reference.w)
    assert np.array_equal(clone.solvency.A, example_spec.solvency.A)
    assert clone.active_objectives == example_spec.active_objectives
    assert model_hash(clone) == model_hash(example_spec)


def test_model_hash_changes_with_content(example_spec):
    doc = model_to_dict(example_spec)
    doc["reference"][0] += 1e-9
    assert model_hash(model_from_dict(doc)) != model_hash(example_spec)


# --- artifacts -------------------------------------------------------------------


def test_report_has_range_header(small_archive):
    _, _, archive = small_archive
    report = render_report(archive)
    lines = report.splitlines()
    assert lines[0] == "PF | return | volatility | solvency | distance"
    assert "[0.00, 8.50%]" in lines[1]
    assert "[0.00, 18.00%]" in lines[1]
    assert "[0.00, 199.76%]" in lines[1]
    assert len(lines) == 2 + len(archive.records)


def test_report_payoff_only_when_no_intermediates(example_spec):
    from allocfront import payoff_table
    from allocfront.engine import RepresentationArchive

    cfg = RunConfig(maxit=1, solver=SolverConfig(seed=1, multistart_count=2))
    l0, u0, records = payoff_table(example_spec, cfg)
    archive = RepresentationArchive(
        objectives=tuple(example_spec.active_objectives),
        asset_names=example_spec.universe.names,
        initial_lower=l0,
        initial_upper=u0,
        records=records,
    )
    report = render_report(archive)
    assert len(report.splitlines()) == 2 + 4


def test_structured_round_trip_is_byte_identical(small_archive, tmp_path):
    spec, cfg, archive = small_archive
    digest = model_hash(spec)
    config = run_config_dict(cfg)
    path = tmp_path / "archive.json"
    export_archive(archive, path, "structured", model_digest=digest, config=config)
    first = path.read_bytes()
    doc = load_artifact(path)
    again = artifact_bytes(doc)
    assert again == first
    assert doc["model_hash"] == digest
    assert len(doc["records"]) == len(archive.records)


def test_structured_display_percentages(small_archive):
    spec, cfg, archive = small_archive
    doc = build_artifact(archive, model_hash(spec), run_config_dict(cfg))
    rec = doc["records"][0]
    assert rec["display"]["return"] == "8.50%"
    assert rec["values"]["return"] == pytest.approx(0.085, rel=1e-9)


def test_delimited_round_trip(small_archive, tmp_path):
    _, _, archive = small_archive
    path = tmp_path / "archive.csv"
    path.write_bytes(delimited_bytes(archive))
    records = load_delimited(path)
    assert len(records) == len(archive.records)
    for loaded, original in zip(records, archive.records):
        assert loaded["index"] == original.index
        assert loaded["kind"] == original.kind
        assert loaded["iteration"] == original.iteration
        for objective, value in original.values.as_dict().items():
            assert loaded["values"][objective] == value  # repr round-trip is exact
        for name, w in zip(archive.asset_names, original.weights):
            assert loaded["weights"][name] == float(w)
        if original.box_lower is not None:
            for objective, value in zip(archive.objectives, original.box_lower):
                assert loaded["box_lower"][objective.value] == float(value)


def test_export_deterministic(small_archive, tmp_path):
    spec, cfg, archive = small_archive
    digest = model_hash(spec)
    config = run_config_dict(cfg)
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    export_archive(archive, a, "structured", model_digest=digest, config=config)
    export_archive(archive, b, "structured", model_digest=digest, config=config)
    assert a.read_bytes() == b.read_bytes()


def test_export_empty_archive_rejected(example_spec, tmp_path):
    from allocfront.engine import RepresentationArchive

    empty = RepresentationArchive(
        objectives=tuple(example_spec.active_objectives),
        asset_names=example_spec.universe.names,
        initial_lower=np.zeros(4),
        initial_upper=np.ones(4),
    )
    with pytest.raises(ValueError):
        export_archive(empty, tmp_path / "x.json", "structured")
    with pytest.raises(ValueError):
        export_archive(empty, tmp_path / "x.bin", "parquet")
