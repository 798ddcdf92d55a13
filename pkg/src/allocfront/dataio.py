"""File formats, parsing and persistence.

The percent-vs-fraction boundary lives entirely here: asset tables and
weight files carry percent numbers and are parsed to fractions; reports
render percentages with two decimals. Structured and
delimited artifacts store fractions at full precision (plus display
percentages), so exports are byte-deterministic and round-trip exactly.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np
import yaml

from .engine import PortfolioRecord, RepresentationArchive, RunConfig
from .model import (
    CANONICAL_OBJECTIVES,
    AssetUniverse,
    GroupConstraint,
    ModelSpec,
    Objective,
    ObjectiveBound,
    PortfolioWeights,
    RENORMALIZE_TOL,
    SolvencyCalibration,
    Violation,
    validate_model,
)
__all__ = [
    "DataFormatError",
    "ModelValidationError",
    "bundled_path",
    "load_asset_table",
    "load_correlation",
    "load_calibration",
    "load_constraints",
    "load_weights",
    "load_model",
    "model_to_dict",
    "model_from_dict",
    "model_hash",
    "run_config_dict",
    "build_artifact",
    "artifact_bytes",
    "render_report",
    "delimited_bytes",
    "load_delimited",
    "load_artifact",
    "export_archive",
    "FORMATS",
]

logger = logging.getLogger(__name__)

FORMATS = ("structured", "delimited", "report")
ARTIFACT_FORMAT = "allocfront-archive"
ARTIFACT_VERSION = 1


class DataFormatError(ValueError):
    """A parse failure with file position context."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = f"{path or '<input>'}" + (f":{line}" if line is not None else "")
        super().__init__(f"{where}: {message}")


class ModelValidationError(ValueError):
    """Aggregated model invariant violations."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


def bundled_path(name: str) -> Path:
    """Path of a data file shipped with the package."""
    return Path(__file__).resolve().parent / "data" / name


def _read_text(source: Union[str, Path], *, inline: bool = False) -> tuple[str, str]:
    """Return (text, display_name); ``inline`` marks raw content strings."""
    if inline:
        return str(source), "<inline>"
    path = Path(source)
    return path.read_text(), str(path)


def _parse_float(token: str, where: str, path: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise DataFormatError(f"{where}: not a number: {token!r}", path, line) from None


def load_asset_table(
    source: Union[str, Path], *, inline: bool = False
) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray, list[str]]:
    """Parse asset rows: name, current weight %, return %, volatility %.

    Returns (names, weights, mu, sigma, notes) with fractional values; the
    weight column is re-normalized when its sum is within 0.5% of one.
    """
    text, path = _read_text(source, inline=inline)
    reader = csv.reader(io.StringIO(text))
    rows = [(i + 1, row) for i, row in enumerate(reader) if row and any(c.strip() for c in row)]
    if not rows:
        raise DataFormatError("asset table is empty", path)
    header_line, header = rows[0]
    expected = ["name", "weight", "expected_return", "volatility"]
    if [c.strip().lower() for c in header] != expected:
        raise DataFormatError(
            f"header must be {','.join(expected)}, got {','.join(header)}", path, header_line
        )
    names: list[str] = []
    weights, mu, sigma = [], [], []
    for line, row in rows[1:]:
        if len(row) != 4:
            raise DataFormatError(f"expected 4 fields, got {len(row)}", path, line)
        name = row[0].strip()
        if not name:
            raise DataFormatError("empty asset name", path, line)
        if name in names:
            raise DataFormatError(f"duplicate asset name {name!r}", path, line)
        names.append(name)
        weights.append(_parse_float(row[1], "weight", path, line) / 100.0)
        mu.append(_parse_float(row[2], "expected_return", path, line) / 100.0)
        sigma.append(_parse_float(row[3], "volatility", path, line) / 100.0)
    w = np.array(weights)
    notes: list[str] = []
    w, note = _renormalize(w, "asset-table weights")
    if note:
        notes.append(note)
    return names, w, np.array(mu), np.array(sigma), notes


def _renormalize(w: np.ndarray, label: str) -> tuple[np.ndarray, Optional[str]]:
    total = float(w.sum())
    if abs(total - 1.0) <= 1e-12:
        return w, None
    if abs(total - 1.0) <= RENORMALIZE_TOL:
        note = f"{label}: sum {total * 100:.4f}% re-normalized to 100%"
        logger.warning(note)
        return w / total, note
    return w, None  # out-of-band sums surface as validation errors downstream


def load_correlation(
    source: Union[str, Path], n: int, *, inline: bool = False
) -> np.ndarray:
    """Parse an n x n correlation grid; header/label rows and columns are
    tolerated and ignored."""
    text, path = _read_text(source, inline=inline)
    reader = csv.reader(io.StringIO(text))
    raw = [(i + 1, [c for c in row]) for i, row in enumerate(reader) if row and any(c.strip() for c in row)]
    if not raw:
        raise DataFormatError("correlation file is empty", path)

    def is_number(tok: str) -> bool:
        try:
            float(tok)
            return True
        except ValueError:
            return False

    rows = []
    for line, row in raw:
        cells = [c.strip() for c in row]
        if not any(is_number(c) for c in cells):
            continue  # header row
        if cells and not is_number(cells[0]):
            cells = cells[1:]  # row label
        rows.append((line, [_parse_float(c, "correlation", path, line) for c in cells]))
    if len(rows) != n:
        raise DataFormatError(f"expected {n} correlation rows, got {len(rows)}", path)
    for line, row in rows:
        if len(row) != n:
            raise DataFormatError(f"expected {n} columns, got {len(row)}", path, line)
    return np.array([row for _, row in rows])


def load_calibration(
    source: Union[str, Path], *, inline: bool = False
) -> SolvencyCalibration:
    """Parse the key-tree calibration file (A, b, c1..c5).

    The two scenario matrices are fixed constants and are never read from
    files.
    """
    text, path = _read_text(source, inline=inline)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DataFormatError(f"invalid calibration file: {exc}", path) from exc
    if not isinstance(doc, dict):
        raise DataFormatError("calibration file must be a mapping", path)
    missing = [k for k in ("A", "b", "c1", "c2", "c3", "c4", "c5") if k not in doc]
    if missing:
        raise DataFormatError(f"calibration is missing keys: {', '.join(missing)}", path)
    try:
        return SolvencyCalibration(
            A=np.array(doc["A"], dtype=float),
            b=np.array(doc["b"], dtype=float),
            c1=float(doc["c1"]),
            c2=float(doc["c2"]),
            c3=float(doc["c3"]),
            c4=float(doc["c4"]),
            c5=float(doc["c5"]),
        )
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"invalid calibration values: {exc}", path) from exc


def load_constraints(
    source: Union[str, Path], names: Sequence[str], *, inline: bool = False
) -> tuple[list[GroupConstraint], dict[Objective, ObjectiveBound]]:
    """Parse asset-group constraints and objective bounds (fractions)."""
    text, path = _read_text(source, inline=inline)
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise DataFormatError(f"invalid constraints file: {exc}", path) from exc
    if not isinstance(doc, dict):
        raise DataFormatError("constraints file must be a mapping", path)
    index_of = {name: i for i, name in enumerate(names)}
    groups: list[GroupConstraint] = []
    for entry in doc.get("groups", []) or []:
        assets = entry.get("assets", [])
        indices = []
        for asset in assets:
            if asset not in index_of:
                raise DataFormatError(f"unknown asset in group: {asset!r}", path)
            indices.append(index_of[asset])
        groups.append(
            GroupConstraint(
                indices=tuple(indices),
                lower=float(entry.get("lower", 0.0)),
                upper=float(entry.get("upper", 1.0)),
                label=str(entry.get("label", "")),
            )
        )
    bounds: dict[Objective, ObjectiveBound] = {}
    for key, spec in (doc.get("objective_bounds", {}) or {}).items():
        try:
            objective = Objective(key)
        except ValueError:
            raise DataFormatError(f"unknown objective in bounds: {key!r}", path) from None
        lower = spec.get("min") if isinstance(spec, dict) else None
        upper = spec.get("max") if isinstance(spec, dict) else None
        bounds[objective] = ObjectiveBound(lower=lower, upper=upper)
    return groups, bounds


def load_weights(
    source: Union[str, Path], names: Sequence[str], *, inline: bool = False
) -> tuple[np.ndarray, list[str]]:
    """Parse a name,weight-% file and align it with the universe order."""
    text, path = _read_text(source, inline=inline)
    reader = csv.reader(io.StringIO(text))
    rows = [(i + 1, row) for i, row in enumerate(reader) if row and any(c.strip() for c in row)]
    if not rows:
        raise DataFormatError("weights file is empty", path)
    header = [c.strip().lower() for c in rows[0][1]]
    if header != ["name", "weight"]:
        raise DataFormatError(f"header must be name,weight, got {','.join(rows[0][1])}", path, rows[0][0])
    values: dict[str, float] = {}
    for line, row in rows[1:]:
        if len(row) != 2:
            raise DataFormatError(f"expected 2 fields, got {len(row)}", path, line)
        name = row[0].strip()
        if name not in names:
            raise DataFormatError(f"unknown asset {name!r}", path, line)
        if name in values:
            raise DataFormatError(f"duplicate asset {name!r}", path, line)
        values[name] = _parse_float(row[1], "weight", path, line) / 100.0
    missing = [n for n in names if n not in values]
    if missing:
        raise DataFormatError(f"missing weights for: {', '.join(missing)}", path)
    w = np.array([values[n] for n in names])
    notes: list[str] = []
    w, note = _renormalize(w, "weights")
    if note:
        notes.append(note)
    return w, notes


def load_model(
    asset_path: Union[str, Path],
    calibration_path: Optional[Union[str, Path]] = None,
    correlation_path: Optional[Union[str, Path]] = None,
    constraints_path: Optional[Union[str, Path]] = None,
    reference_path: Optional[Union[str, Path]] = None,
    objectives: Optional[Sequence[Union[str, Objective]]] = None,
    *,
    inline: bool = False,
) -> tuple[ModelSpec, list[str]]:
    """Assemble and validate a model from its files.

    Returns (spec, notes); raises DataFormatError on parse failures and
    ModelValidationError with every violation on invalid data.
    """
    names, current, mu, sigma, notes = load_asset_table(asset_path, inline=inline)
    n = len(names)
    if correlation_path is not None:
        rho = load_correlation(correlation_path, n, inline=inline)
    else:
        rho = np.eye(n)
        note = "no correlation file given; defaulting to the identity matrix"
        logger.warning(note)
        notes.append(note)
    universe = AssetUniverse(names=tuple(names), mu=mu, sigma=sigma, rho=rho)

    solvency = None
    if calibration_path is not None:
        solvency = load_calibration(calibration_path, inline=inline)
    else:
        note = "no calibration given; solvency objective disabled"
        logger.warning(note)
        notes.append(note)

    groups: list[GroupConstraint] = []
    bounds: dict[Objective, ObjectiveBound] = {}
    if constraints_path is not None:
        groups, bounds = load_constraints(constraints_path, names, inline=inline)

    if reference_path is not None:
        reference_w, ref_notes = load_weights(reference_path, names, inline=inline)
        notes.extend(ref_notes)
    else:
        reference_w = current

    if objectives is None:
        active = tuple(
            o for o in CANONICAL_OBJECTIVES if o is not Objective.SOLVENCY or solvency is not None
        )
    else:
        active = tuple(Objective(o) for o in objectives)

    spec = ModelSpec(
        universe=universe,
        reference=PortfolioWeights(reference_w),
        groups=tuple(groups),
        solvency=solvency,
        objective_bounds=tuple(sorted(bounds.items(), key=lambda kv: kv[0].value)),
        active_objectives=active,
    )
    violations = validate_model(spec)
    if violations:
        raise ModelValidationError(violations)
    return spec, notes


# ---------------------------------------------------------------------------
# model serialization


def model_to_dict(spec: ModelSpec) -> dict:
    return {
        "assets": {
            "names": list(spec.universe.names),
            "mu": spec.universe.mu.tolist(),
            "sigma": spec.universe.sigma.tolist(),
            "rho": spec.universe.rho.tolist(),
        },
        "reference": spec.reference.w.tolist(),
        "groups": [
            {
                "label": g.label,
                "indices": list(g.indices),
                "lower": g.lower,
                "upper": g.upper,
            }
            for g in spec.groups
        ],
        "solvency": None
        if spec.solvency is None
        else {
            "A": spec.solvency.A.tolist(),
            "b": spec.solvency.b.tolist(),
            "c1": spec.solvency.c1,
            "c2": spec.solvency.c2,
            "c3": spec.solvency.c3,
            "c4": spec.solvency.c4,
            "c5": spec.solvency.c5,
        },
        "objective_bounds": {
            o.value: {"lower": b.lower, "upper": b.upper} for o, b in spec.objective_bounds
        },
        "active_objectives": [o.value for o in spec.active_objectives],
    }


def model_from_dict(doc: Mapping[str, Any]) -> ModelSpec:
    assets = doc["assets"]
    universe = AssetUniverse(
        names=tuple(assets["names"]),
        mu=np.array(assets["mu"], dtype=float),
        sigma=np.array(assets["sigma"], dtype=float),
        rho=np.array(assets["rho"], dtype=float),
    )
    solvency = None
    if doc.get("solvency") is not None:
        s = doc["solvency"]
        solvency = SolvencyCalibration(
            A=np.array(s["A"], dtype=float),
            b=np.array(s["b"], dtype=float),
            c1=s["c1"],
            c2=s["c2"],
            c3=s["c3"],
            c4=s["c4"],
            c5=s["c5"],
        )
    bounds = tuple(
        (Objective(k), ObjectiveBound(v.get("lower"), v.get("upper")))
        for k, v in (doc.get("objective_bounds") or {}).items()
    )
    return ModelSpec(
        universe=universe,
        reference=PortfolioWeights(np.array(doc["reference"], dtype=float)),
        groups=tuple(
            GroupConstraint(
                indices=tuple(g["indices"]), lower=g["lower"], upper=g["upper"], label=g["label"]
            )
            for g in doc.get("groups", [])
        ),
        solvency=solvency,
        objective_bounds=bounds,
        active_objectives=tuple(Objective(o) for o in doc["active_objectives"]),
    )


def model_hash(spec: ModelSpec) -> str:
    canonical = json.dumps(model_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# run artifacts


def run_config_dict(
    cfg: RunConfig,
    bounds: Optional[Mapping[Objective, ObjectiveBound]] = None,
    objectives: Optional[Sequence[Objective]] = None,
) -> dict:
    return {
        "maxit": cfg.maxit,
        "min_edge_floor": cfg.min_edge_floor,
        "solver": {
            "tol_feas": cfg.solver.tol_feas,
            "tol_opt": cfg.solver.tol_opt,
            "max_evals": cfg.solver.max_evals,
            "multistart_count": cfg.solver.multistart_count,
            "seed": cfg.solver.seed,
            "lift_l1": cfg.solver.lift_l1,
        },
        "objectives": None if objectives is None else [o.value for o in objectives],
        "bounds": {
            o.value: {"lower": b.lower, "upper": b.upper} for o, b in (bounds or {}).items()
        },
    }


def _finite(value):
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


def _pct(v: float) -> str:
    return f"{v * 100:.2f}%"


def _record_dict(record: PortfolioRecord, asset_names: Sequence[str]) -> dict:
    values = record.values.as_dict()
    return {
        "index": record.index,
        "kind": record.kind,
        "iteration": record.iteration,
        "weights": record.weights.tolist(),
        "values": values,
        "display": {k: _pct(v) for k, v in values.items()},
        "box": None
        if record.box_lower is None
        else {"lower": record.box_lower.tolist(), "upper": record.box_upper.tolist()},
        "scalarization": dict(record.scalarization),
        "solver": {
            "status": record.solver_info.get("status"),
            "n_evaluations": record.solver_info.get("n_evaluations"),
            "constraint_violation": _finite(record.solver_info.get("constraint_violation")),
            "kkt_residual": _finite(record.solver_info.get("kkt_residual")),
            "raw_t": _finite(record.solver_info.get("raw_t")),
        },
    }


def build_artifact(
    archive: RepresentationArchive,
    model_digest: str,
    config: Mapping[str, Any],
) -> dict:
    lo, hi = archive.natural_ranges()
    return {
        "format": ARTIFACT_FORMAT,
        "version": ARTIFACT_VERSION,
        "model_hash": model_digest,
        "config": dict(config),
        "objectives": [o.value for o in archive.objectives],
        "senses": {o.value: o.sense.value for o in archive.objectives},
        "asset_names": list(archive.asset_names),
        "initial_bounds": {
            "internal_lower": archive.initial_lower.tolist(),
            "internal_upper": archive.initial_upper.tolist(),
            "natural_low": lo.tolist(),
            "natural_high": hi.tolist(),
            "display": {
                o.value: f"[{l * 100:.2f}, {h * 100:.2f}%]"
                for o, l, h in zip(archive.objectives, lo, hi)
            },
        },
        "records": [_record_dict(r, archive.asset_names) for r in archive.records],
        "iterations": [
            {
                "iteration": log.iteration,
                "outcome": log.outcome,
                "norm_min_edge": log.norm_min_edge,
                "box_lower": log.box_lower.tolist(),
                "box_upper": log.box_upper.tolist(),
                "detail": log.detail,
            }
            for log in archive.iterations
        ],
    }


def artifact_bytes(artifact: Mapping[str, Any]) -> bytes:
    return (json.dumps(artifact, indent=2, ensure_ascii=True) + "\n").encode("utf-8")


def load_artifact(path: Union[str, Path]) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != ARTIFACT_FORMAT:
        raise DataFormatError("not an archive artifact", str(path))
    return doc


def render_report(archive: RepresentationArchive) -> str:
    """Table-style report: PF | objective columns, range header, 2-decimal %."""
    lo, hi = archive.natural_ranges()
    header = ["PF"] + [o.value for o in archive.objectives]
    ranges = [""] + [f"[{l * 100:.2f}, {h * 100:.2f}%]" for l, h in zip(lo, hi)]
    lines = [" | ".join(header), " | ".join(ranges)]
    for record in archive.records:
        cells = [str(record.index)] + [_pct(v) for v in record.values.values]
        lines.append(" | ".join(cells))
    return "\n".join(lines) + "\n"


_DELIMITED_META = ("index", "kind", "iteration")


def delimited_bytes(archive: RepresentationArchive) -> bytes:
    """CSV with full-precision fractions; round-trips through load_delimited."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    obj_cols = [f"value_{o.value}" for o in archive.objectives]
    box_cols = [f"box_lower_{o.value}" for o in archive.objectives] + [
        f"box_upper_{o.value}" for o in archive.objectives
    ]
    weight_cols = [f"weight_{name}" for name in archive.asset_names]
    writer.writerow(list(_DELIMITED_META) + obj_cols + weight_cols + box_cols + ["solver_status"])
    for r in archive.records:
        row = [r.index, r.kind, r.iteration]
        row += [repr(float(v)) for v in r.values.values]
        row += [repr(float(w)) for w in r.weights]
        if r.box_lower is None:
            row += [""] * (2 * archive.m)
        else:
            row += [repr(float(v)) for v in r.box_lower]
            row += [repr(float(v)) for v in r.box_upper]
        row.append(r.solver_info.get("status", ""))
        writer.writerow(row)
    return out.getvalue().encode("utf-8")


def load_delimited(path: Union[str, Path]) -> list[dict]:
    """Parse a delimited archive export back into record dictionaries."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    records = []
    for row in rows:
        rec: dict[str, Any] = {
            "index": int(row["index"]),
            "kind": row["kind"],
            "iteration": int(row["iteration"]),
            "values": {},
            "weights": {},
            "box_lower": {},
            "box_upper": {},
            "solver_status": row.get("solver_status", ""),
        }
        for key, value in row.items():
            if key.startswith("value_"):
                rec["values"][key[len("value_") :]] = float(value)
            elif key.startswith("weight_"):
                rec["weights"][key[len("weight_") :]] = float(value)
            elif key.startswith("box_lower_") and value != "":
                rec["box_lower"][key[len("box_lower_") :]] = float(value)
            elif key.startswith("box_upper_") and value != "":
                rec["box_upper"][key[len("box_upper_") :]] = float(value)
        records.append(rec)
    return records


def export_archive(
    archive: RepresentationArchive,
    path: Union[str, Path],
    fmt: str = "structured",
    *,
    model_digest: str = "",
    config: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write the archive to disk; output bytes are deterministic."""
    if not archive.records:
        raise ValueError("cannot export an empty archive")
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    if fmt == "structured":
        payload = artifact_bytes(build_artifact(archive, model_digest, config or {}))
    elif fmt == "delimited":
        payload = delimited_bytes(archive)
    else:
        payload = render_report(archive).encode("utf-8")
    path.write_bytes(payload)
    return path
