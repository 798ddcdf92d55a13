"""Batch entry points: run the box search, evaluate a portfolio, serve HTTP.

Exit codes: 0 success, 2 validation/parse failure, 3 infeasible, 4 internal
error. Bounds use the grammar OBJ:OP:VALUE with OP in {<=, >=} and values in
fractions (distance:<=:0.50 restricts turnover distance to 50%).
"""
from __future__ import annotations

import logging
import os
import sys
from typing import Optional

import click

from . import dataio
from .engine import InfeasibleError, RunConfig, restrict_and_rerun
from .model import CANONICAL_OBJECTIVES, Objective, ObjectiveBound
from .objectives import evaluate_all
from .solver import SolverConfig

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _parse_bound_flag(raw: str) -> tuple[Objective, ObjectiveBound]:
    parts = raw.split(":")
    if len(parts) != 3:
        raise click.BadParameter(f"expected OBJ:OP:VALUE, got {raw!r}")
    name, op, value = parts
    try:
        objective = Objective(name.strip())
    except ValueError:
        choices = ", ".join(o.value for o in CANONICAL_OBJECTIVES)
        raise click.BadParameter(f"unknown objective {name!r}; choose from {choices}") from None
    if op not in ("<=", ">="):
        raise click.BadParameter(f"operator must be <= or >=, got {op!r}")
    try:
        number = float(value)
    except ValueError:
        raise click.BadParameter(f"not a number: {value!r}") from None
    if op == "<=":
        return objective, ObjectiveBound(upper=number)
    return objective, ObjectiveBound(lower=number)


def _collect_bounds(flags: tuple[str, ...]) -> dict[Objective, ObjectiveBound]:
    bounds: dict[Objective, ObjectiveBound] = {}
    for raw in flags:
        objective, bound = _parse_bound_flag(raw)
        bounds[objective] = bounds[objective].merged(bound) if objective in bounds else bound
    for objective, bound in bounds.items():
        if bound.lower is not None and bound.upper is not None and bound.lower > bound.upper:
            raise click.BadParameter(
                f"inconsistent bounds for {objective.value}: {bound.lower} > {bound.upper}"
            )
    return bounds


def _load(assets, calibration, correlation, constraints, reference, objectives):
    objs = None
    if objectives:
        objs = [s.strip() for s in objectives.split(",") if s.strip()]
    return dataio.load_model(
        assets,
        calibration_path=calibration,
        correlation_path=correlation,
        constraints_path=constraints,
        reference_path=reference,
        objectives=objs,
    )


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable info-level logging.")
def main(verbose: bool) -> None:
    """Multicriteria asset-allocation front explorer."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--assets", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--calibration", type=click.Path(exists=True, dir_okay=False))
@click.option("--correlation", type=click.Path(exists=True, dir_okay=False))
@click.option("--constraints", type=click.Path(exists=True, dir_okay=False))
@click.option("--reference", type=click.Path(exists=True, dir_okay=False))
@click.option("--maxit", type=int, default=10, show_default=True)
@click.option(
    "--bound",
    "bounds",
    multiple=True,
    help="Hard objective bound OBJ:OP:VALUE (repeatable), values in fractions.",
)
@click.option("--objectives", type=str, help="Comma-separated subset of the four objectives.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--multistart", type=int, default=8, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Output path (stdout if omitted).")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(dataio.FORMATS),
    default="report",
    show_default=True,
)
def optimize(
    assets, calibration, correlation, constraints, reference, maxit, bounds, objectives, seed, multistart, out, fmt
) -> None:
    """Run the box search and emit the archive."""
    try:
        try:
            spec, _ = _load(assets, calibration, correlation, constraints, reference, objectives)
            flag_bounds = _collect_bounds(bounds)
        except (dataio.DataFormatError, dataio.ModelValidationError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        cfg = RunConfig(
            maxit=maxit,
            solver=SolverConfig(seed=seed, multistart_count=multistart),
        )
        try:
            archive = restrict_and_rerun(spec, flag_bounds, cfg)
        except InfeasibleError as exc:
            click.echo(f"infeasible: {exc}", err=True)
            sys.exit(EXIT_INFEASIBLE)
        digest = dataio.model_hash(spec)
        config = dataio.run_config_dict(
            cfg, flag_bounds, spec.active_objectives if objectives else None
        )
        if fmt == "structured":
            payload = dataio.artifact_bytes(dataio.build_artifact(archive, digest, config))
        elif fmt == "delimited":
            payload = dataio.delimited_bytes(archive)
        else:
            payload = dataio.render_report(archive).encode("utf-8")
        if out:
            with open(out, "wb") as fh:
                fh.write(payload)
            click.echo(f"wrote {out}", err=True)
        else:
            sys.stdout.buffer.write(payload)
    except (SystemExit, click.ClickException):
        raise
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--assets", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--calibration", type=click.Path(exists=True, dir_okay=False))
@click.option("--correlation", type=click.Path(exists=True, dir_okay=False))
@click.option("--reference", type=click.Path(exists=True, dir_okay=False))
@click.option("--weights", required=True, type=click.Path(exists=True, dir_okay=False))
def evaluate(assets, calibration, correlation, reference, weights) -> None:
    """Print the objective values of one portfolio."""
    try:
        try:
            spec, _ = _load(assets, calibration, correlation, None, reference, None)
            w, _ = dataio.load_weights(weights, spec.universe.names)
        except (dataio.DataFormatError, dataio.ModelValidationError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        values = evaluate_all(w, spec)
        for objective, value in zip(values.objectives, values.values):
            click.echo(f"{objective.value}: {value * 100:.2f}%")
    except (SystemExit, click.ClickException):
        raise
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--bind", default=None, help="host:port [env ALLOCFRONT_BIND, default 127.0.0.1:8080]")
@click.option("--workers", type=int, default=None, help="Worker pool size [env ALLOCFRONT_WORKERS].")
@click.option("--persist", type=click.Path(file_okay=False), default=None, help="Artifact directory [env ALLOCFRONT_PERSIST].")
def serve(bind: Optional[str], workers: Optional[int], persist: Optional[str]) -> None:
    """Serve the HTTP API (blocking; terminates on SIGINT/SIGTERM)."""
    from .service import DEFAULT_WORKERS, serve as _serve

    bind = bind or os.environ.get("ALLOCFRONT_BIND", "127.0.0.1:8080")
    if workers is None:
        workers = int(os.environ.get("ALLOCFRONT_WORKERS", DEFAULT_WORKERS))
    persist = persist or os.environ.get("ALLOCFRONT_PERSIST") or None
    try:
        _serve(bind=bind, workers=workers, persist=persist)
    except OSError as exc:
        click.echo(f"cannot bind {bind}: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)


if __name__ == "__main__":
    main()
