"""HTTP facade: model upload, run launch, archive retrieval.

Runs execute on a bounded worker pool; launches beyond the pool size queue
as Pending. The archive endpoint serves a consistent prefix of the records
while a run is in flight, which is what lets a client display portfolios as
they appear. State lives in memory; finished artifacts can optionally be
persisted to a directory.

Environment: ALLOCFRONT_BIND (host:port), ALLOCFRONT_WORKERS (pool size),
ALLOCFRONT_PERSIST (artifact directory).
"""
from __future__ import annotations

import itertools
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import dataio
from .engine import InfeasibleError, RepresentationArchive, RunConfig, run
from .model import ModelSpec, Objective, ObjectiveBound
from .solver import SolverConfig

__all__ = ["create_app", "serve"]

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 2


class ModelUpload(BaseModel):
    assets: str
    calibration: Optional[str] = None
    correlation: Optional[str] = None
    constraints: Optional[str] = None
    reference: Optional[str] = None


class BoundPayload(BaseModel):
    min: Optional[float] = None
    max: Optional[float] = None


class RunRequest(BaseModel):
    maxit: int = Field(default=10, ge=1)
    seed: int = 0
    objectives: Optional[list[str]] = None
    bounds: dict[str, BoundPayload] = Field(default_factory=dict)
    multistart: int = Field(default=8, ge=1)
    tol_feas: float = 1e-8
    tol_opt: float = 1e-6
    max_evals: int = 5000
    min_edge_floor: float = 1e-6
    lift_l1: bool = False


class _Run:
    def __init__(self, run_id: str, model_id: str, maxit: int):
        self.id = run_id
        self.model_id = model_id
        self.state = "pending"  # pending -> running -> done | failed
        self.maxit = maxit
        self.completed = 0
        self.created_at = datetime.now(timezone.utc).isoformat()
        self.error: Optional[str] = None
        self.archive: Optional[RepresentationArchive] = None
        self.partial_records: list = []
        self.config_dict: dict = {}
        self.model_digest: str = ""
        self.objectives = ()
        self.asset_names = ()
        self.initial_lower = None
        self.initial_upper = None

    def handle(self) -> dict:
        return {
            "id": self.id,
            "state": self.state,
            "progress": {"completed": self.completed, "maxit": self.maxit},
            "created_at": self.created_at,
            "error": self.error,
        }


class _Store:
    """Models, runs and the worker pool behind the endpoints."""

    def __init__(self, workers: int, persist_dir: Optional[Path]):
        self.lock = threading.Lock()
        self.models: dict[str, tuple[ModelSpec, str]] = {}
        self.runs: dict[str, _Run] = {}
        self.pool = ThreadPoolExecutor(max_workers=workers)
        self.persist_dir = persist_dir
        self._model_counter = itertools.count(1)
        self._run_counter = itertools.count(1)

    def add_model(self, spec: ModelSpec) -> str:
        digest = dataio.model_hash(spec)
        with self.lock:
            model_id = f"m{next(self._model_counter):04d}"
            self.models[model_id] = (spec, digest)
        return model_id

    def launch(self, model_id: str, request: RunRequest) -> _Run:
        spec, _ = self.models[model_id]
        cfg = RunConfig(
            maxit=request.maxit,
            solver=SolverConfig(
                tol_feas=request.tol_feas,
                tol_opt=request.tol_opt,
                max_evals=request.max_evals,
                multistart_count=request.multistart,
                seed=request.seed,
                lift_l1=request.lift_l1,
            ),
            min_edge_floor=request.min_edge_floor,
        )
        bounds = {
            Objective(name): ObjectiveBound(lower=b.min, upper=b.max)
            for name, b in request.bounds.items()
        }
        objectives = (
            tuple(Objective(o) for o in request.objectives) if request.objectives else None
        )
        model = spec
        if objectives is not None:
            model = ModelSpec(
                universe=spec.universe,
                reference=spec.reference,
                groups=spec.groups,
                solvency=spec.solvency,
                objective_bounds=spec.objective_bounds,
                active_objectives=objectives,
            )
        # Hash the effective model; per-run bounds live in the config instead.
        digest = dataio.model_hash(model)
        with self.lock:
            run_id = f"r{next(self._run_counter):04d}"
            state = _Run(run_id, model_id, request.maxit)
            state.model_digest = digest
            state.config_dict = dataio.run_config_dict(cfg, bounds, objectives)
            state.objectives = tuple(model.active_objectives)
            state.asset_names = model.universe.names
            self.runs[run_id] = state
        self.pool.submit(self._execute, state, model, cfg, bounds)
        return state

    def _execute(self, state: _Run, spec: ModelSpec, cfg: RunConfig, bounds) -> None:
        with self.lock:
            state.state = "running"
        model = spec
        if bounds:
            model = model.with_bounds(bounds)

        def on_record(record) -> None:
            with self.lock:
                state.partial_records.append(record)

        def on_progress(done: int, total: int) -> None:
            with self.lock:
                state.completed = min(done, total)

        try:
            archive = run(model, cfg, on_record=on_record, on_progress=on_progress)
        except InfeasibleError as exc:
            with self.lock:
                state.state = "failed"
                state.error = f"infeasible: {exc}"
            logger.warning("run %s failed: %s", state.id, exc)
            return
        except Exception as exc:  # pragma: no cover - defensive
            with self.lock:
                state.state = "failed"
                state.error = str(exc)
            logger.exception("run %s crashed", state.id)
            return
        with self.lock:
            state.archive = archive
            state.completed = state.maxit
            state.state = "done"
        if self.persist_dir is not None:
            artifact = dataio.build_artifact(archive, state.model_digest, state.config_dict)
            path = self.persist_dir / f"{state.id}.json"
            path.write_bytes(dataio.artifact_bytes(artifact))
            logger.info("run %s persisted to %s", state.id, path)

    def artifact_bytes(self, state: _Run) -> bytes:
        """Current artifact: full archive when done, records-so-far otherwise.

        Partial documents carry the same schema as final ones so clients can
        render them as they grow; their bounds are provisional (extremes of
        the records seen so far, which equal the payoff bounds once the
        payoff phase completes).
        """
        with self.lock:
            archive = state.archive
            records = list(state.partial_records)
            error = state.error
        if archive is not None:
            artifact = dataio.build_artifact(archive, state.model_digest, state.config_dict)
            if error:
                artifact["error"] = error
            return dataio.artifact_bytes(artifact)

        doc: dict = {
            "format": dataio.ARTIFACT_FORMAT,
            "version": dataio.ARTIFACT_VERSION,
            "model_hash": state.model_digest,
            "config": state.config_dict,
            "objectives": [o.value for o in state.objectives],
            "senses": {o.value: o.sense.value for o in state.objectives},
            "asset_names": list(state.asset_names),
            "records": [dataio._record_dict(r, state.asset_names) for r in records],
        }
        if records:
            values = [[r.values.value(o) for o in state.objectives] for r in records]
            low = [min(col) for col in zip(*values)]
            high = [max(col) for col in zip(*values)]
            internal = [r.internal.tolist() for r in records]
            doc["initial_bounds"] = {
                "internal_lower": [min(col) for col in zip(*internal)],
                "internal_upper": [max(col) for col in zip(*internal)],
                "natural_low": low,
                "natural_high": high,
                "display": {
                    o.value: f"[{l * 100:.2f}, {h * 100:.2f}%]"
                    for o, l, h in zip(state.objectives, low, high)
                },
            }
        if error:
            doc["error"] = error
        return dataio.artifact_bytes(doc)


def create_app(workers: Optional[int] = None, persist_dir: Optional[str] = None) -> FastAPI:
    if workers is None:
        workers = int(os.environ.get("ALLOCFRONT_WORKERS", DEFAULT_WORKERS))
    if persist_dir is None:
        persist_dir = os.environ.get("ALLOCFRONT_PERSIST") or None
    persist = Path(persist_dir) if persist_dir else None
    if persist is not None:
        persist.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="allocfront", version="0.1.0")
    # the browser client may be served from another origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = _Store(workers=workers, persist_dir=persist)
    app.state.store = store

    @app.post("/models", status_code=201)
    def post_model(payload: ModelUpload) -> dict:
        try:
            spec, notes = dataio.load_model(
                payload.assets,
                calibration_path=payload.calibration,
                correlation_path=payload.correlation,
                constraints_path=payload.constraints,
                reference_path=payload.reference,
                inline=True,
            )
        except dataio.ModelValidationError as exc:
            raise HTTPException(
                status_code=400,
                detail={"violations": [{"code": v.code, "message": v.message} for v in exc.violations]},
            ) from exc
        except dataio.DataFormatError as exc:
            raise HTTPException(
                status_code=400,
                detail={"violations": [{"code": "parse_error", "message": str(exc)}]},
            ) from exc
        model_id = store.add_model(spec)
        return {"model_id": model_id, "notes": notes}

    @app.post("/models/{model_id}/runs", status_code=201)
    def post_run(model_id: str, request: RunRequest) -> dict:
        if model_id not in store.models:
            raise HTTPException(status_code=404, detail="unknown model")
        for name, bound in request.bounds.items():
            try:
                Objective(name)
            except ValueError:
                raise HTTPException(status_code=409, detail=f"unknown objective {name!r}") from None
            if bound.min is not None and bound.max is not None and bound.min > bound.max:
                raise HTTPException(
                    status_code=409,
                    detail=f"inconsistent bounds for {name}: min {bound.min} > max {bound.max}",
                )
        if request.objectives:
            try:
                objs = [Objective(o) for o in request.objectives]
            except ValueError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
            if not 2 <= len(objs) <= 4:
                raise HTTPException(status_code=409, detail="need 2..4 objectives")
        state = store.launch(model_id, request)
        return state.handle()

    @app.get("/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        state = store.runs.get(run_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown run")
        return state.handle()

    @app.get("/runs/{run_id}/archive")
    def get_archive(run_id: str) -> Response:
        state = store.runs.get(run_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown run")
        return Response(content=store.artifact_bytes(state), media_type="application/json")

    return app


def serve(bind: str = "127.0.0.1:8080", workers: int = DEFAULT_WORKERS, persist: Optional[str] = None) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    host, _, port = bind.partition(":")
    app = create_app(workers=workers, persist_dir=persist)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="info")
