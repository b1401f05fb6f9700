"""HTTP API for the participatory configuration workflow.

Endpoints (JSON everywhere; errors use the ApiError schema):

    POST /api/sessions                              create a session
    POST /api/sessions/{id}/dataset?lower=&upper=   upload CSV (raw body or multipart "file")
    PUT  /api/sessions/{id}/preferences             run selection for a slider profile
    POST /api/sessions/{id}/release                 privatize at the selected epsilon
    POST /api/sessions/{id}/sweep                   simulated epsilon sweep (budget-free)
    GET  /api/sessions/{id}/history                 event log + ledger + version tree
    GET  /api/sessions/{id}/versions/{vid}/export   CSV download (raw export gated)
    GET  /api/policies                              shipped compliance policies

Mutating requests on one session are serialized by a per-session lock, i.e.
concurrent writers queue; reads run without locking. Server-generated seeds
are always echoed back so every release is auditable.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, Query, Request, Response, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..dataset import DEFAULT_BOUNDS, ClampBounds, to_csv_bytes
from ..errors import CivicDpError, RawExportDisabled
from . import schemas
from .config import ServiceConfig
from .sessions import SessionManager


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    manager = SessionManager(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        manager.load_snapshot()
        yield
        manager.save_snapshot()

    app = FastAPI(title="civicdp", version=__version__, lifespan=lifespan)
    app.state.config = config
    app.state.manager = manager

    @app.exception_handler(CivicDpError)
    async def domain_error_handler(_: Request, exc: CivicDpError) -> JSONResponse:
        body = schemas.ApiError(code=exc.code, message=str(exc), retryable=exc.retryable)
        return JSONResponse(status_code=exc.http_status, content=body.model_dump())

    @app.exception_handler(ValueError)
    async def value_error_handler(_: Request, exc: ValueError) -> JSONResponse:
        body = schemas.ApiError(code="validation_error", message=str(exc), retryable=True)
        return JSONResponse(status_code=422, content=body.model_dump())

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_: Request, exc: RequestValidationError) -> JSONResponse:
        body = schemas.ApiError(code="validation_error", message=str(exc), retryable=True)
        return JSONResponse(status_code=422, content=body.model_dump())

    @app.post("/api/sessions", response_model=schemas.SessionOut, status_code=201)
    def create_session(request: schemas.CreateSessionRequest) -> schemas.SessionOut:
        session = manager.create_session(
            total_budget=request.total_budget, policy_name=request.policy_name
        )
        return schemas.SessionOut.from_session(session)

    @app.post("/api/sessions/{session_id}/dataset", response_model=schemas.UploadOut)
    async def upload_dataset(
        session_id: str,
        request: Request,
        file: Optional[UploadFile] = None,
        lower: float = Query(default=DEFAULT_BOUNDS.lower),
        upper: float = Query(default=DEFAULT_BOUNDS.upper),
        fill_missing: bool = Query(default=False),
    ) -> schemas.UploadOut:
        if file is not None:
            raw = await file.read()
        else:
            raw = await request.body()
        session = manager.get(session_id)
        bounds = ClampBounds(lower=lower, upper=upper)
        with session.lock:
            version = session.upload_dataset(raw, bounds, fill_missing=fill_missing)
        return schemas.UploadOut(
            version_id=version.version_id,
            shape=version.payload.shape,
            delta_f=bounds.delta_f,
        )

    @app.put("/api/sessions/{session_id}/preferences", response_model=schemas.SelectionOut)
    def set_preferences(session_id: str, request: schemas.PreferencesIn) -> schemas.SelectionOut:
        session = manager.get(session_id)
        with session.lock:
            selection = session.set_preferences(request.to_profile())
        return schemas.SelectionOut.from_selection(selection)

    @app.post("/api/sessions/{session_id}/release", response_model=schemas.ReleaseOut)
    def execute_release(
        session_id: str, request: Optional[schemas.ReleaseIn] = None
    ) -> schemas.ReleaseOut:
        session = manager.get(session_id)
        seed = request.seed if request is not None else None
        with session.lock:
            outcome = session.execute_release(seed=seed)
        return schemas.ReleaseOut.from_outcome(outcome)

    @app.post("/api/sessions/{session_id}/sweep", response_model=schemas.SweepOut)
    def run_sweep(session_id: str, request: Optional[schemas.SweepIn] = None) -> schemas.SweepOut:
        session = manager.get(session_id)
        request = request or schemas.SweepIn()
        sweep = session.run_sweep(
            grid=request.grid,
            seeds_per_point=request.seeds_per_point,
            base_seed=request.base_seed,
        )
        return schemas.SweepOut.from_sweep(sweep)

    @app.get("/api/sessions/{session_id}/history", response_model=schemas.HistoryOut)
    def get_history(session_id: str) -> schemas.HistoryOut:
        session = manager.get(session_id)
        return schemas.HistoryOut(**session.history_snapshot())

    @app.get("/api/sessions/{session_id}/versions/{version_id}/export")
    def export_version(session_id: str, version_id: int) -> Response:
        session = manager.get(session_id)
        version = session.store.get(version_id)
        if version.provenance is None and not config.allow_raw_export:
            raise RawExportDisabled(
                "raw dataset export is disabled on this server (CIVICDP_ALLOW_RAW_EXPORT)"
            )
        return Response(
            content=to_csv_bytes(version.payload),
            media_type="text/csv",
            headers={
                "Content-Disposition": f"attachment; filename={session_id}-v{version_id}.csv"
            },
        )

    @app.get("/api/policies", response_model=list[schemas.PolicyOut])
    def list_policies() -> list[schemas.PolicyOut]:
        return [
            schemas.PolicyOut(
                name=policy.name,
                epsilon_cap=policy.epsilon_cap,
                description=policy.description,
            )
            for policy in manager.policies.values()
        ]

    return app


app = create_app()
