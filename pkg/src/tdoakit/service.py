"""HTTP/JSON API for the planner UI and other clients.

Stateless, unauthenticated, CPU-bound: every handler is a pure function of
its request, so identical requests yield identical responses and
concurrent execution matches serial execution. Hard request limits keep a
public demo instance safe: anchors <= 32, grid <= 400x400 cells, track
steps <= 10000.

Responses echo a sha256 hash of the canonical request body for use as a
cache key. Schema violations return 400; semantically degenerate requests
(duplicate anchors, over-limit grids, singular geometry) return 422.

Configuration via environment: ``TDOA_ALLOWED_ORIGINS`` (comma-separated
CORS origins, default "*") and ``TDOA_BIND`` (host:port for the CLI
``serve`` command, default 127.0.0.1:8787).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import DegenerateGeometryError, NearAnchorError, SingularSystemError
from .evaluation import (
    TrackScenario,
    builtin_scenarios,
    run_track_scenario,
    scenario_from_dict,
)
from .gauss_newton import GaussNewtonConfig, locate_gauss_newton
from .geometry import AnchorSet, Point, TdoaVector, pair_count
from .dop import GridSpec, dop_map
from .linear import locate_linear

MAX_ANCHORS = 32
MAX_GRID_CELLS = 400 * 400
MAX_TRACK_STEPS = 10_000


class AnchorIn(BaseModel):
    x: float
    y: float
    label: Optional[str] = None


class BoundsIn(BaseModel):
    x_min: float
    x_max: float
    y_min: float
    y_max: float


class ResIn(BaseModel):
    nx: int = 200
    ny: int = 200


class DopMapRequest(BaseModel):
    v: int = 1
    anchors: list[AnchorIn]
    kind: Literal["linear-cond", "nonlinear-kappa"]
    central: Optional[int] = None
    symmetric: bool = False
    bounds: BoundsIn
    res: ResIn = Field(default_factory=ResIn)


class LocateRequest(BaseModel):
    v: int = 1
    anchors: list[AnchorIn]
    tdoa: list[float]
    estimator: str = "gauss-newton"
    init: Optional[list[float]] = None


class SimulateTrackRequest(BaseModel):
    v: int = 1
    scenario: str | dict
    seed: int = 0


class DomainError(Exception):
    """Maps to HTTP 422: request is well-formed but semantically unusable."""


def _request_hash(body: BaseModel) -> str:
    canonical = json.dumps(body.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _anchor_set(anchors: list[AnchorIn]) -> AnchorSet:
    if len(anchors) > MAX_ANCHORS:
        raise DomainError(f"anchor limit exceeded: {len(anchors)} > {MAX_ANCHORS}")
    try:
        return AnchorSet(
            [(a.x, a.y) for a in anchors],
            labels=[a.label if a.label is not None else str(i) for i, a in enumerate(anchors)],
        )
    except ValueError as e:
        raise DomainError(str(e)) from e


def create_app() -> FastAPI:
    app = FastAPI(
        title="tdoakit service",
        version=__version__,
        description="DoP maps, single-shot location, and tracking simulation "
        "for TDoA anchor-deployment planning.",
    )

    origins = os.environ.get("TDOA_ALLOWED_ORIGINS", "*")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[o.strip() for o in origins.split(",") if o.strip()],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _schema_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(DomainError)
    async def _domain_error(request: Request, exc: DomainError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/dop-map")
    def dop_map_endpoint(req: DopMapRequest):
        anchors = _anchor_set(req.anchors)
        if req.res.nx * req.res.ny > MAX_GRID_CELLS:
            raise DomainError(
                f"resolution limit: {req.res.nx}x{req.res.ny} exceeds {MAX_GRID_CELLS} cells"
            )
        try:
            spec = GridSpec(
                req.bounds.x_min,
                req.bounds.x_max,
                req.bounds.y_min,
                req.bounds.y_max,
                req.res.nx,
                req.res.ny,
            )
            grid = dop_map(
                anchors, spec, kind=req.kind, central=req.central, symmetric=req.symmetric
            )
        except ValueError as e:
            raise DomainError(str(e)) from e
        out = grid.to_json_dict()
        out["v"] = 1
        out["request_hash"] = _request_hash(req)
        return out

    @app.post("/v1/locate")
    def locate_endpoint(req: LocateRequest):
        anchors = _anchor_set(req.anchors)
        expected = pair_count(anchors.n)
        if len(req.tdoa) != expected:
            raise DomainError(
                f"tdoa needs {expected} pair values for {anchors.n} anchors, got {len(req.tdoa)}"
            )
        dhat = TdoaVector([float(v) for v in req.tdoa], anchors.n)
        try:
            if req.estimator == "linear-symmetric":
                fix = locate_linear(anchors, dhat, mode="symmetric")
                result = {
                    "x": fix.point.x,
                    "y": fix.point.y,
                    "diagnostics": {
                        "sigma_min": fix.sigma_min,
                        "sigma_max": fix.sigma_max,
                        "cond": fix.cond,
                    },
                }
            elif req.estimator.startswith("linear-central:"):
                central = int(req.estimator.split(":", 1)[1])
                fix = locate_linear(anchors, dhat, mode="central", central=central)
                result = {
                    "x": fix.point.x,
                    "y": fix.point.y,
                    "diagnostics": {
                        "sigma_min": fix.sigma_min,
                        "sigma_max": fix.sigma_max,
                        "cond": fix.cond,
                    },
                }
            elif req.estimator == "gauss-newton":
                init = Point(req.init[0], req.init[1]) if req.init else None
                report = locate_gauss_newton(
                    anchors, dhat, GaussNewtonConfig(initial_guess=init)
                )
                result = {
                    "x": report.estimate.x,
                    "y": report.estimate.y,
                    "diagnostics": {
                        "iterations": report.iterations,
                        "converged": report.converged,
                        "final_step_norm": report.final_step_norm,
                        "final_residual_norm": report.final_residual_norm,
                        "jacobian_sigma_min": report.jacobian_sigma_min,
                    },
                }
            else:
                raise DomainError(f"unknown estimator {req.estimator!r}")
        except (SingularSystemError, DegenerateGeometryError, NearAnchorError) as e:
            raise DomainError(f"degenerate geometry: {e}") from e
        except ValueError as e:
            raise DomainError(str(e)) from e
        result["v"] = 1
        result["estimator"] = req.estimator
        result["request_hash"] = _request_hash(req)
        return result

    @app.post("/v1/simulate-track")
    def simulate_track_endpoint(req: SimulateTrackRequest):
        if isinstance(req.scenario, str):
            registry = builtin_scenarios()
            if req.scenario not in registry:
                raise DomainError(
                    f"unknown builtin scenario {req.scenario!r}; "
                    f"choose from {sorted(registry)}"
                )
            scenario = registry[req.scenario]
        else:
            try:
                scenario = scenario_from_dict(req.scenario)
            except (KeyError, TypeError, ValueError) as e:
                raise DomainError(f"bad scenario: {e}") from e
        if not isinstance(scenario, TrackScenario):
            raise DomainError("simulate-track needs a track scenario (with a segment)")
        if scenario.steps > MAX_TRACK_STEPS:
            raise DomainError(f"steps limit: {scenario.steps} > {MAX_TRACK_STEPS}")
        if scenario.anchors.n > MAX_ANCHORS:
            raise DomainError(f"anchor limit exceeded: {scenario.anchors.n} > {MAX_ANCHORS}")
        try:
            report = run_track_scenario(scenario, req.seed)
        except (SingularSystemError, DegenerateGeometryError, NearAnchorError) as e:
            raise DomainError(f"degenerate geometry: {e}") from e
        traj = report.trajectory
        return {
            "v": 1,
            "request_hash": _request_hash(req),
            "trajectory": _finite_json(traj.to_json_dict()),
            "rmse": report.rmse,
            "failures": report.failures,
            "config": report.config,
        }

    return app


def _finite_json(obj):
    """Replace non-finite floats with None; JSON has no NaN."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite_json(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite_json(v) for v in obj]
    return obj


app = create_app()
