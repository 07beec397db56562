"""HTTP front end wrapping the experiment runner.

Endpoints:

* ``GET  /health``   -- liveness probe.
* ``GET  /version``  -- package version.
* ``POST /validate`` -- check a raw config dict; always returns 200 with
  a validity flag and human-readable errors naming the offending keys.
* ``POST /run``      -- validate and execute a config; returns the
  report plus every artifact as (name, content) pairs so clients decide
  where files land.

Validation problems surface as 422 (typed request model) or 400;
numerical failures during execution surface as 500 with a structured
detail body.
"""

from __future__ import annotations

from typing import List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ValidationError

from . import __version__
from .experiments import ExperimentConfig, run_experiment
from .hybrid import MaxBisectionDepth, MaxEventsExceeded, NumericalBlowup


class RunRequest(BaseModel):
    config: ExperimentConfig
    seed: Optional[int] = None


class ArtifactModel(BaseModel):
    name: str
    content: str


class RunResponse(BaseModel):
    report: dict
    artifacts: List[ArtifactModel]


class ValidateRequest(BaseModel):
    config: dict


class ValidateResponse(BaseModel):
    valid: bool
    errors: List[str]


class VersionResponse(BaseModel):
    version: str


def _format_errors(err: ValidationError) -> List[str]:
    out = []
    for item in err.errors():
        loc = ".".join(str(p) for p in item["loc"]) or "config"
        out.append(f"{loc}: {item['msg']}")
    return out


def create_app() -> FastAPI:
    app = FastAPI(title="hlp", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/version", response_model=VersionResponse)
    def version():
        return VersionResponse(version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest):
        try:
            ExperimentConfig.model_validate(req.config)
        except ValidationError as e:
            return ValidateResponse(valid=False, errors=_format_errors(e))
        return ValidateResponse(valid=True, errors=[])

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest):
        try:
            result = run_experiment(req.config, seed=req.seed)
        except (NumericalBlowup, MaxEventsExceeded, MaxBisectionDepth) as e:
            raise HTTPException(
                status_code=500,
                detail={"kind": "numerical", "message": str(e)},
            )
        except ValueError as e:
            raise HTTPException(
                status_code=400,
                detail={"kind": "validation", "message": str(e)},
            )
        return RunResponse(
            report=result.report,
            artifacts=[ArtifactModel(name=a.name, content=a.content)
                       for a in result.artifacts],
        )

    return app


app = create_app()
