"""HTTP front-end for the evaluation pipeline.

Jobs run synchronously in the request; clients are expected to be the thin
CLI or automation on the same machine or network. Keeping the service
resident pays off through the shared on-disk entailment cache.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, pipeline
from ..errors import BackendUnavailableError, CiteEvalError
from .schemas import (
    BuildRefinerDataRequest,
    EvaluateRequest,
    HealthResponse,
    JobResponse,
    RefineRequest,
)

app = FastAPI(title="citeval", version=__version__)


def _run(runner, cfg) -> JobResponse:
    try:
        result = runner(cfg)
    except BackendUnavailableError as exc:
        raise HTTPException(status_code=502, detail=str(exc)) from exc
    except (CiteEvalError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except FileNotFoundError as exc:
        raise HTTPException(status_code=400, detail=f"file not found: {exc}") from exc
    return JobResponse(out=result.out, summary=result.summary)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/v1/evaluate", response_model=JobResponse)
def evaluate(request: EvaluateRequest) -> JobResponse:
    return _run(pipeline.run_evaluate, request)


@app.post("/v1/refine", response_model=JobResponse)
def refine(request: RefineRequest) -> JobResponse:
    return _run(pipeline.run_refine, request)


@app.post("/v1/build-refiner-data", response_model=JobResponse)
def build_refiner_data(request: BuildRefinerDataRequest) -> JobResponse:
    return _run(pipeline.run_build_refiner_data, request)
