"""Request/response models for the evaluation service.

Requests are full run configs; paths in them are resolved on the server's
filesystem, which is the expected deployment (one evaluation service per
machine or shared volume, holding the warm entailment cache).
"""

from __future__ import annotations

from pydantic import BaseModel

from ..config import RunConfig


class EvaluateRequest(RunConfig):
    pass


class RefineRequest(RunConfig):
    pass


class BuildRefinerDataRequest(RunConfig):
    pass


class JobResponse(BaseModel):
    out: str
    summary: dict


class HealthResponse(BaseModel):
    status: str
    version: str
