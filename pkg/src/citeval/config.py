"""Run configuration shared by the CLI and the service.

The resolved config is serialized verbatim into every report, so a report
always records exactly how it was produced.
"""

from __future__ import annotations

import os
from typing import Literal

from pydantic import BaseModel, Field


class RunConfig(BaseModel):
    """Everything a run needs; unused fields are harmless defaults."""

    data: str
    format: Literal["webglm-jsonl", "alce-json"] = "webglm-jsonl"
    pred: str | None = None
    out: str = ""
    changelog: str | None = None

    backend: Literal["table", "lexical", "nli-http", "llm-judge"] = "lexical"
    endpoint: str | None = None
    table: str | None = None
    judge_model: str = "gpt-3.5-turbo"
    cache: str | None = None

    metrics: list[str] = Field(default_factory=lambda: ["alce", "ours", "bleu", "rouge"])
    mode: Literal["oracle", "service", "posthoc"] = "oracle"
    sim: Literal["bleu", "rouge"] = "rouge"
    threshold: float = 0.3
    enum_cap: int = 10
    cited_only: bool = False
    prune: bool = True
    refiner_endpoint: str | None = None

    workers: int = 0  # 0: one worker per logical core
    seed: int = 0
    correctness_aggregation: Literal["mean", "corpus"] = "mean"
    premise_length_limit: int = 8000

    def resolved_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def families(self) -> tuple[str, ...]:
        return tuple(m for m in ("alce", "ours") if m in self.metrics)

    def correctness(self) -> tuple[str, ...]:
        return tuple(m for m in ("bleu", "rouge") if m in self.metrics)

    def snapshot(self) -> dict:
        """JSON-safe dump embedded in reports for provenance."""
        return self.model_dump(mode="json")
