"""Job runners behind both the CLI and the HTTP service.

Each runner takes a `RunConfig`, does file I/O at the configured paths, and
returns a summary dict. Runs sharing a cache path reuse each other's
entailment verdicts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import corpus as corpus_io
from . import metrics, refine, segment
from .config import RunConfig
from .entail import (
    EntailmentCache,
    EntailmentOracle,
    LexicalBackend,
    LlmJudgeBackend,
    NliHttpBackend,
    TableBackend,
)


@dataclass
class JobResult:
    out: str
    summary: dict


def build_backend(cfg: RunConfig):
    if cfg.backend == "table":
        if not cfg.table:
            raise ValueError("table backend requires a table file (--table)")
        return TableBackend.from_file(cfg.table)
    if cfg.backend == "lexical":
        return LexicalBackend()
    if cfg.backend == "nli-http":
        if not cfg.endpoint:
            raise ValueError("nli-http backend requires --endpoint")
        return NliHttpBackend(cfg.endpoint)
    if not cfg.endpoint:
        raise ValueError("llm-judge backend requires --endpoint")
    return LlmJudgeBackend(cfg.endpoint, cfg.judge_model)


def build_oracle(cfg: RunConfig) -> EntailmentOracle:
    backend = build_backend(cfg)
    cache = EntailmentCache(cfg.cache)
    return EntailmentOracle(
        backend, cache, premise_length_limit=cfg.premise_length_limit
    )


def _load_inputs(cfg: RunConfig):
    corpus = corpus_io.load_samples(cfg.data, cfg.format)
    predictions = None
    if cfg.pred:
        predictions = corpus_io.load_predictions(cfg.pred)
        unknown = corpus_io.check_prediction_coverage(predictions, corpus)
        if unknown:
            predictions = {k: v for k, v in predictions.items() if corpus.get(k)}
    return corpus, predictions


def run_evaluate(cfg: RunConfig) -> JobResult:
    """Score a corpus and write the report; returns run statistics."""
    if not cfg.out:
        raise ValueError("evaluate requires an output path (--out)")
    corpus, predictions = _load_inputs(cfg)
    oracle = build_oracle(cfg)
    try:
        report = metrics.corpus_citation_metrics(
            corpus,
            predictions,
            oracle,
            families=cfg.families(),
            correctness=cfg.correctness(),
            enum_cap=cfg.enum_cap,
            workers=cfg.resolved_workers(),
            correctness_aggregation=cfg.correctness_aggregation,
            backend_identity=oracle.identity,
            config=cfg.snapshot(),
        )
    finally:
        oracle.cache.close()  # partial results are already flushed
    corpus_io.write_report(report.to_dict(), cfg.out)
    return JobResult(
        out=cfg.out,
        summary={
            "citation": report.citation,
            "correctness": report.correctness,
            "counts": report.counts,
            "backend_calls": oracle.backend_calls,
            "phi_queries": oracle.queries,
        },
    )


def run_refine(cfg: RunConfig) -> JobResult:
    """Refine responses and write them as a predictions file plus changelog."""
    if not cfg.out:
        raise ValueError("refine requires an output path (--out)")
    corpus, predictions = _load_inputs(cfg)
    oracle = refiner = None
    if cfg.mode == "oracle":
        oracle = build_oracle(cfg)
    elif cfg.mode == "service":
        if not cfg.refiner_endpoint:
            raise ValueError("service mode requires --refiner-endpoint")
        refiner = refine.RefinerClient(cfg.refiner_endpoint)

    rows: list[dict] = []
    changes: list[dict] = []
    skipped_no_response = 0
    skipped_no_references = 0
    try:
        for sample in corpus:
            response = None
            if predictions is not None and sample.id in predictions:
                response = predictions[sample.id]
            elif sample.response is not None:
                response = sample.response
            if response is None:
                skipped_no_response += 1
                continue
            if not sample.references:
                skipped_no_references += 1
                rows.append({"id": sample.id, "response": response})
                continue
            parsed = segment.segment_response(response, len(sample.references))
            if cfg.mode == "oracle":
                result = refine.oracle_refine(
                    parsed,
                    sample,
                    oracle,
                    cfg.enum_cap,
                    cited_only=cfg.cited_only,
                    prune=cfg.prune,
                )
            elif cfg.mode == "service":
                result = refine.apply_service_refine(parsed, sample, refiner)
            else:
                result = refine.posthoc_cite(
                    parsed, sample.references, cfg.sim, cfg.threshold
                )
            rows.append({"id": sample.id, "response": result.refined})
            for index, before, after in result.per_statement_changes:
                if before != after:
                    changes.append(
                        {
                            "id": sample.id,
                            "statement_index": index,
                            "before": list(before),
                            "after": list(after),
                        }
                    )
    finally:
        if oracle is not None:
            oracle.cache.close()

    with open(cfg.out, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    changelog_path = cfg.changelog or cfg.out + ".changes.jsonl"
    with open(changelog_path, "w", encoding="utf-8") as fh:
        for row in changes:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    return JobResult(
        out=cfg.out,
        summary={
            "refined": len(rows),
            "statements_changed": len(changes),
            "skipped_no_response": skipped_no_response,
            "skipped_no_references": skipped_no_references,
            "changelog": changelog_path,
            "backend_calls": oracle.backend_calls if oracle else 0,
            "out_of_range_dropped": refiner.out_of_range_dropped if refiner else 0,
        },
    )


def run_build_refiner_data(cfg: RunConfig) -> JobResult:
    """Construct refiner training records from the corpus answers."""
    if not cfg.out:
        raise ValueError("build-refiner-data requires an output path (--out)")
    corpus = corpus_io.load_samples(cfg.data, cfg.format)
    oracle = build_oracle(cfg)
    try:
        records, skips = refine.build_refiner_dataset(
            corpus, oracle, cfg.enum_cap, prune=cfg.prune
        )
    finally:
        oracle.cache.close()
    with open(cfg.out, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")
    return JobResult(
        out=cfg.out,
        summary={
            "records": len(records),
            **skips,
            "backend_calls": oracle.backend_calls,
        },
    )
