"""Citation recall/precision under two metric families, plus correctness.

The strict family follows ALCE: a statement scores recall 1 only if it is
cited and the concatenation of its cited passages supports it; a citation is
counted precise only if the statement is supported at all and the citation
either supports it alone or is pivotal to the remaining set.

The lenient family makes two corrections. Uncited statements that the full
retrieved context cannot support are excluded from the recall denominator
(commonsense and transitional sentences need no citation), and a citation is
relevant if it supports the statement alone or completes some otherwise
insufficient subset of its co-citations, so redundant-but-useful citations
are no longer punished.

Correctness is BLEU-4 and ROUGE-L of the marker-stripped response against
the gold answer(s). All reported scores are percentages.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

from . import textmetrics
from .corpus import Corpus, Sample
from .entail import concat_passages
from .errors import EnumerationCapError
from .segment import Statement, segment_response, strip_all_citations

EXCLUDED = "excluded"

DEFAULT_ENUM_CAP = 10

ALL_FAMILIES = ("alce", "ours")
ALL_CORRECTNESS = ("bleu", "rouge")


@dataclass(frozen=True)
class CitationVerdict:
    citation_id: int
    alce_relevant: bool | None
    ours_relevant: bool | None


@dataclass(frozen=True)
class StatementVerdict:
    statement_index: int
    recall_alce: int | None
    recall_ours: int | str | None  # 0, 1 or EXCLUDED
    citations: tuple[CitationVerdict, ...]
    phi_queries: int


@dataclass(frozen=True)
class SampleResult:
    sample_id: str
    statements: tuple[StatementVerdict, ...]
    dropped_markers: int
    empty_statements: int
    bleu4: float | None
    rouge_l: float | None


@dataclass
class CitationReport:
    """Corpus-level scores with per-sample breakdowns and diagnostics."""

    citation: dict
    correctness: dict
    counts: dict
    diagnostics: dict
    backend_identity: str
    config: dict
    per_sample: list[dict]

    def to_dict(self) -> dict:
        return {
            "citation": self.citation,
            "correctness": self.correctness,
            "counts": self.counts,
            "diagnostics": self.diagnostics,
            "backend_identity": self.backend_identity,
            "config": self.config,
            "per_sample": self.per_sample,
        }


class _CountingPhi:
    """Per-statement query counter around a shared oracle."""

    def __init__(self, phi):
        self._phi = phi
        self.count = 0

    def __call__(self, premise: str, hypothesis: str) -> bool:
        self.count += 1
        return self._phi(premise, hypothesis)


def _premise(refs: tuple[str, ...], ids) -> str:
    return concat_passages(refs[i - 1] for i in sorted(ids))


def statement_recall_alce(stmt: Statement, refs, phi) -> int:
    """1 iff the statement is cited and its cited passages support it."""
    if not stmt.citations:
        return 0
    return 1 if phi(_premise(refs, stmt.citations), stmt.clean_text) else 0


def statement_recall_ours(stmt: Statement, refs, phi) -> int | str:
    """Like the strict rule, but an uncited statement that the whole
    retrieved context cannot support is excluded instead of scored."""
    if not stmt.citations:
        if not refs:
            return EXCLUDED  # no retrieved context at all: nothing to cite
        all_ids = range(1, len(refs) + 1)
        if not phi(_premise(refs, all_ids), stmt.clean_text):
            return EXCLUDED
        return 0
    return statement_recall_alce(stmt, refs, phi)


def citation_relevance_alce(cid: int, stmt: Statement, refs, phi) -> bool:
    """Pivotality gated on full-set support (the strict baseline)."""
    if cid not in stmt.citations:
        raise ValueError(f"citation {cid} is not cited by statement {stmt.index}")
    if not phi(_premise(refs, stmt.citations), stmt.clean_text):
        return False
    if phi(_premise(refs, [cid]), stmt.clean_text):
        return True
    rest = [c for c in stmt.citations if c != cid]
    if not rest:
        return True  # singleton citation: full-set support is this citation
    return not phi(_premise(refs, rest), stmt.clean_text)


def citation_relevance_ours(
    cid: int, stmt: Statement, refs, phi, enum_cap: int = DEFAULT_ENUM_CAP
) -> bool:
    """Relevant if supporting alone, or pivotal for some failing subset.

    The subset search runs in increasing size order and stops at the first
    witness: a nonempty subset of the co-citations that does not support the
    statement until this citation is added.
    """
    if cid not in stmt.citations:
        raise ValueError(f"citation {cid} is not cited by statement {stmt.index}")
    if len(stmt.citations) > enum_cap:
        raise EnumerationCapError(
            f"statement {stmt.index} cites {len(stmt.citations)} references, "
            f"above the enumeration cap {enum_cap}",
            statement_index=stmt.index,
        )
    if phi(_premise(refs, [cid]), stmt.clean_text):
        return True
    rest = [c for c in stmt.citations if c != cid]
    for size in range(1, len(rest) + 1):
        for combo in combinations(rest, size):
            if not phi(_premise(refs, combo), stmt.clean_text) and phi(
                _premise(refs, combo + (cid,)), stmt.clean_text
            ):
                return True
    return False


def evaluate_statement(
    stmt: Statement,
    refs,
    phi,
    families=ALL_FAMILIES,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> StatementVerdict:
    counting = _CountingPhi(phi)
    do_alce = "alce" in families
    do_ours = "ours" in families
    recall_alce = statement_recall_alce(stmt, refs, counting) if do_alce else None
    recall_ours = statement_recall_ours(stmt, refs, counting) if do_ours else None
    verdicts = tuple(
        CitationVerdict(
            citation_id=cid,
            alce_relevant=(
                citation_relevance_alce(cid, stmt, refs, counting) if do_alce else None
            ),
            ours_relevant=(
                citation_relevance_ours(cid, stmt, refs, counting, enum_cap)
                if do_ours
                else None
            ),
        )
        for cid in stmt.citations
    )
    return StatementVerdict(
        statement_index=stmt.index,
        recall_alce=recall_alce,
        recall_ours=recall_ours,
        citations=verdicts,
        phi_queries=counting.count,
    )


def evaluate_sample(
    sample: Sample,
    response: str,
    phi,
    families=ALL_FAMILIES,
    correctness=ALL_CORRECTNESS,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> SampleResult:
    """Score one response. Statements whose marker-free text is empty carry
    no judgeable content and are dropped from every denominator."""
    parsed = segment_response(response, len(sample.references))
    verdicts = []
    empty = 0
    for stmt in parsed.statements:
        if not stmt.clean_text.strip():
            empty += 1
            continue
        verdicts.append(
            evaluate_statement(stmt, sample.references, phi, families, enum_cap)
        )
    stripped = strip_all_citations(response)
    bleu = rouge = None
    if sample.answers:
        if "bleu" in correctness:
            bleu = textmetrics.bleu4(stripped, sample.answers)
        if "rouge" in correctness:
            rouge = textmetrics.rouge_l(stripped, sample.answers)
    return SampleResult(
        sample_id=sample.id,
        statements=tuple(verdicts),
        dropped_markers=parsed.dropped_markers,
        empty_statements=empty,
        bleu4=bleu,
        rouge_l=rouge,
    )


def _family_scores(results: list[SampleResult], family: str) -> dict:
    """Micro-averaged recall/precision/F1 for one family, as percentages."""
    recall_num = recall_den = 0
    prec_num = prec_den = 0
    for res in results:
        for verdict in res.statements:
            score = verdict.recall_alce if family == "alce" else verdict.recall_ours
            if score != EXCLUDED:
                recall_den += 1
                recall_num += int(score)
            for cv in verdict.citations:
                relevant = cv.alce_relevant if family == "alce" else cv.ours_relevant
                prec_den += 1
                prec_num += int(relevant)
    recall = 100.0 * recall_num / recall_den if recall_den else 0.0
    precision = 100.0 * prec_num / prec_den if prec_den else 0.0
    return {
        "recall": recall,
        "precision": precision,
        "f1": textmetrics.f1(recall, precision),
    }


def _verdict_dict(verdict: StatementVerdict) -> dict:
    out: dict = {"index": verdict.statement_index, "phi_queries": verdict.phi_queries}
    if verdict.recall_alce is not None:
        out["recall_alce"] = verdict.recall_alce
    if verdict.recall_ours is not None:
        out["recall_ours"] = verdict.recall_ours
    cites = []
    for cv in verdict.citations:
        entry: dict = {"id": cv.citation_id}
        if cv.alce_relevant is not None:
            entry["alce_relevant"] = cv.alce_relevant
        if cv.ours_relevant is not None:
            entry["ours_relevant"] = cv.ours_relevant
        cites.append(entry)
    out["citations"] = cites
    return out


def corpus_citation_metrics(
    corpus: Corpus,
    predictions: dict[str, str] | None,
    phi,
    *,
    families=ALL_FAMILIES,
    correctness=ALL_CORRECTNESS,
    enum_cap: int = DEFAULT_ENUM_CAP,
    workers: int = 1,
    correctness_aggregation: str = "mean",
    backend_identity: str = "",
    config: dict | None = None,
) -> CitationReport:
    """Evaluate every sample that has a response; aggregate in corpus order.

    Responses come from `predictions` when given (falling back to the
    sample's inline response), and per-sample work may run on a thread pool;
    results are byte-identical regardless of worker count.
    """
    if predictions:
        missing = [pid for pid in predictions if corpus.get(pid) is None]
        if missing:
            raise ValueError(
                f"prediction ids not present in the corpus: {sorted(missing)[:5]}"
            )

    jobs: list[tuple[Sample, str]] = []
    without_response = 0
    without_references = 0
    for sample in corpus:
        response = None
        if predictions is not None and sample.id in predictions:
            response = predictions[sample.id]
        elif sample.response is not None:
            response = sample.response
        if response is None:
            without_response += 1
            continue
        if not sample.references:
            without_references += 1
            continue
        jobs.append((sample, response))

    def run(job: tuple[Sample, str]) -> SampleResult:
        sample, response = job
        return evaluate_sample(sample, response, phi, families, correctness, enum_cap)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    n_statements = sum(len(r.statements) for r in results)
    n_excluded = sum(
        1 for r in results for v in r.statements if v.recall_ours == EXCLUDED
    )
    n_citations = sum(len(v.citations) for r in results for v in r.statements)
    n_dropped = sum(r.dropped_markers for r in results)
    n_empty = sum(r.empty_statements for r in results)
    phi_queries = sum(v.phi_queries for r in results for v in r.statements)

    citation = {f: _family_scores(results, f) for f in families}

    correctness_scores: dict = {}
    pairs = [(r, corpus.get(r.sample_id)) for r in results]
    scored = [(r, s) for r, s in pairs if s is not None and s.answers]
    if "bleu" in correctness:
        correctness_scores["bleu4"] = _aggregate_correctness(
            scored, "bleu", correctness_aggregation, predictions
        )
    if "rouge" in correctness:
        correctness_scores["rouge_l"] = _aggregate_correctness(
            scored, "rouge", correctness_aggregation, predictions
        )

    diagnostics = {
        "no_citations": n_citations == 0,
        "all_statements_excluded": n_statements > 0 and n_excluded == n_statements,
        "long_premises": getattr(phi, "long_premises", 0),
    }

    per_sample = [
        {
            "id": r.sample_id,
            "statements": [_verdict_dict(v) for v in r.statements],
            "dropped_markers": r.dropped_markers,
            "empty_statements": r.empty_statements,
            **({"bleu4": 100.0 * r.bleu4} if r.bleu4 is not None else {}),
            **({"rouge_l": 100.0 * r.rouge_l} if r.rouge_l is not None else {}),
        }
        for r in results
    ]

    return CitationReport(
        citation=citation,
        correctness=correctness_scores,
        counts={
            "samples": len(corpus),
            "samples_evaluated": len(results),
            "samples_without_response": without_response,
            "samples_without_references": without_references,
            "samples_with_answers": len(scored),
            "statements": n_statements,
            "excluded_statements": n_excluded,
            "empty_statements": n_empty,
            "citations": n_citations,
            "dropped_markers": n_dropped,
            "phi_queries": phi_queries,
        },
        diagnostics=diagnostics,
        backend_identity=backend_identity,
        config=config or {},
        per_sample=per_sample,
    )


def _aggregate_correctness(scored, which: str, aggregation: str, predictions) -> float:
    """Correctness as a percentage, either mean-of-samples or corpus-level."""
    if not scored:
        return 0.0
    if aggregation == "mean":
        values = [r.bleu4 if which == "bleu" else r.rouge_l for r, _ in scored]
        values = [v for v in values if v is not None]
        return 100.0 * sum(values) / len(values) if values else 0.0
    pairs = []
    for result, sample in scored:
        response = (
            predictions[sample.id]
            if predictions and sample.id in predictions
            else sample.response
        )
        pairs.append((strip_all_citations(response or ""), list(sample.answers)))
    if which == "bleu":
        return 100.0 * textmetrics.corpus_bleu4(pairs)
    return 100.0 * textmetrics.corpus_rouge_l(pairs)
