"""Citation refinement: fix a response's citations without touching its text.

Three routes produce a per-statement citation set:

* the enumeration oracle, which searches reference subsets for the minimal
  combinations that entail the statement and cites their union (this is
  also exactly the target used to build refiner training data);
* an external refiner service speaking the `/v1/refine` protocol;
* a rule-based post-hoc matcher that cites any reference containing a
  sentence lexically similar to the statement.

Whatever the route, the refined response differs from the original only in
its `[k]` markers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from itertools import combinations

import httpx

from . import textmetrics
from .corpus import Corpus, Sample
from .entail import _post_with_retries, concat_passages
from .errors import EnumerationCapError, ProtocolError
from .segment import ParsedResponse, rewrite_citations, segment_response

logger = logging.getLogger(__name__)

DEFAULT_ENUM_CAP = 10


@dataclass(frozen=True)
class RefinerRecord:
    """One refiner training example."""

    question: str
    references: tuple[str, ...]
    statement: str
    target_citation_ids: tuple[int, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "question": self.question,
                "references": list(self.references),
                "statement": self.statement,
                "target_citation_ids": list(self.target_citation_ids),
            },
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class RefinedResponse:
    original: str
    refined: str
    per_statement_changes: tuple[tuple[int, tuple[int, ...], tuple[int, ...]], ...]
    phi_queries: int


def gold_citations(
    statement: str,
    references,
    phi,
    cap: int = DEFAULT_ENUM_CAP,
    prune: bool = True,
    candidates=None,
) -> tuple[int, ...]:
    """Union of all inclusion-minimal reference subsets entailing the statement.

    Subsets are enumerated in increasing size; supersets of subsets already
    known to suffice are skipped (they cannot be minimal). Returns () when
    nothing supports the statement. `candidates` restricts the search to a
    subset of reference ids (default: all of them).
    """
    references = tuple(references)
    ids = (
        sorted(set(candidates))
        if candidates is not None
        else list(range(1, len(references) + 1))
    )
    if any(i < 1 or i > len(references) for i in ids):
        raise ValueError(f"candidate ids {ids} out of range 1..{len(references)}")
    if len(ids) > cap:
        raise EnumerationCapError(
            f"{len(ids)} candidate references exceed the enumeration cap {cap}"
        )
    if not statement.strip():
        return ()
    supporting: list[frozenset[int]] = []
    for size in range(1, len(ids) + 1):
        for combo in combinations(ids, size):
            subset = frozenset(combo)
            if prune and any(m <= subset for m in supporting):
                continue
            premise = concat_passages(references[i - 1] for i in combo)
            if phi(premise, statement):
                supporting.append(subset)
    union: set[int] = set()
    for s in supporting:
        if not any(other < s for other in supporting):
            union |= s
    return tuple(sorted(union))


def oracle_refine(
    parsed: ParsedResponse,
    sample: Sample,
    phi,
    cap: int = DEFAULT_ENUM_CAP,
    cited_only: bool = False,
    prune: bool = True,
) -> RefinedResponse:
    """Set every statement's citations to its gold set.

    With `cited_only`, enumeration runs over the statement's original
    citations instead of all references (the refiner then cannot add
    citations, only keep or remove).
    """
    if not sample.references:
        raise ValueError(f"sample {sample.id!r} has no references to cite")
    queries_before = getattr(phi, "queries", 0)
    new_ids = []
    for stmt in parsed.statements:
        if stmt.clean_text.strip():
            new_ids.append(
                gold_citations(
                    stmt.clean_text,
                    sample.references,
                    phi,
                    cap,
                    prune=prune,
                    candidates=stmt.citations if cited_only else None,
                )
            )
        else:
            new_ids.append(())
    refined = rewrite_citations(parsed, new_ids)
    changes = tuple(
        (stmt.index, stmt.citations, after)
        for stmt, after in zip(parsed.statements, new_ids)
    )
    return RefinedResponse(
        original=parsed.text,
        refined=refined,
        per_statement_changes=changes,
        phi_queries=getattr(phi, "queries", 0) - queries_before,
    )


class RefinerClient:
    """HTTP client for a fine-tuned refiner behind `/v1/refine`."""

    def __init__(
        self,
        endpoint: str,
        *,
        timeout: float = 60.0,
        retries: int = 3,
        retry_wait: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self._retries = retries
        self._retry_wait = retry_wait
        self._client = client or httpx.Client(timeout=timeout)
        self.out_of_range_dropped = 0

    def refine(self, question: str, references, statement: str) -> list[int]:
        body = {
            "question": question,
            "references": list(references),
            "statement": statement,
        }
        reply = _post_with_retries(
            self._client,
            f"{self.endpoint}/v1/refine",
            body,
            retries=self._retries,
            retry_wait=self._retry_wait,
        )
        ids = reply.get("citation_ids")
        if not isinstance(ids, list) or not all(isinstance(i, int) for i in ids):
            raise ProtocolError(
                f"refiner returned malformed citation_ids: {ids!r}",
                raw=json.dumps(reply),
            )
        return ids


def service_refine(statement: str, sample: Sample, client: RefinerClient) -> tuple[int, ...]:
    """Ask the refiner service for a statement's citation ids.

    Out-of-range ids are dropped (and counted on the client); the result is
    deduplicated and sorted ascending.
    """
    raw = client.refine(sample.question, sample.references, statement)
    n = len(sample.references)
    kept = sorted({i for i in raw if 1 <= i <= n})
    dropped = len([i for i in raw if not 1 <= i <= n])
    if dropped:
        client.out_of_range_dropped += dropped
        logger.warning(
            "refiner returned %d out-of-range id(s) for sample %r", dropped, sample.id
        )
    return tuple(kept)


def apply_service_refine(
    parsed: ParsedResponse, sample: Sample, client: RefinerClient
) -> RefinedResponse:
    """Refine every statement of a parsed response through the service."""
    new_ids = []
    for stmt in parsed.statements:
        if stmt.clean_text.strip():
            new_ids.append(service_refine(stmt.clean_text, sample, client))
        else:
            new_ids.append(())
    refined = rewrite_citations(parsed, new_ids)
    changes = tuple(
        (stmt.index, stmt.citations, after)
        for stmt, after in zip(parsed.statements, new_ids)
    )
    return RefinedResponse(parsed.text, refined, changes, 0)


def build_refiner_dataset(
    corpus: Corpus, phi, cap: int = DEFAULT_ENUM_CAP, prune: bool = True
) -> tuple[list[RefinerRecord], dict]:
    """One training record per statement of each sample's answer.

    The statement field is the marker-free text and the target is its gold
    citation set; statements whose gold set is empty stay in (they teach the
    refiner to remove citations). Samples with more references than the cap,
    or without an answer, are skipped and counted.
    """
    records: list[RefinerRecord] = []
    skipped_cap = 0
    skipped_no_answer = 0
    for sample in corpus:
        if sample.answer is None:
            skipped_no_answer += 1
            continue
        if len(sample.references) > cap:
            skipped_cap += 1
            continue
        parsed = segment_response(sample.answer, len(sample.references))
        for stmt in parsed.statements:
            if not stmt.clean_text.strip():
                continue
            targets = gold_citations(
                stmt.clean_text, sample.references, phi, cap, prune=prune
            )
            records.append(
                RefinerRecord(
                    question=sample.question,
                    references=sample.references,
                    statement=stmt.clean_text,
                    target_citation_ids=targets,
                )
            )
    return records, {"skipped_over_cap": skipped_cap, "skipped_no_answer": skipped_no_answer}


def posthoc_cite(
    parsed: ParsedResponse,
    references,
    sim: str = "rouge",
    threshold: float = 0.3,
) -> RefinedResponse:
    """Rule-based post-hoc citation: similarity matching against references.

    Existing markers are discarded. Each statement is compared with every
    sentence of every reference; reference k is cited iff its best sentence
    similarity strictly exceeds the threshold.
    """
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must be within [0, 1]")
    if sim not in ("bleu", "rouge"):
        raise ValueError(f"unknown similarity metric {sim!r}")
    score = textmetrics.bleu4 if sim == "bleu" else textmetrics.rouge_l
    references = tuple(references)
    ref_sentences = [
        [s.clean_text for s in segment_response(ref, 0).statements]
        for ref in references
    ]
    new_ids = []
    for stmt in parsed.statements:
        ids = []
        if stmt.clean_text.strip():
            for k, sentences in enumerate(ref_sentences, start=1):
                best = max(
                    (score(stmt.clean_text, sent) for sent in sentences), default=0.0
                )
                if best > threshold:
                    ids.append(k)
        new_ids.append(tuple(ids))
    refined = rewrite_citations(parsed, new_ids)
    changes = tuple(
        (stmt.index, stmt.citations, after)
        for stmt, after in zip(parsed.statements, new_ids)
    )
    return RefinedResponse(parsed.text, refined, changes, 0)
