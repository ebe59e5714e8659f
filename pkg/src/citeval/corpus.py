"""Dataset and prediction ingestion, plus report persistence.

Two input layouts are supported and both normalize to `Sample`:

* ``webglm-jsonl``: one JSON object per line with `id`, `question`,
  `references` (array of strings), optional `answer` or `answers`, optional
  `response`.
* ``alce-json``: a single JSON array of objects with `question`, `docs`
  (array of ``{"title":..., "text":...}`` or plain strings), optional
  `answer` / `annotations`, optional `output`. Ids come from `id` or
  `sample_id` when present, otherwise the 0-based position.

Reference passages are stored as plain strings; a doc title, when present,
is prepended to the passage text separated by a newline.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .errors import CorpusFormatError

logger = logging.getLogger(__name__)

FORMATS = ("webglm-jsonl", "alce-json")


@dataclass(frozen=True)
class Sample:
    """One QA instance: question, ordered references, answers, response."""

    id: str
    question: str
    references: tuple[str, ...] = ()
    answers: tuple[str, ...] = ()
    response: str | None = None

    @property
    def answer(self) -> str | None:
        return self.answers[0] if self.answers else None


@dataclass(frozen=True)
class Corpus:
    samples: tuple[Sample, ...]
    source_path: str = ""
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        by_id = {s.id: s for s in self.samples}
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def get(self, sample_id: str) -> Sample | None:
        return self._by_id.get(sample_id)


def _require_str(record: dict, key: str, where: str) -> str:
    value = record.get(key)
    if not isinstance(value, str) or not value:
        raise CorpusFormatError(f"{where}: missing or invalid field {key!r}")
    return value


def _answers_of(record: dict, where: str) -> tuple[str, ...]:
    if "answers" in record and record["answers"] is not None:
        answers = record["answers"]
        if not isinstance(answers, list) or not all(isinstance(a, str) for a in answers):
            raise CorpusFormatError(f"{where}: field 'answers' must be a string array")
        return tuple(answers)
    answer = record.get("answer")
    if answer is None:
        return ()
    if not isinstance(answer, str):
        raise CorpusFormatError(f"{where}: field 'answer' must be a string")
    return (answer,)


def _references_of(raw, where: str) -> tuple[str, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise CorpusFormatError(f"{where}: references must be an array")
    refs = []
    for i, item in enumerate(raw):
        if isinstance(item, str):
            refs.append(item)
        elif isinstance(item, dict):
            text = item.get("text", "")
            title = item.get("title")
            refs.append(f"{title}\n{text}" if title else text)
        else:
            raise CorpusFormatError(f"{where}: reference {i} is neither string nor object")
    return tuple(refs)


def _webglm_jsonl_samples(path: str) -> list[Sample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{where}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"{where}: expected a JSON object")
            response = record.get("response")
            if response is not None and not isinstance(response, str):
                raise CorpusFormatError(f"{where}: field 'response' must be a string")
            samples.append(
                Sample(
                    id=_require_str(record, "id", where),
                    question=_require_str(record, "question", where),
                    references=_references_of(record.get("references"), where),
                    answers=_answers_of(record, where),
                    response=response,
                )
            )
    return samples


def _alce_json_samples(path: str) -> list[Sample]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"{path}: invalid JSON: {exc}") from exc
    if isinstance(data, dict) and "data" in data:
        data = data["data"]
    if not isinstance(data, list):
        raise CorpusFormatError(f"{path}: expected a JSON array of samples")
    samples = []
    for idx, record in enumerate(data):
        where = f"{path}[{idx}]"
        if not isinstance(record, dict):
            raise CorpusFormatError(f"{where}: expected a JSON object")
        raw_id = record.get("id", record.get("sample_id", idx))
        answers = _answers_of(record, where)
        if not answers and isinstance(record.get("annotations"), list):
            answers = tuple(
                a["long_answer"]
                for a in record["annotations"]
                if isinstance(a, dict) and isinstance(a.get("long_answer"), str)
            )
        response = record.get("output", record.get("response"))
        if response is not None and not isinstance(response, str):
            raise CorpusFormatError(f"{where}: response must be a string")
        samples.append(
            Sample(
                id=str(raw_id),
                question=_require_str(record, "question", where),
                references=_references_of(record.get("docs", record.get("references")), where),
                answers=answers,
                response=response,
            )
        )
    return samples


def load_samples(path: str, format: str = "webglm-jsonl") -> Corpus:
    """Load an evaluation corpus, preserving input order."""
    if format not in FORMATS:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {FORMATS}")
    if format == "webglm-jsonl":
        samples = _webglm_jsonl_samples(path)
    else:
        samples = _alce_json_samples(path)
    seen = set()
    for sample in samples:
        if sample.id in seen:
            raise CorpusFormatError(f"{path}: duplicate sample id {sample.id!r}")
        seen.add(sample.id)
    return Corpus(samples=tuple(samples), source_path=str(path))


def load_predictions(path: str) -> dict[str, str]:
    """Load a predictions JSONL (`id`, `response`) into a mapping."""
    predictions: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{where}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"{where}: expected a JSON object")
            pred_id = _require_str(record, "id", where)
            response = record.get("response")
            if not isinstance(response, str):
                raise CorpusFormatError(f"{where}: missing or invalid field 'response'")
            if pred_id in predictions:
                raise CorpusFormatError(f"{where}: duplicate prediction id {pred_id!r}")
            predictions[pred_id] = response
    return predictions


def check_prediction_coverage(predictions: dict[str, str], corpus: Corpus) -> list[str]:
    """Warn about prediction ids with no matching sample; entries are kept."""
    unknown = [pid for pid in predictions if corpus.get(pid) is None]
    for pid in unknown:
        logger.warning("prediction id %r does not match any corpus sample", pid)
    return unknown


def write_samples(corpus: Corpus, path: str) -> None:
    """Write a corpus back out in webglm-jsonl form."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus.samples:
            record: dict = {"id": s.id, "question": s.question}
            if s.references:
                record["references"] = list(s.references)
            if len(s.answers) == 1:
                record["answer"] = s.answers[0]
            elif s.answers:
                record["answers"] = list(s.answers)
            if s.response is not None:
                record["response"] = s.response
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def report_bytes(report: dict) -> bytes:
    """Canonical JSON encoding: stable key order, full float precision."""
    return (json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode(
        "utf-8"
    )


def write_report(report: dict, path: str) -> None:
    """Persist a report; writing the same report twice is byte-identical."""
    with open(path, "wb") as fh:
        fh.write(report_bytes(report))
