"""Entailment backends: does a premise support a hypothesis?

Every backend answers the same binary question through `judge(premise,
hypothesis)` and carries an `identity` string naming everything that can
change its answers (kind, endpoint, model, prompt version). Results are
cached under a digest of (identity, premise, hypothesis), so two runs with
the same inputs and a warm cache never touch a backend at all.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from typing import Protocol, runtime_checkable

import httpx

from .errors import BackendUnavailableError, CiteEvalError, ProtocolError

PROMPT_VERSION = "v1"
TOKEN_ENV_VAR = "CITEVAL_API_TOKEN"

_JUDGE_TEMPLATE = """\
You are verifying citations in a generated answer.

{references}

Statement: {statement}

Does the cited reference material above fully support the statement? \
Reply with exactly one word: Yes or No.\
"""


def concat_passages(passages) -> str:
    """Join passages with single newlines; callers pass them in id order."""
    return "\n".join(passages)


def render_judge_prompt(statement: str, cited_passages) -> str:
    """Fill the Yes/No judge template with numbered passages."""
    passages = list(cited_passages)
    if passages:
        refs = "\n".join(
            f"Reference [{i}]: {p}" for i, p in enumerate(passages, start=1)
        )
    else:
        refs = "No references are cited for this statement."
    return _JUDGE_TEMPLATE.format(references=refs, statement=statement)


def parse_judge_reply(raw: str) -> bool:
    """Read the judge's verdict from the first alphabetic token."""
    m = re.search(r"[A-Za-z]+", raw)
    if m:
        token = m.group(0).lower()
        if token == "yes":
            return True
        if token == "no":
            return False
    raise ProtocolError(f"judge reply is not a yes/no verdict: {raw!r}", raw=raw)


@runtime_checkable
class EntailmentBackend(Protocol):
    kind: str

    @property
    def identity(self) -> str: ...

    def judge(self, premise: str, hypothesis: str) -> bool: ...


class TableBackend:
    """Entailment by lookup in a fixed table; unknown pairs are False."""

    kind = "table"

    def __init__(self, entries: dict[tuple[str, str], bool], name: str | None = None):
        self._entries = dict(entries)
        if name is None:
            canonical = json.dumps(
                sorted([p, h, v] for (p, h), v in self._entries.items()),
                ensure_ascii=False,
            )
            name = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
        self._identity = f"table:{name}"

    @classmethod
    def from_file(cls, path) -> "TableBackend":
        """Load `[{"premise":..., "hypothesis":..., "entails": bool}, ...]`."""
        with open(path, encoding="utf-8") as fh:
            rows = json.load(fh)
        entries = {(r["premise"], r["hypothesis"]): bool(r["entails"]) for r in rows}
        return cls(entries, name=os.path.basename(str(path)))

    @property
    def identity(self) -> str:
        return self._identity

    def judge(self, premise: str, hypothesis: str) -> bool:
        return self._entries.get((premise, hypothesis), False)


class LexicalBackend:
    """Deterministic offline stand-in: token containment, not real NLI.

    True iff every hypothesis token of length >= 4 also occurs among the
    premise tokens (lowercased, punctuation stripped).
    """

    kind = "lexical"

    @property
    def identity(self) -> str:
        return "lexical:v1"

    @staticmethod
    def _tokens(text: str) -> list[str]:
        return re.findall(r"\w+", text.lower())

    def judge(self, premise: str, hypothesis: str) -> bool:
        premise_tokens = set(self._tokens(premise))
        return all(
            t in premise_tokens for t in self._tokens(hypothesis) if len(t) >= 4
        )


def _auth_headers() -> dict[str, str]:
    token = os.environ.get(TOKEN_ENV_VAR)
    return {"Authorization": f"Bearer {token}"} if token else {}


class NliHttpBackend:
    """Client for the `/v1/entail` protocol served by an NLI model service.

    The served model's id (from `GET /health`) is baked into the identity so
    a model swap behind the same endpoint invalidates the cache.
    """

    kind = "nli-http"

    def __init__(
        self,
        endpoint: str,
        *,
        model_id: str | None = None,
        timeout: float = 60.0,
        retries: int = 3,
        retry_wait: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self._retries = retries
        self._retry_wait = retry_wait
        self._client = client or httpx.Client(timeout=timeout)
        if model_id is None:
            model_id = self._probe_model_id()
        self._identity = f"nli-http:{self.endpoint}:{model_id}"

    def _probe_model_id(self) -> str:
        try:
            resp = self._client.get(f"{self.endpoint}/health", headers=_auth_headers())
            resp.raise_for_status()
            return str(resp.json().get("model_id", "unknown"))
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(
                f"NLI service at {self.endpoint} is unreachable: {exc}"
            ) from exc

    @property
    def identity(self) -> str:
        return self._identity

    def judge(self, premise: str, hypothesis: str) -> bool:
        body = {"premise": premise, "hypothesis": hypothesis}
        reply = _post_with_retries(
            self._client,
            f"{self.endpoint}/v1/entail",
            body,
            retries=self._retries,
            retry_wait=self._retry_wait,
        )
        label = reply.get("label")
        if label not in ("entailment", "not_entailment"):
            raise ProtocolError(
                f"NLI service returned unknown label: {label!r}", raw=json.dumps(reply)
            )
        return label == "entailment"


class LlmJudgeBackend:
    """Yes/No judging through an OpenAI-compatible chat endpoint.

    Greedy (temperature 0), single user message. An unparseable verdict is
    retried once, then surfaces as a protocol error carrying the raw reply.
    """

    kind = "llm-judge"

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        timeout: float = 60.0,
        retries: int = 3,
        retry_wait: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self._retries = retries
        self._retry_wait = retry_wait
        self._client = client or httpx.Client(timeout=timeout)

    @property
    def identity(self) -> str:
        return f"llm-judge:{self.endpoint}:{self.model}:prompt-{PROMPT_VERSION}"

    def _chat_url(self) -> str:
        if self.endpoint.endswith("/chat/completions"):
            return self.endpoint
        return f"{self.endpoint}/v1/chat/completions"

    def _ask(self, prompt: str) -> str:
        body = {
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }
        reply = _post_with_retries(
            self._client,
            self._chat_url(),
            body,
            retries=self._retries,
            retry_wait=self._retry_wait,
        )
        try:
            return reply["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(
                f"malformed chat completion: {exc}", raw=json.dumps(reply)
            ) from exc

    def judge(self, premise: str, hypothesis: str) -> bool:
        # phi sees one premise string; the judge treats it as a single
        # block of cited reference material
        prompt = render_judge_prompt(hypothesis, [premise])
        try:
            return parse_judge_reply(self._ask(prompt))
        except ProtocolError:
            return parse_judge_reply(self._ask(prompt))


def _post_with_retries(
    client: httpx.Client, url: str, body: dict, *, retries: int, retry_wait: float
) -> dict:
    last_error: Exception | None = None
    for attempt in range(retries):
        try:
            resp = client.post(url, json=body, headers=_auth_headers())
            if resp.status_code != 200:
                raise httpx.HTTPStatusError(
                    f"HTTP {resp.status_code}", request=resp.request, response=resp
                )
            return resp.json()
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            last_error = exc
            if attempt + 1 < retries and retry_wait > 0:
                time.sleep(retry_wait * (2**attempt))
    raise BackendUnavailableError(
        f"backend at {url} unavailable after {retries} attempts: {last_error}"
    )


class EntailmentCache:
    """Append-only JSONL cache of judged pairs, keyed by digest.

    Safe for concurrent lookups; appends are serialized and flushed so an
    aborted run keeps everything judged so far. `path=None` keeps the cache
    in memory only.
    """

    def __init__(self, path=None):
        self.path = path
        self._entries: dict[str, bool] = {}
        self._lock = threading.Lock()
        self._fh = None
        if path is not None:
            self._load()
            self._fh = open(path, "a", encoding="utf-8")

    def _load(self) -> None:
        if not os.path.exists(self.path):
            return
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                    self._entries[row["k"]] = bool(row["v"])
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise CiteEvalError(
                        f"corrupt cache entry at {self.path}:{lineno}: {exc}"
                    ) from exc

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, key: str) -> bool | None:
        with self._lock:
            return self._entries.get(key)

    def store(self, key: str, value: bool) -> None:
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = value
            if self._fh is not None:
                self._fh.write(json.dumps({"k": key, "v": value}) + "\n")
                self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def cache_key(identity: str, premise: str, hypothesis: str) -> str:
    """Collision-safe digest: length-prefixed fields, SHA-256."""
    h = hashlib.sha256()
    for part in (identity, premise, hypothesis):
        raw = part.encode("utf-8")
        h.update(str(len(raw)).encode("ascii"))
        h.update(b":")
        h.update(raw)
    return h.hexdigest()


def entails(
    backend: EntailmentBackend, cache: EntailmentCache, premise: str, hypothesis: str
) -> bool:
    """The phi function: cached binary entailment."""
    if not premise or not hypothesis:
        raise ValueError("premise and hypothesis must be non-empty")
    key = cache_key(backend.identity, premise, hypothesis)
    hit = cache.lookup(key)
    if hit is not None:
        return hit
    value = bool(backend.judge(premise, hypothesis))
    cache.store(key, value)
    return value


class EntailmentOracle:
    """Callable phi with bookkeeping.

    Tracks how often it was asked, how many questions actually reached the
    backend (cache misses), and how many premises exceeded the configured
    length limit (overlong premises are judged anyway, just counted).
    """

    def __init__(
        self,
        backend: EntailmentBackend,
        cache: EntailmentCache | None = None,
        premise_length_limit: int = 8000,
    ):
        self.backend = backend
        self.cache = cache if cache is not None else EntailmentCache()
        self.premise_length_limit = premise_length_limit
        self.queries = 0
        self.backend_calls = 0
        self.long_premises = 0
        self._lock = threading.Lock()

    @property
    def identity(self) -> str:
        return self.backend.identity

    def __call__(self, premise: str, hypothesis: str) -> bool:
        if not premise or not hypothesis:
            raise ValueError("premise and hypothesis must be non-empty")
        key = cache_key(self.backend.identity, premise, hypothesis)
        with self._lock:
            self.queries += 1
            if len(premise) > self.premise_length_limit:
                self.long_premises += 1
        hit = self.cache.lookup(key)
        if hit is not None:
            return hit
        value = bool(self.backend.judge(premise, hypothesis))
        with self._lock:
            self.backend_calls += 1
        self.cache.store(key, value)
        return value
