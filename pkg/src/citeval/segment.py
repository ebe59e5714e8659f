"""Statement segmentation and inline citation-marker handling.

A response is split into statements (one sentence each) and every statement
carries the citation ids parsed from its inline markers. The marker grammar
is a public contract:

    marker  = "[" id ("," id)* "]"
    id      = one or more ASCII digits, a 1-based reference index

Whitespace is tolerated around the commas of a multi-id marker ("[1, 2]"),
since models emit that form routinely. Anything else in brackets is plain
text and is left untouched.

Sentence boundaries are a `.`, `!` or `?` followed by whitespace or end of
text, except when the period closes a known abbreviation or a single-letter
initial. A marker sitting after the terminal punctuation ("Cats purr. [1]")
attaches to the sentence it follows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

MARKER_RE = re.compile(r"\[\d+(?:\s*,\s*\d+)*\]")

_TERMINALS = ".!?"
# characters that should not be preceded by whitespace once a marker is gone
_CLOSERS = set(".,;:!?)]}…'\"")

_ABBREVIATIONS = frozenset({"e.g.", "i.e.", "etc.", "dr.", "mr.", "ms.", "vs."})


@dataclass(frozen=True)
class Statement:
    """One sentence of a response, with its parsed citations.

    `raw_span` is the exact substring of the response (markers included);
    `clean_text` has the markers removed and the whitespace around each
    removal point collapsed. `citations` holds the in-range ids in first
    occurrence order, without duplicates.
    """

    index: int
    start: int
    end: int
    raw_span: str
    clean_text: str
    citations: tuple[int, ...]


@dataclass(frozen=True)
class ParsedResponse:
    """All statements of one response, in order.

    Statement spans never overlap, and the text between consecutive spans is
    pure whitespace, so the original response can always be reconstructed
    from `text` and the span offsets.
    """

    text: str
    n_refs: int
    statements: tuple[Statement, ...]
    dropped_markers: int


def _is_abbreviation(text: str, period_idx: int) -> bool:
    """True if the period at `period_idx` ends an abbreviation or initial."""
    start = period_idx
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : period_idx + 1]
    if token.lower() in _ABBREVIATIONS:
        return True
    # single uppercase letter + period, possibly chained ("U.S.", "J.")
    return bool(re.fullmatch(r"(?:[A-Z]\.)+", token))


def _fused_chain_end(text: str, pos: int) -> int | None:
    """End offset of a run of back-to-back markers starting at `pos`.

    Only a run that terminates at whitespace or end of text counts; a run
    fused onto following prose (e.g. "[1]word") belongs to that prose.
    """
    m = MARKER_RE.match(text, pos)
    while m is not None:
        end = m.end()
        if end >= len(text) or text[end].isspace():
            return end
        m = MARKER_RE.match(text, end)
    return None


def _attach_trailing_markers(text: str, pos: int) -> int:
    """Extend a sentence end at `pos` over markers glued to it.

    A marker after the terminal punctuation belongs to the sentence it
    follows, provided the marker is not fused directly onto the next
    sentence's text.
    """
    while True:
        probe = pos
        while probe < len(text) and text[probe].isspace():
            probe += 1
        end = _fused_chain_end(text, probe)
        if end is None:
            return pos
        pos = end


def _sentence_spans(text: str) -> list[tuple[int, int]]:
    """Offsets of sentence spans, trimmed of surrounding whitespace."""
    spans: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(text)

    def flush(end: int) -> None:
        nonlocal start
        left = start
        while left < end and text[left].isspace():
            left += 1
        right = end
        while right > left and text[right - 1].isspace():
            right -= 1
        if right > left:
            spans.append((left, right))
        start = end

    while i < n:
        ch = text[i]
        if ch in _TERMINALS:
            nxt = text[i + 1] if i + 1 < n else None
            ends_here = (
                nxt is None
                or nxt.isspace()
                or _fused_chain_end(text, i + 1) is not None
            )
            if ends_here and not (ch == "." and _is_abbreviation(text, i)):
                end = _attach_trailing_markers(text, i + 1)
                flush(end)
                i = end
                continue
        i += 1
    flush(n)
    return spans


def _remove_markers(text: str) -> tuple[str, list[int]]:
    """Delete every marker, collapsing whitespace only at the removal points.

    Returns the cleaned text and the ids of all removed markers, in order of
    appearance (duplicates included; range filtering is the caller's job).
    """
    out: list[str] = []
    ids: list[int] = []
    i = 0
    n = len(text)
    while i < n:
        m = MARKER_RE.match(text, i)
        if m is None:
            out.append(text[i])
            i += 1
            continue
        ids.extend(int(part) for part in m.group(0)[1:-1].split(","))
        i = m.end()
        if not out:
            # marker at the very start: eat the whitespace it dragged along
            if i < n and text[i].isspace():
                while i < n and text[i].isspace():
                    i += 1
        elif out[-1].isspace():
            if i >= n or text[i] in _CLOSERS:
                # " [1]." or " [1]<end>": the space belonged to the marker
                while out and out[-1].isspace():
                    out.pop()
            elif text[i].isspace():
                run_end = i
                while run_end < n and text[run_end].isspace():
                    run_end += 1
                if run_end == n:
                    # " [1]   <end>": keep the trailing run as-is
                    while out and out[-1].isspace():
                        out.pop()
                else:
                    # " [1] word": collapse to the single preceding run
                    i = run_end
    return "".join(out), ids


def extract_citations(statement_text: str, n_refs: int) -> tuple[str, tuple[int, ...]]:
    """Parse one statement's markers.

    Returns the marker-free text and the in-range ids in first-occurrence
    order. Out-of-range ids are silently dropped here; `segment_response`
    counts them.
    """
    clean, ids, _ = _extract(statement_text, n_refs)
    return clean, ids


def _extract(text: str, n_refs: int) -> tuple[str, tuple[int, ...], int]:
    clean, raw_ids = _remove_markers(text)
    seen: list[int] = []
    dropped = 0
    for cid in raw_ids:
        if cid < 1 or cid > n_refs:
            dropped += 1
        elif cid not in seen:
            seen.append(cid)
    return clean, tuple(seen), dropped


def segment_response(text: str, n_refs: int) -> ParsedResponse:
    """Split a response into statements and parse their citation markers.

    Total and deterministic on arbitrary input; empty or whitespace-only
    text yields zero statements.
    """
    if n_refs < 0:
        raise ValueError("n_refs must be >= 0")
    statements: list[Statement] = []
    dropped = 0
    for idx, (start, end) in enumerate(_sentence_spans(text)):
        raw = text[start:end]
        clean, ids, d = _extract(raw, n_refs)
        dropped += d
        statements.append(Statement(idx, start, end, raw, clean, ids))
    return ParsedResponse(text, n_refs, tuple(statements), dropped)


def strip_all_citations(text: str) -> str:
    """Remove every citation marker from a response; idempotent.

    Equivalent to re-rendering every statement's clean text with the
    original separators between them.
    """
    parsed = segment_response(text, 0)
    return rewrite_citations(parsed, [() for _ in parsed.statements])


def render_statement(clean_text: str, ids: tuple[int, ...]) -> str:
    """Insert `[k]` markers into a marker-free statement.

    Markers go immediately before the trailing terminal punctuation (and any
    whitespace stuck to it), or at the end when there is none, always as one
    consecutive run.
    """
    if not ids:
        return clean_text
    markers = "".join(f"[{k}]" for k in ids)
    m = re.search(r"(\s*)([.!?]+)$", clean_text)
    if m:
        body, ws, punct = clean_text[: m.start()], m.group(1), m.group(2)
        if not body:
            # the statement is bare punctuation: append instead
            return punct + markers
        if ws:
            # odd but possible: whitespace already sits before the terminal;
            # glue the markers to the body so stripping restores it exactly
            return body + markers + ws + punct
        return body + " " + markers + punct
    sep = " " if clean_text and not clean_text[-1].isspace() else ""
    return clean_text + sep + markers


def rewrite_citations(parsed: ParsedResponse, new_ids) -> str:
    """Re-render a parsed response with replacement citation sets.

    `new_ids` holds one ordered id collection per statement. The surrounding
    text (statement order, separators, the statements' marker-free form) is
    preserved exactly; only markers change.
    """
    new_ids = [tuple(ids) for ids in new_ids]
    if len(new_ids) != len(parsed.statements):
        raise ValueError(
            f"expected {len(parsed.statements)} id sets, got {len(new_ids)}"
        )
    for stmt, ids in zip(parsed.statements, new_ids):
        for cid in ids:
            if cid < 1 or cid > parsed.n_refs:
                raise ValueError(
                    f"statement {stmt.index}: citation id {cid} out of range "
                    f"1..{parsed.n_refs}"
                )
    parts: list[str] = []
    cursor = 0
    for stmt, ids in zip(parsed.statements, new_ids):
        parts.append(parsed.text[cursor : stmt.start])
        parts.append(render_statement(stmt.clean_text, ids))
        cursor = stmt.end
    parts.append(parsed.text[cursor:])
    return "".join(parts)
