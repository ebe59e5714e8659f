"""Independent reference implementations used to pin expected test values.

Everything in this module is deliberately naive: direct transcriptions of
the metric definitions evaluated by exhaustive loops, with no code shared
with the package under test. The production code must agree with these,
never the other way around.
"""

from __future__ import annotations

import math
from itertools import combinations


# ---------------------------------------------------------------------------
# Text similarity, the slow and obvious way
# ---------------------------------------------------------------------------


def naive_tokenize(text: str) -> list[str]:
    """Lowercase, split punctuation into separate tokens, split on space."""
    out: list[str] = []
    word = ""
    for ch in text.lower():
        if ch.isalnum() or ch == "_":
            word += ch
        else:
            if word:
                out.append(word)
                word = ""
            if not ch.isspace():
                out.append(ch)
    if word:
        out.append(word)
    return out


def _ngram_counts(tokens: list[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def naive_bleu4(candidate: str, references: list[str]) -> float:
    """Clipped n-gram precision, geometric mean over n=1..4, brevity penalty.

    Smoothing: for n >= 2 with zero raw matches, use (0+1)/(count+1).
    Zero unigram matches (or an empty candidate) give 0.
    """
    cand = naive_tokenize(candidate)
    refs = [naive_tokenize(r) for r in references]
    if not cand:
        return 0.0

    log_sum = 0.0
    for n in range(1, 5):
        cand_counts = _ngram_counts(cand, n)
        total = sum(cand_counts.values())
        clipped = 0
        for gram, count in cand_counts.items():
            best = max((_ngram_counts(r, n).get(gram, 0) for r in refs), default=0)
            clipped += min(count, best)
        if n == 1:
            if clipped == 0:
                return 0.0
            p = clipped / total
        elif clipped == 0:
            p = 1.0 / (total + 1)
        else:
            p = clipped / total
        log_sum += math.log(p)
    geo = math.exp(log_sum / 4.0)

    c = len(cand)
    # closest reference length; ties broken toward the shorter reference
    r = min((abs(len(r) - c), len(r)) for r in refs)[1]
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * geo


def naive_rouge_l(candidate: str, references: list[str]) -> float:
    """LCS F-measure with beta=1, maximum over references."""
    cand = naive_tokenize(candidate)
    best = 0.0
    for reference in references:
        ref = naive_tokenize(reference)
        if not cand or not ref:
            continue
        # full-matrix LCS
        m, n = len(cand), len(ref)
        table = [[0] * (n + 1) for _ in range(m + 1)]
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                if cand[i - 1] == ref[j - 1]:
                    table[i][j] = table[i - 1][j - 1] + 1
                else:
                    table[i][j] = max(table[i - 1][j], table[i][j - 1])
        lcs = table[m][n]
        if lcs == 0:
            continue
        p = lcs / m
        r = lcs / n
        best = max(best, 2 * p * r / (p + r))
    return best


# ---------------------------------------------------------------------------
# Citation relevance over abstract truth tables
# ---------------------------------------------------------------------------
#
# phi is a function from a frozenset of citation ids to a bool: "does the
# concatenation of these passages support the statement". The empty set never
# supports anything.


def brute_relevance_ours(cid: int, cited: tuple[int, ...], phi) -> bool:
    """Exhaustive check of the two relevance conditions.

    Relevant iff the citation supports the statement alone, or there is a
    nonempty subset of the other citations that fails on its own but
    succeeds once this citation is added.
    """
    if phi(frozenset([cid])):
        return True
    rest = [c for c in cited if c != cid]
    for size in range(1, len(rest) + 1):
        for combo in combinations(rest, size):
            sub = frozenset(combo)
            if not phi(sub) and phi(sub | {cid}):
                return True
    return False


def brute_relevance_alce(cid: int, cited: tuple[int, ...], phi) -> bool:
    """ALCE-style relevance: gated on full-set support, then pivotality."""
    full = frozenset(cited)
    if not phi(full):
        return False
    if phi(frozenset([cid])):
        return True
    remainder = full - {cid}
    if not remainder:
        return True  # singleton: full-set support is the citation itself
    return not phi(remainder)


def brute_minimal_support_union(n_refs: int, phi) -> tuple[int, ...]:
    """Union of all inclusion-minimal supporting subsets, by full enumeration."""
    ids = range(1, n_refs + 1)
    supporting: list[frozenset[int]] = []
    for size in range(1, n_refs + 1):
        for combo in combinations(ids, size):
            if phi(frozenset(combo)):
                supporting.append(frozenset(combo))
    union: set[int] = set()
    for s in supporting:
        if not any(other < s for other in supporting):
            union |= s
    return tuple(sorted(union))
