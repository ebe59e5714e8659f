"""Surface-similarity metrics: BLEU-4, ROUGE-L, and the F1 combiner.

Tokenization is deliberately simple and fixed: lowercase, punctuation split
off as its own tokens, whitespace-separated. Scores are fractions in [0, 1];
report code converts to percentages.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from collections.abc import Sequence

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _as_references(gold: str | Sequence[str]) -> list[str]:
    return [gold] if isinstance(gold, str) else list(gold)


def bleu4(candidate: str, gold: str | Sequence[str]) -> float:
    """BLEU-4 with clipped modified precision and brevity penalty.

    Clipping is against the best count over all references. Zero-match
    n-gram precisions for n >= 2 are add-one smoothed ((0+1)/(count+1)),
    which also covers candidates shorter than four tokens; zero unigram
    overlap yields 0.
    """
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in _as_references(gold)]
    if not cand or not refs:
        return 0.0

    log_sum = 0.0
    for n in range(1, 5):
        counts = _ngrams(cand, n)
        total = sum(counts.values())
        best = Counter()
        for ref in refs:
            ref_counts = _ngrams(ref, n)
            for gram in counts:
                best[gram] = max(best[gram], ref_counts.get(gram, 0))
        clipped = sum(min(c, best[gram]) for gram, c in counts.items())
        if n == 1:
            if clipped == 0:
                return 0.0
            precision = clipped / total
        elif clipped == 0:
            precision = 1.0 / (total + 1)
        else:
            precision = clipped / total
        log_sum += math.log(precision)

    c = len(cand)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_sum / 4.0)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, gold: str | Sequence[str]) -> float:
    """ROUGE-L F-measure (beta = 1); maximum over references."""
    cand = tokenize(candidate)
    best = 0.0
    for reference in _as_references(gold):
        ref = tokenize(reference)
        lcs = _lcs_length(cand, ref)
        if lcs == 0:
            continue
        p = lcs / len(cand)
        r = lcs / len(ref)
        best = max(best, 2 * p * r / (p + r))
    return best


def f1(recall: float, precision: float) -> float:
    """Harmonic mean of two percentage scores; 0 when both are 0."""
    if recall + precision == 0:
        return 0.0
    return 2 * recall * precision / (recall + precision)


def corpus_bleu4(pairs: Sequence[tuple[str, Sequence[str]]]) -> float:
    """Corpus-level BLEU-4: n-gram statistics pooled over all pairs."""
    clipped = [0] * 5
    totals = [0] * 5
    cand_len = 0
    ref_len = 0
    for candidate, gold in pairs:
        cand = tokenize(candidate)
        refs = [tokenize(r) for r in _as_references(gold)]
        if not cand or not refs:
            continue
        cand_len += len(cand)
        ref_len += min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
        for n in range(1, 5):
            counts = _ngrams(cand, n)
            totals[n] += sum(counts.values())
            for gram, c in counts.items():
                best = max(_ngrams(r, n).get(gram, 0) for r in refs)
                clipped[n] += min(c, best)
    if cand_len == 0 or clipped[1] == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        if n > 1 and clipped[n] == 0:
            log_sum += math.log(1.0 / (totals[n] + 1))
        else:
            log_sum += math.log(clipped[n] / totals[n])
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_sum / 4.0)


def corpus_rouge_l(pairs: Sequence[tuple[str, Sequence[str]]]) -> float:
    """Corpus-level ROUGE-L: LCS statistics pooled over all pairs.

    For each pair the reference with the best pair-level F is pooled.
    """
    lcs_sum = 0
    cand_sum = 0
    ref_sum = 0
    for candidate, gold in pairs:
        cand = tokenize(candidate)
        if not cand:
            continue
        best: tuple[float, int, int] | None = None
        for reference in _as_references(gold):
            ref = tokenize(reference)
            if not ref:
                continue
            lcs = _lcs_length(cand, ref)
            score = 2 * lcs / (len(cand) + len(ref))
            if best is None or score > best[0]:
                best = (score, lcs, len(ref))
        if best is None:
            continue
        lcs_sum += best[1]
        cand_sum += len(cand)
        ref_sum += best[2]
    if lcs_sum == 0 or cand_sum == 0 or ref_sum == 0:
        return 0.0
    p = lcs_sum / cand_sum
    r = lcs_sum / ref_sum
    return 2 * p * r / (p + r)
