import math

from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from citeval.textmetrics import bleu4, corpus_bleu4, corpus_rouge_l, f1, rouge_l

# Expected values computed with tests/oracles.py (naive_bleu4 / naive_rouge_l)
# before the production implementations were written; kept frozen.
FIXED_PAIRS = [
    ("the cat sat on the mat", ["the cat sat on the mat"], 1.0, 1.0),
    ("the the the cat", ["the cat sat down"], 0.408248290463863, 0.5),
    (
        "a quick brown fox jumps",
        ["the quick brown fox jumped over the lazy dog"],
        0.19199242796476845,
        0.42857142857142855,
    ),
    ("completely different words here", ["nothing shared at all"], 0.0, 0.0),
    (
        "Water boils at 100 degrees.",
        ["Water boils at 100 degrees Celsius under standard pressure."],
        0.408305606414529,
        0.7499999999999999,
    ),
    ("short", ["short"], 1.0, 1.0),
    ("one two three", ["one two three four five"], 0.513417119032592, 0.7499999999999999),
    ("the cat the cat the cat", ["the cat"], 0.24028114141347542, 0.5),
    (
        "blue light scatters more",
        ["red light scatters less", "blue light scatters much more"],
        0.6389431042462724,
        0.888888888888889,
    ),
    ("a b c d", ["a x c y"], 0.37991784282579627, 0.5),
]


class TestBleu4:
    def test_identity_is_one(self):
        assert bleu4("the cat sat on the mat", "the cat sat on the mat") == 1.0

    def test_disjoint_is_zero(self):
        assert bleu4("alpha beta", "gamma delta") == 0.0

    def test_empty_candidate_is_zero(self):
        assert bleu4("", "anything") == 0.0

    def test_clipping_regression(self):
        # 4 unigrams, 2 clipped matches; derivation pinned by the oracle
        assert math.isclose(
            bleu4("the the the cat", "the cat sat down"), 1 / math.sqrt(6), rel_tol=1e-12
        )

    def test_matches_oracle_on_fixed_pairs(self):
        for cand, refs, expected, _ in FIXED_PAIRS:
            assert abs(bleu4(cand, refs) - expected) < 1e-9, (cand, refs)

    def test_agrees_with_live_oracle(self):
        for cand, refs, _, _ in FIXED_PAIRS:
            assert abs(bleu4(cand, refs) - oracles.naive_bleu4(cand, refs)) < 1e-9


class TestRougeL:
    def test_identity(self):
        assert rouge_l("same text here", "same text here") == 1.0

    def test_disjoint(self):
        assert rouge_l("alpha beta", "gamma delta") == 0.0

    def test_half_overlap(self):
        assert rouge_l("a b c d", "a x c y") == 0.5

    def test_matches_oracle_on_fixed_pairs(self):
        for cand, refs, _, expected in FIXED_PAIRS:
            assert abs(rouge_l(cand, refs) - expected) < 1e-9, (cand, refs)

    def test_agrees_with_live_oracle(self):
        for cand, refs, _, _ in FIXED_PAIRS:
            assert abs(rouge_l(cand, refs) - oracles.naive_rouge_l(cand, refs)) < 1e-9

    def test_multi_reference_takes_max(self):
        single = rouge_l("blue light scatters", "blue light scatters much more")
        multi = rouge_l(
            "blue light scatters", ["unrelated", "blue light scatters much more"]
        )
        assert multi == single


class TestF1:
    def test_perfect(self):
        assert f1(100.0, 100.0) == 100.0

    def test_zero(self):
        assert f1(0.0, 0.0) == 0.0

    def test_two_decimal_spot_checks(self):
        assert abs(f1(74.21, 74.91) - 74.56) < 0.01
        assert abs(f1(78.31, 78.18) - 78.24) < 0.01


class TestCorpusLevel:
    def test_corpus_bleu_identity(self):
        pairs = [("a b c d", ["a b c d"]), ("e f g h", ["e f g h"])]
        assert corpus_bleu4(pairs) == 1.0

    def test_corpus_rouge_identity(self):
        pairs = [("a b c d", ["a b c d"])]
        assert corpus_rouge_l(pairs) == 1.0

    def test_corpus_bleu_empty(self):
        assert corpus_bleu4([]) == 0.0
        assert corpus_rouge_l([("", ["x"])]) == 0.0


@settings(max_examples=200, deadline=None)
@given(
    st.text(alphabet="abcde .", max_size=40), st.text(alphabet="abcde .", max_size=40)
)
def test_property_scores_bounded(cand, gold):
    assert 0.0 <= bleu4(cand, gold) <= 1.0 + 1e-12
    assert 0.0 <= rouge_l(cand, gold) <= 1.0 + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 100), st.floats(0, 100))
def test_property_f1_bounded_by_max(r, p):
    value = f1(r, p)
    assert 0.0 <= value <= max(r, p) + 1e-9
