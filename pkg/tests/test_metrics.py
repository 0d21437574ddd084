import functools

import pytest

from helpers import make_random, random_word
from strkit.core import Lexicon
from strkit.errors import DataError
from strkit.metrics import (
    EvalReport,
    Normalizer,
    PartitionStats,
    evaluate,
    levenshtein,
    normalize_text,
    split_iv_oov,
)


def oracle_levenshtein(a: str, b: str) -> int:
    """Reference implementation: memoized recursion on suffixes."""

    @functools.lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        sub = go(i + 1, j + 1) + (a[i] != b[j])
        return min(sub, go(i + 1, j) + 1, go(i, j + 1) + 1)

    return go(0, 0)


class TestNormalize:
    def test_defaults_strip_then_fold(self):
        assert normalize_text(" Cat ") == "cat"
        assert normalize_text("") == ""

    def test_case_fold_off(self):
        norm = Normalizer(case_fold=False)
        assert normalize_text("CAT", norm) == "CAT"

    def test_strip_off(self):
        norm = Normalizer(strip_outer_whitespace=False)
        assert normalize_text(" Cat ", norm) == " cat "

    def test_fold_handles_sharp_s(self):
        assert normalize_text("STRASSE") == normalize_text("strasse")


class TestLevenshtein:
    def test_classic_instances(self):
        assert levenshtein("kitten", "sitting") == 3
        assert levenshtein("", "abc") == 3
        assert levenshtein("abc", "") == 3
        assert levenshtein("flaw", "lawn") == 2

    def test_identity(self):
        for x in ("", "a", "same-string", "éé"):
            assert levenshtein(x, x) == 0

    def test_matches_recursive_oracle(self):
        rng = make_random(31)
        symbols = "abcdefé中"
        for _ in range(300):
            a = random_word(rng, symbols, 0, 12)
            b = random_word(rng, symbols, 0, 12)
            assert levenshtein(a, b) == oracle_levenshtein(a, b)

    def test_metric_axioms_sampled(self):
        rng = make_random(32)
        for _ in range(500):
            a = random_word(rng, "abcd", 0, 8)
            b = random_word(rng, "abcd", 0, 8)
            c = random_word(rng, "abcd", 0, 8)
            dab = levenshtein(a, b)
            assert dab >= 0
            assert (dab == 0) == (a == b)
            assert dab == levenshtein(b, a)
            assert dab <= levenshtein(a, c) + levenshtein(c, b)


class TestSplit:
    def test_reference_example(self):
        iv, oov = split_iv_oov(["cat", "zyzzyva"], Lexicon({"cat"}))
        assert iv == [0] and oov == [1]

    def test_empty_input(self):
        assert split_iv_oov([], Lexicon({"cat"})) == ([], [])

    def test_case_folding_applies(self):
        iv, oov = split_iv_oov(["CAT"], Lexicon({"cat"}))
        assert iv == [0] and oov == []

    def test_partition_is_exhaustive_and_disjoint(self):
        rng = make_random(33)
        train = Lexicon({random_word(rng, "ab", 1, 4) for _ in range(10)})
        words = [random_word(rng, "abc", 1, 4) for _ in range(200)]
        iv, oov = split_iv_oov(words, train)
        assert sorted(iv + oov) == list(range(len(words)))
        assert not set(iv) & set(oov)


class TestPartitionStats:
    def test_ratios(self):
        stats = PartitionStats(n_samples=4, n_correct=3, ed_total=6)
        assert stats.crw == 0.75
        assert stats.ed_mean == 1.5

    def test_empty_partition_yields_zeros(self):
        stats = PartitionStats(0, 0, 0)
        assert stats.crw == 0.0 and stats.ed_mean == 0.0

    def test_bounds_checked(self):
        with pytest.raises(ValueError):
            PartitionStats(2, 3, 0)
        with pytest.raises(ValueError):
            PartitionStats(2, 1, -1)


class TestEvaluate:
    def test_perfect_predictions(self):
        gts = {"a": "cat", "b": "dog"}
        report = evaluate(dict(gts), gts, Lexicon({"cat"}))
        assert report.overall.crw == 1.0
        assert report.overall.ed_total == 0
        assert report.combined_crw == 1.0
        assert report.n_missing == 0

    def test_hand_counted_mix(self):
        gts = {"a": "cat", "b": "dog"}
        preds = {"a": "cat", "b": "dogfish"}  # "dog" -> "dogfish": 4 insertions
        report = evaluate(preds, gts, Lexicon({"cat", "dog"}))
        assert report.overall.n_samples == 2
        assert report.overall.n_correct == 1
        assert report.overall.ed_total == 4
        assert report.overall.ed_mean == 2.0

    def test_iv_oov_partition_and_combined(self):
        gts = {"a": "cat", "b": "dog", "c": "emu"}
        preds = {"a": "cat", "b": "dig", "c": "emu"}
        report = evaluate(preds, gts, Lexicon({"cat", "dog"}))
        assert report.iv.n_samples == 2 and report.iv.n_correct == 1
        assert report.oov.n_samples == 1 and report.oov.n_correct == 1
        assert report.combined_crw == (0.5 + 1.0) / 2

    def test_missing_prediction_scores_empty(self):
        gts = {"a": "cat", "b": "dog"}
        report = evaluate({"a": "cat"}, gts, Lexicon({"cat"}))
        assert report.n_missing == 1
        assert report.overall.ed_total == 3  # "" vs "dog"

    def test_normalization_applies_to_both_sides(self):
        report = evaluate({"a": " CAT "}, {"a": "cat"}, Lexicon({"cat"}))
        assert report.overall.crw == 1.0

    def test_case_sensitive_mode(self):
        norm = Normalizer(case_fold=False)
        report = evaluate({"a": "CAT"}, {"a": "cat"}, Lexicon({"cat"}), norm)
        assert report.overall.crw == 0.0

    def test_empty_ground_truth_rejected(self):
        with pytest.raises(DataError):
            evaluate({}, {}, Lexicon({"cat"}))

    def test_crw_one_iff_zero_distance(self):
        rng = make_random(34)
        train = Lexicon({"cat"})
        for _ in range(50):
            n = rng.randint(1, 6)
            gts = {f"s{i}": random_word(rng, "abc", 1, 5) for i in range(n)}
            preds = {
                sid: (gt if rng.random() < 0.5 else random_word(rng, "abc", 1, 5))
                for sid, gt in gts.items()
            }
            report = evaluate(preds, gts, train)
            assert (report.overall.crw == 1.0) == (report.overall.ed_total == 0)

    def test_combined_is_exact_mean(self):
        report = EvalReport(
            iv=PartitionStats(1000, 797, 113482),
            oov=PartitionStats(1000, 595, 43890),
            overall=PartitionStats(2000, 1392, 157372),
        )
        assert report.combined_crw == (0.797 + 0.595) / 2
