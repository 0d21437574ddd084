"""Word-accuracy and edit-distance evaluation with an IV/OOV split.

Scoring treats a word as correct only on exact match after normalization;
edit distance is computed over the same normalized strings so the two
numbers never disagree about what "equal" means.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Lexicon
from .errors import DataError


@dataclass(frozen=True)
class Normalizer:
    case_fold: bool = True
    strip_outer_whitespace: bool = True


DEFAULT_NORMALIZER = Normalizer()


def normalize_text(s: str, norm: Normalizer = DEFAULT_NORMALIZER) -> str:
    if norm.strip_outer_whitespace:
        s = s.strip()
    if norm.case_fold:
        s = s.casefold()
    return s


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over codepoints, two-row DP."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    curr = [0] * (len(b) + 1)
    for i, ca in enumerate(a, start=1):
        curr[0] = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            curr[j] = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost)
        prev, curr = curr, prev
    return prev[len(b)]


def split_iv_oov(test_words, train_lex: Lexicon,
                 norm: Normalizer = DEFAULT_NORMALIZER) -> tuple[list[int], list[int]]:
    """Indices of in-vocabulary and out-of-vocabulary test words."""
    iv, oov = [], []
    for i, word in enumerate(test_words):
        (iv if normalize_text(word, norm) in train_lex else oov).append(i)
    return iv, oov


@dataclass(frozen=True)
class PartitionStats:
    n_samples: int
    n_correct: int
    ed_total: int

    def __post_init__(self):
        if not 0 <= self.n_correct <= self.n_samples:
            raise ValueError("n_correct must be within [0, n_samples]")
        if self.ed_total < 0:
            raise ValueError("ed_total must be >= 0")

    @property
    def crw(self) -> float:
        return self.n_correct / self.n_samples if self.n_samples else 0.0

    @property
    def ed_mean(self) -> float:
        return self.ed_total / self.n_samples if self.n_samples else 0.0


@dataclass(frozen=True)
class EvalReport:
    iv: PartitionStats
    oov: PartitionStats
    overall: PartitionStats
    n_missing: int = 0

    @property
    def combined_crw(self) -> float:
        return (self.iv.crw + self.oov.crw) / 2.0


def _accumulate(pairs) -> PartitionStats:
    n = len(pairs)
    correct = sum(1 for p, g in pairs if p == g)
    ed = sum(levenshtein(p, g) for p, g in pairs)
    return PartitionStats(n, correct, ed)


def evaluate(preds: dict, gts: dict, train_lex: Lexicon,
             norm: Normalizer = DEFAULT_NORMALIZER) -> EvalReport:
    """Score predictions against ground truth, partitioned by lexicon hits.

    Every ground-truth id is scored; a missing prediction counts as the
    empty string and is tallied in n_missing.
    """
    if not gts:
        raise DataError("ground truth is empty")
    iv_pairs, oov_pairs, all_pairs = [], [], []
    n_missing = 0
    for sid in sorted(gts):
        gt = normalize_text(gts[sid], norm)
        raw_pred = preds.get(sid)
        if raw_pred is None:
            n_missing += 1
            pred = ""
        else:
            pred = normalize_text(raw_pred, norm)
        pair = (pred, gt)
        all_pairs.append(pair)
        (iv_pairs if gt in train_lex else oov_pairs).append(pair)
    return EvalReport(
        iv=_accumulate(iv_pairs),
        oov=_accumulate(oov_pairs),
        overall=_accumulate(all_pairs),
        n_missing=n_missing,
    )
