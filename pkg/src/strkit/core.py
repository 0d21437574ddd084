"""Shared domain types: alphabet, probability sequences, samples, seeding.

Everything here is immutable after construction and safe to share across
workers. All randomness in the pipeline flows through `random.Random`
instances keyed by `derive_sample_seed`, so parallel runs reproduce serial
runs bit for bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DataError

# Reserved end-of-sequence marker; by convention always at alphabet index 0.
EOS = "\x00"

DEFAULT_SYMBOLS = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

PROB_ROW_TOL = 1e-6


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_sample_seed(global_seed: int, sample_id: str) -> int:
    """Stable per-sample seed: FNV-1a of the id bytes XOR the global seed."""
    return fnv1a64(sample_id.encode("utf-8")) ^ (global_seed & _MASK64)


def make_rng(seed: int) -> random.Random:
    """Seeded generator; only .random() is drawn from, for cross-version stability."""
    return random.Random(seed & _MASK64)


def rand_uniform(rng: random.Random, lo: float, hi: float) -> float:
    return lo + (hi - lo) * rng.random()


def rand_int(rng: random.Random, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi], both ends inclusive."""
    if hi < lo:
        raise ValueError(f"empty integer range [{lo}, {hi}]")
    return min(lo + int(rng.random() * (hi - lo + 1)), hi)


class Alphabet:
    """Ordered symbol set over which probability rows are defined.

    Index 0 is the EOS marker; printable symbols follow in the order given.
    """

    __slots__ = ("symbols", "_index")

    def __init__(self, printable: str | Iterable[str]):
        printable = tuple(printable)
        if any(len(s) != 1 for s in printable):
            raise ValueError("alphabet symbols must be single codepoints")
        if EOS in printable:
            raise ValueError("the EOS marker cannot appear among printable symbols")
        symbols = (EOS,) + printable
        if len(set(symbols)) != len(symbols):
            raise ValueError("alphabet symbols must be unique")
        if len(symbols) < 2:
            raise ValueError("alphabet needs at least one printable symbol")
        self.symbols: tuple[str, ...] = symbols
        self._index = {s: i for i, s in enumerate(symbols)}

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def eos_index(self) -> int:
        return 0

    @property
    def printable(self) -> tuple[str, ...]:
        return self.symbols[1:]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and other.symbols == self.symbols

    def index_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet") from None

    def symbol_at(self, index: int) -> str:
        return self.symbols[index]

    def encode(self, text: str) -> list[int]:
        return [self.index_of(c) for c in text]


def alphabet_default() -> Alphabet:
    """EOS + digits + lowercase + uppercase, 63 symbols."""
    return Alphabet(DEFAULT_SYMBOLS)


class CharProbSeq:
    """T steps of per-symbol probabilities; every step sums to 1 within 1e-6."""

    __slots__ = ("steps",)

    def __init__(self, steps):
        arr = np.asarray(steps, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
            raise ValueError(f"expected a (T, |alphabet|) matrix, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("probabilities must be finite")
        if (arr < 0.0).any() or (arr > 1.0).any():
            raise ValueError("probabilities must lie in [0, 1]")
        sums = arr.sum(axis=1)
        bad = np.abs(sums - 1.0) > PROB_ROW_TOL
        if bad.any():
            step = int(np.argmax(bad))
            raise ValueError(f"step {step} sums to {sums[step]:.8f}, not 1 within {PROB_ROW_TOL}")
        arr = arr.copy()
        arr.setflags(write=False)
        self.steps = arr

    @property
    def length(self) -> int:
        return self.steps.shape[0]

    @property
    def alphabet_size(self) -> int:
        return self.steps.shape[1]


class BlockProbs:
    """K decoder-block probability sequences with identical T and alphabet."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[CharProbSeq]):
        blocks = tuple(blocks)
        if not blocks:
            raise ValueError("need at least one block")
        if any(not isinstance(b, CharProbSeq) for b in blocks):
            raise ValueError("blocks must be CharProbSeq instances")
        t, a = blocks[0].length, blocks[0].alphabet_size
        if any(b.length != t or b.alphabet_size != a for b in blocks):
            raise ValueError("all blocks must share the same T and alphabet size")
        self.blocks = blocks

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def length(self) -> int:
        return self.blocks[0].length

    @property
    def alphabet_size(self) -> int:
        return self.blocks[0].alphabet_size

    def as_array(self) -> np.ndarray:
        """(K, T, A) view of the block probabilities."""
        return np.stack([b.steps for b in self.blocks])


class ImageBuffer:
    """8-bit raster image, 1 (grayscale) or 3 (RGB) channels, row-major.

    Pixels are held as a read-only (height, width, channels) uint8 array;
    `data` is the flat channel-interleaved byte view.
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels, dtype=np.uint8)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"expected a (H, W) or (H, W, C) array, got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ValueError("image dimensions must be at least 1x1")
        if c not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {c}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.pixels = arr

    @classmethod
    def from_bytes(cls, width: int, height: int, channels: int, data: bytes) -> "ImageBuffer":
        if len(data) != width * height * channels:
            raise ValueError(
                f"data length {len(data)} != {width}x{height}x{channels}"
            )
        arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width, channels)
        return cls(arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(
            self.pixels, other.pixels
        )

    def __repr__(self) -> str:
        return f"ImageBuffer({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True)
class Sample:
    """One dataset row: an image and, when labeled, its transcription."""

    id: str
    image_path: str
    transcription: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("sample id must be non-empty")


class Lexicon:
    """Set of already-normalized words."""

    __slots__ = ("words",)

    def __init__(self, words: Iterable[str]):
        words = frozenset(words)
        if any(not w for w in words):
            raise DataError("lexicon contains an empty word")
        self.words = words

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)

    def sorted_words(self) -> list[str]:
        return sorted(self.words)
