"""Shared test utilities: seeded random images and probability grids."""

from __future__ import annotations

import random

import numpy as np

from strkit.core import ImageBuffer


def make_random(seed: int) -> random.Random:
    return random.Random(seed)


def random_image(rng: random.Random, max_side: int = 64,
                 channels: int | None = None) -> ImageBuffer:
    w = rng.randint(1, max_side)
    h = rng.randint(1, max_side)
    c = channels if channels is not None else rng.choice((1, 3))
    flat = bytes(rng.randrange(256) for _ in range(w * h * c))
    return ImageBuffer.from_bytes(w, h, c, flat)


def smooth_image(rng: random.Random, w: int = 48, h: int = 32,
                 channels: int = 3) -> ImageBuffer:
    """Low-frequency content, closer to a photo than white noise."""
    xs = np.arange(w)[np.newaxis, :]
    ys = np.arange(h)[:, np.newaxis]
    out = np.zeros((h, w, channels))
    for c in range(channels):
        fx = rng.uniform(0.02, 0.2)
        fy = rng.uniform(0.02, 0.2)
        phase = rng.uniform(0, 6.28)
        out[:, :, c] = 128 + 96 * np.sin(fx * xs + fy * ys + phase)
    return ImageBuffer(np.clip(out, 0, 255).astype(np.uint8))


def random_prob_rows(rng: random.Random, t: int, a: int) -> np.ndarray:
    """(t, a) rows, each summing to 1 exactly (renormalized float64)."""
    raw = np.array([[rng.random() + 1e-6 for _ in range(a)] for _ in range(t)])
    return raw / raw.sum(axis=1, keepdims=True)


def random_word(rng: random.Random, symbols: str, lo: int = 1, hi: int = 12) -> str:
    return "".join(rng.choice(symbols) for _ in range(rng.randint(lo, hi)))
