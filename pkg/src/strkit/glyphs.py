"""Built-in dot-matrix glyphs and word rendering.

Each character is a 5x7 dot pattern, doubled to 10x14 and centered in a
16x16 tile (3px side margins, 1px top/bottom). Advance equals tile height,
so a word of n characters rendered at height H occupies exactly n*H columns
when H is a multiple of 16. Recognition relies on that: square cells cut
from the rendered strip line up one-to-one with glyph tiles.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import ImageBuffer
from .errors import DataError
from .imaging import resize_bilinear

TILE = 16

_PATTERN_W = 5
_PATTERN_H = 7

# fmt: off
GLYPH_ROWS: dict[str, tuple[str, ...]] = {
    "0": (".###.",
          "#...#",
          "#..##",
          "#.#.#",
          "##..#",
          "#...#",
          ".###."),
    "1": ("..#..",
          ".##..",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          ".###."),
    "2": (".###.",
          "#...#",
          "....#",
          "...#.",
          "..#..",
          ".#...",
          "#####"),
    "3": ("#####",
          "...#.",
          "..#..",
          "...#.",
          "....#",
          "#...#",
          ".###."),
    "4": ("...#.",
          "..##.",
          ".#.#.",
          "#..#.",
          "#####",
          "...#.",
          "...#."),
    "5": ("#####",
          "#....",
          "####.",
          "....#",
          "....#",
          "#...#",
          ".###."),
    "6": ("..##.",
          ".#...",
          "#....",
          "####.",
          "#...#",
          "#...#",
          ".###."),
    "7": ("#####",
          "....#",
          "...#.",
          "..#..",
          "..#..",
          "..#..",
          "..#.."),
    "8": (".###.",
          "#...#",
          "#...#",
          ".###.",
          "#...#",
          "#...#",
          ".###."),
    "9": (".###.",
          "#...#",
          "#...#",
          ".####",
          "....#",
          "...#.",
          ".##.."),
    "A": (".###.",
          "#...#",
          "#...#",
          "#####",
          "#...#",
          "#...#",
          "#...#"),
    "B": ("####.",
          "#...#",
          "#...#",
          "####.",
          "#...#",
          "#...#",
          "####."),
    "C": (".###.",
          "#...#",
          "#....",
          "#....",
          "#....",
          "#...#",
          ".###."),
    "D": ("###..",
          "#..#.",
          "#...#",
          "#...#",
          "#...#",
          "#..#.",
          "###.."),
    "E": ("#####",
          "#....",
          "#....",
          "####.",
          "#....",
          "#....",
          "#####"),
    "F": ("#####",
          "#....",
          "#....",
          "####.",
          "#....",
          "#....",
          "#...."),
    "G": (".###.",
          "#...#",
          "#....",
          "#.###",
          "#...#",
          "#...#",
          ".####"),
    "H": ("#...#",
          "#...#",
          "#...#",
          "#####",
          "#...#",
          "#...#",
          "#...#"),
    "I": (".###.",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          ".###."),
    "J": ("..###",
          "...#.",
          "...#.",
          "...#.",
          "...#.",
          "#..#.",
          ".##.."),
    "K": ("#...#",
          "#..#.",
          "#.#..",
          "##...",
          "#.#..",
          "#..#.",
          "#...#"),
    "L": ("#....",
          "#....",
          "#....",
          "#....",
          "#....",
          "#....",
          "#####"),
    "M": ("#...#",
          "##.##",
          "#.#.#",
          "#.#.#",
          "#...#",
          "#...#",
          "#...#"),
    "N": ("#...#",
          "#...#",
          "##..#",
          "#.#.#",
          "#..##",
          "#...#",
          "#...#"),
    "O": (".###.",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          ".###."),
    "P": ("####.",
          "#...#",
          "#...#",
          "####.",
          "#....",
          "#....",
          "#...."),
    "Q": (".###.",
          "#...#",
          "#...#",
          "#...#",
          "#.#.#",
          "#..#.",
          ".##.#"),
    "R": ("####.",
          "#...#",
          "#...#",
          "####.",
          "#.#..",
          "#..#.",
          "#...#"),
    "S": (".####",
          "#....",
          "#....",
          ".###.",
          "....#",
          "....#",
          "####."),
    "T": ("#####",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "..#.."),
    "U": ("#...#",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          ".###."),
    "V": ("#...#",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          ".#.#.",
          "..#.."),
    "W": ("#...#",
          "#...#",
          "#...#",
          "#.#.#",
          "#.#.#",
          "##.##",
          "#...#"),
    "X": ("#...#",
          "#...#",
          ".#.#.",
          "..#..",
          ".#.#.",
          "#...#",
          "#...#"),
    "Y": ("#...#",
          "#...#",
          ".#.#.",
          "..#..",
          "..#..",
          "..#..",
          "..#.."),
    "Z": ("#####",
          "....#",
          "...#.",
          "..#..",
          ".#...",
          "#....",
          "#####"),
    "a": (".....",
          ".....",
          ".###.",
          "....#",
          ".####",
          "#...#",
          ".####"),
    "b": ("#....",
          "#....",
          "####.",
          "#...#",
          "#...#",
          "#...#",
          "####."),
    "c": (".....",
          ".....",
          ".###.",
          "#....",
          "#....",
          "#...#",
          ".###."),
    "d": ("....#",
          "....#",
          ".####",
          "#...#",
          "#...#",
          "#...#",
          ".####"),
    "e": (".....",
          ".....",
          ".###.",
          "#...#",
          "#####",
          "#....",
          ".###."),
    "f": ("..##.",
          ".#..#",
          ".#...",
          "###..",
          ".#...",
          ".#...",
          ".#..."),
    "g": (".....",
          ".####",
          "#...#",
          "#...#",
          ".####",
          "....#",
          ".###."),
    "h": ("#....",
          "#....",
          "####.",
          "#...#",
          "#...#",
          "#...#",
          "#...#"),
    "i": ("..#..",
          ".....",
          ".##..",
          "..#..",
          "..#..",
          "..#..",
          ".###."),
    "j": ("...#.",
          ".....",
          "..##.",
          "...#.",
          "...#.",
          "#..#.",
          ".##.."),
    "k": ("#....",
          "#....",
          "#..#.",
          "#.#..",
          "##...",
          "#.#..",
          "#..#."),
    "l": (".##..",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          ".###."),
    "m": (".....",
          ".....",
          "##.#.",
          "#.#.#",
          "#.#.#",
          "#.#.#",
          "#.#.#"),
    "n": (".....",
          ".....",
          "####.",
          "#...#",
          "#...#",
          "#...#",
          "#...#"),
    "o": (".....",
          ".....",
          ".###.",
          "#...#",
          "#...#",
          "#...#",
          ".###."),
    "p": (".....",
          "####.",
          "#...#",
          "#...#",
          "####.",
          "#....",
          "#...."),
    "q": (".....",
          ".####",
          "#...#",
          "#...#",
          ".####",
          "....#",
          "....#"),
    "r": (".....",
          ".....",
          "#.##.",
          "##..#",
          "#....",
          "#....",
          "#...."),
    "s": (".....",
          ".....",
          ".####",
          "#....",
          ".###.",
          "....#",
          "####."),
    "t": (".#...",
          ".#...",
          "###..",
          ".#...",
          ".#...",
          ".#..#",
          "..##."),
    "u": (".....",
          ".....",
          "#...#",
          "#...#",
          "#...#",
          "#..##",
          ".##.#"),
    "v": (".....",
          ".....",
          "#...#",
          "#...#",
          "#...#",
          ".#.#.",
          "..#.."),
    "w": (".....",
          ".....",
          "#...#",
          "#...#",
          "#.#.#",
          "#.#.#",
          ".#.#."),
    "x": (".....",
          ".....",
          "#...#",
          ".#.#.",
          "..#..",
          ".#.#.",
          "#...#"),
    "y": (".....",
          "#...#",
          "#...#",
          "#...#",
          ".####",
          "....#",
          ".###."),
    "z": (".....",
          ".....",
          "#####",
          "...#.",
          "..#..",
          ".#...",
          "#####"),
}
# fmt: on


def _pattern_mask(rows: tuple[str, ...]) -> np.ndarray:
    """5x7 pattern -> 16x16 bool tile (doubled, centered)."""
    if len(rows) != _PATTERN_H or any(len(r) != _PATTERN_W for r in rows):
        raise ValueError("glyph pattern must be 5x7")
    small = np.array([[c == "#" for c in row] for row in rows], dtype=bool)
    doubled = np.repeat(np.repeat(small, 2, axis=0), 2, axis=1)
    tile = np.zeros((TILE, TILE), dtype=bool)
    tile[1 : 1 + 2 * _PATTERN_H, 3 : 3 + 2 * _PATTERN_W] = doubled
    return tile


class GlyphAtlas:
    """Immutable lookup from character to its 16x16 ink mask."""

    def __init__(self, patterns: dict[str, tuple[str, ...]] | None = None):
        patterns = GLYPH_ROWS if patterns is None else patterns
        self._masks: dict[str, np.ndarray] = {}
        for ch, rows in patterns.items():
            if len(ch) != 1:
                raise ValueError(f"glyph key must be a single character, got {ch!r}")
            mask = _pattern_mask(rows)
            mask.setflags(write=False)
            self._masks[ch] = mask

    @property
    def chars(self) -> frozenset:
        return frozenset(self._masks)

    def __contains__(self, ch: str) -> bool:
        return ch in self._masks

    def mask(self, ch: str) -> np.ndarray:
        try:
            return self._masks[ch]
        except KeyError:
            raise DataError(f"no glyph for character {ch!r}") from None

    def render_tile(self, ch: str, size: int, fg: int = 0, bg: int = 255) -> np.ndarray:
        """Glyph as a uint8 (size, size) array; exact when size % 16 == 0."""
        base = np.where(self.mask(ch), np.uint8(fg), np.uint8(bg))
        return _scale_square(base, size)


@lru_cache(maxsize=1)
def default_atlas() -> GlyphAtlas:
    return GlyphAtlas()


def _scale_square(tile: np.ndarray, size: int) -> np.ndarray:
    if size < 1:
        raise ValueError("tile size must be >= 1")
    if size == TILE:
        return tile.copy()
    if size % TILE == 0:
        k = size // TILE
        return np.repeat(np.repeat(tile, k, axis=0), k, axis=1)
    resized = resize_bilinear(ImageBuffer(tile), size, size)
    return resized.pixels[:, :, 0].copy()


def _validate_shade(name: str, value: int) -> int:
    value = int(value)
    if not 0 <= value <= 255:
        raise ValueError(f"{name} must be in [0, 255], got {value}")
    return value


def render_word(word: str, fg: int, bg: int, target_height: int = 32,
                atlas: GlyphAtlas | None = None) -> ImageBuffer:
    """Render a word as a horizontal grayscale strip.

    The strip is composed at tile resolution (16 x 16n) and scaled to
    target_height: integer replication when the height is a multiple of 16
    (pixel-exact), bilinear otherwise.
    """
    if not word:
        raise DataError("cannot render an empty word")
    fg = _validate_shade("fg", fg)
    bg = _validate_shade("bg", bg)
    if target_height < 1:
        raise ValueError(f"target_height must be >= 1, got {target_height}")
    atlas = atlas or default_atlas()

    masks = [atlas.mask(ch) for ch in word]
    strip = np.concatenate(masks, axis=1)
    base = np.where(strip, np.uint8(fg), np.uint8(bg))

    if target_height == TILE:
        return ImageBuffer(base)
    if target_height % TILE == 0:
        k = target_height // TILE
        return ImageBuffer(np.repeat(np.repeat(base, k, axis=0), k, axis=1))
    new_w = max(1, round(base.shape[1] * target_height / TILE))
    return resize_bilinear(ImageBuffer(base), new_w, target_height)
