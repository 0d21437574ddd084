"""Synthetic word-image dataset generation.

Each sample is fully determined by (config seed, sample id): the word draw,
ink/ground shades, vertical direction, and any augmentation all come from
per-sample generators, so datasets regenerate bit-identically and samples
are independent of generation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from pathlib import Path

from .augment import AugmentPolicy, sample_and_apply
from .core import (
    Alphabet,
    ImageBuffer,
    Lexicon,
    Sample,
    alphabet_default,
    derive_sample_seed,
    make_rng,
    rand_int,
)
from .errors import ConfigError, DataError
from .glyphs import GlyphAtlas, default_atlas
from .glyphs import render_word as _render_horizontal
from .imaging import load_pnm, rotate90, save_pnm
from .manifest import load_manifest, save_manifest
from .metrics import DEFAULT_NORMALIZER, Normalizer, normalize_text
from .parallel import run_ordered

# word-length pools per orientation; bounds chosen so the rendered aspect
# ratio lands in the intended routing band at the default glyph metrics
LONG_MIN_CHARS = 10
VERTICAL_MIN_CHARS = 4
VERTICAL_MAX_CHARS = 24
HORIZONTAL_MAX_CHARS = 9

ORIENTATIONS = ("horizontal", "long", "vertical")


def load_lexicon(path, norm: Normalizer = DEFAULT_NORMALIZER,
                 alphabet: Alphabet | None = None) -> tuple[Lexicon, int]:
    """Normalized, deduplicated word list; returns (lexicon, dropped count).

    Words using symbols outside the alphabet are dropped and counted.
    """
    alphabet = alphabet or alphabet_default()
    words = set()
    dropped = 0
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = normalize_text(line, norm)
        if not word:
            continue
        if all(ch in alphabet for ch in word):
            words.add(word)
        else:
            dropped += 1
    if not words:
        raise DataError(f"{path}: no usable words")
    return Lexicon(words), dropped


@dataclass(frozen=True)
class SynthConfig:
    lexicon_path: str
    count: int = 2000
    target_height: int = 32
    fg_range: tuple[int, int] = (0, 80)
    bg_range: tuple[int, int] = (170, 255)
    orientation_mix: tuple[float, float, float] = (0.9, 0.05, 0.05)
    augment: AugmentPolicy | None = None
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"count must be >= 1, got {self.count}")
        if self.target_height < 8:
            raise ConfigError(f"target_height must be >= 8, got {self.target_height}")
        for name in ("fg_range", "bg_range"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi <= 255):
                raise ConfigError(f"{name} must be an ordered subrange of [0, 255]")
        gap_a = self.bg_range[0] - self.fg_range[1]
        gap_b = self.fg_range[0] - self.bg_range[1]
        if max(gap_a, gap_b) < 40:
            raise ConfigError("fg and bg ranges must be separated by >= 40 levels")
        if len(self.orientation_mix) != 3 or any(f < 0 for f in self.orientation_mix):
            raise ConfigError("orientation_mix needs 3 non-negative fractions")
        if abs(sum(self.orientation_mix) - 1.0) > 1e-9:
            raise ConfigError("orientation_mix fractions must sum to 1")


def render_word(word: str, atlas: GlyphAtlas, target_height: int, fg: int, bg: int,
                orientation: str = "horizontal", rng=None) -> ImageBuffer:
    """Render one word; vertical renders rotate the horizontal strip 90deg.

    The rotation direction is a fair coin from rng, mirroring how real
    vertical photos occur in either reading direction.
    """
    if orientation not in ("horizontal", "vertical"):
        raise ValueError(f"orientation must be horizontal or vertical, got {orientation!r}")
    img = _render_horizontal(word, fg, bg, target_height, atlas)
    if orientation == "vertical":
        if rng is None:
            raise ValueError("vertical rendering needs an rng for the direction draw")
        direction = "cw" if rng.random() < 0.5 else "ccw"
        img = rotate90(img, direction)
    return img


def _word_pools(lexicon: Lexicon, mix) -> dict[str, list[str]]:
    words = lexicon.sorted_words()
    horizontal = [w for w in words if len(w) <= HORIZONTAL_MAX_CHARS]
    long_pool = [w for w in words if len(w) >= LONG_MIN_CHARS]
    vertical = [w for w in words if VERTICAL_MIN_CHARS <= len(w) <= VERTICAL_MAX_CHARS]
    if not horizontal:
        horizontal = list(words)
    if mix[1] > 0 and not long_pool:
        raise DataError(f"lexicon has no words with >= {LONG_MIN_CHARS} characters")
    if mix[2] > 0 and not vertical:
        raise DataError(
            f"lexicon has no words with {VERTICAL_MIN_CHARS}-{VERTICAL_MAX_CHARS} characters"
        )
    return {"horizontal": horizontal, "long": long_pool, "vertical": vertical}


def _orientation_plan(count: int, mix) -> list[str]:
    n_long = min(round(count * mix[1]), count)
    n_vert = min(round(count * mix[2]), count - n_long)
    plan = ["long"] * n_long + ["vertical"] * n_vert
    plan += ["horizontal"] * (count - len(plan))
    return plan


def sample_id_for(index: int) -> str:
    return f"syn{index:06d}"


def _synthesize(cfg: SynthConfig, atlas: GlyphAtlas, pools, sid: str,
                orientation: str) -> tuple[ImageBuffer, str]:
    rng = make_rng(derive_sample_seed(cfg.seed, sid))
    pool = pools[orientation]
    word = pool[int(rng.random() * len(pool))]
    fg = rand_int(rng, *cfg.fg_range)
    bg = rand_int(rng, *cfg.bg_range)

    sample_seed = derive_sample_seed(cfg.seed, sid)
    orient_rng = make_rng(derive_sample_seed(sample_seed, "orient"))
    render_orientation = "vertical" if orientation == "vertical" else "horizontal"
    img = render_word(word, atlas, cfg.target_height, fg, bg,
                      render_orientation, orient_rng)
    if cfg.augment is not None:
        aug_rng = make_rng(derive_sample_seed(sample_seed, "augment"))
        img = sample_and_apply(img, aug_rng, cfg.augment)
    return img, word


def _generate_one(task, cfg: SynthConfig, pools, out_dir: str) -> Sample:
    index, orientation = task
    atlas = default_atlas()
    sid = sample_id_for(index)
    img, word = _synthesize(cfg, atlas, pools, sid, orientation)
    image_path = str(Path(out_dir) / f"{sid}.pgm")
    save_pnm(img, image_path)
    return Sample(sid, image_path, word)


def generate_dataset(cfg: SynthConfig, out_dir, norm: Normalizer = DEFAULT_NORMALIZER,
                     alphabet: Alphabet | None = None, jobs: int = 1) -> list[Sample]:
    """Write cfg.count PGM files plus manifest.tsv; returns the samples."""
    out_dir = Path(out_dir)
    lexicon, _ = load_lexicon(cfg.lexicon_path, norm, alphabet)
    pools = _word_pools(lexicon, cfg.orientation_mix)
    plan = _orientation_plan(cfg.count, cfg.orientation_mix)
    out_dir.mkdir(parents=True, exist_ok=True)

    worker = partial(_generate_one, cfg=cfg, pools=pools, out_dir=str(out_dir))
    samples = run_ordered(worker, list(enumerate(plan)), jobs)
    save_manifest(samples, out_dir / "manifest.tsv")
    return samples


def _augment_one(sample: Sample, policy: AugmentPolicy, seed: int, out_dir: str) -> Sample:
    img = load_pnm(sample.image_path)
    sample_seed = derive_sample_seed(seed, sample.id)
    rng = make_rng(derive_sample_seed(sample_seed, "augment"))
    img = sample_and_apply(img, rng, policy)
    image_path = str(Path(out_dir) / f"{sample.id}.pgm")
    save_pnm(img, image_path)
    return Sample(sample.id, image_path, sample.transcription)


def augment_dataset(manifest_path, out_dir, policy: AugmentPolicy, seed: int,
                    jobs: int = 1) -> list[Sample]:
    """Degraded copy of an existing dataset, new manifest alongside.

    Seeding matches generate_dataset's augment stage: augmenting a clean
    dataset reproduces what generate_dataset would have emitted with the
    same policy and seed.
    """
    samples = load_manifest(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    worker = partial(_augment_one, policy=policy, seed=seed, out_dir=str(out_dir))
    out_samples = run_ordered(worker, samples, jobs)
    save_manifest(out_samples, out_dir / "manifest.tsv")
    return out_samples
