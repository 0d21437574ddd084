"""Synthetic word-image recognition pipeline.

Generate word crops from a lexicon, degrade them, route them by aspect
ratio to per-shape recognizer backends, ensemble the probabilities, and
score the decoded text against ground truth.
"""

from .augment import (
    AugmentPolicy,
    box_muller,
    color_jitter,
    gaussian_noise,
    jpeg_degrade,
    motion_blur,
    sample_and_apply,
)
from .config import BackendSpec, PipelineConfig, build_backends, load_config
from .core import (
    EOS,
    Alphabet,
    BlockProbs,
    CharProbSeq,
    ImageBuffer,
    Lexicon,
    Sample,
    alphabet_default,
    derive_sample_seed,
    make_rng,
)
from .errors import ConfigError, DataError, FormatError, PipelineError
from .glyphs import GlyphAtlas, default_atlas
from .imaging import (
    AffineMatrix,
    PerspectiveMatrix,
    load_pnm,
    pnm_dims,
    resize_bilinear,
    rotate90,
    rotate180,
    save_pnm,
    to_grayscale,
    warp_affine,
    warp_perspective,
)
from .manifest import load_manifest, save_manifest
from .metrics import (
    EvalReport,
    Normalizer,
    PartitionStats,
    evaluate,
    levenshtein,
    normalize_text,
    split_iv_oov,
)
from .recognize import (
    Backend,
    PrototypeBackend,
    RecordedBackend,
    Recognition,
    external_ensemble,
    greedy_decode,
    internal_ensemble,
    load_recorded,
    run_pipeline,
    save_recorded,
)
from .report import format_report, render_figures, structured_report, write_structured
from .router import Route, RouterConfig, classify, max_len_for, normalize_orientation
from .synthgen import SynthConfig, augment_dataset, generate_dataset, load_lexicon, render_word

__version__ = "0.1.0"

__all__ = [
    "AffineMatrix", "Alphabet", "AugmentPolicy", "Backend", "BackendSpec",
    "BlockProbs", "CharProbSeq", "ConfigError", "DataError", "EOS",
    "EvalReport", "FormatError", "GlyphAtlas", "ImageBuffer", "Lexicon",
    "Normalizer", "PartitionStats", "PerspectiveMatrix", "PipelineConfig",
    "PipelineError", "PrototypeBackend", "RecordedBackend", "Recognition",
    "Route", "RouterConfig", "Sample", "SynthConfig", "alphabet_default",
    "augment_dataset", "box_muller", "build_backends", "classify",
    "color_jitter", "default_atlas", "derive_sample_seed", "evaluate",
    "external_ensemble", "format_report", "gaussian_noise",
    "generate_dataset", "greedy_decode", "internal_ensemble", "jpeg_degrade",
    "levenshtein", "load_config", "load_lexicon", "load_manifest",
    "load_pnm", "load_recorded", "make_rng", "max_len_for", "motion_blur",
    "normalize_orientation", "normalize_text", "pnm_dims", "render_figures",
    "render_word", "resize_bilinear", "rotate180", "rotate90",
    "run_pipeline", "sample_and_apply", "save_manifest", "save_pnm",
    "save_recorded", "split_iv_oov", "structured_report", "to_grayscale",
    "warp_affine", "warp_perspective", "write_structured",
]
