"""Recognizer backends, probability ensembling, and greedy decoding.

A backend maps an image to K per-block probability sequences. Blocks are
averaged per backend (internal ensemble), backends are averaged per sample
after EOS padding to a common length (external ensemble), and the mean
distribution is decoded greedily.
"""

from __future__ import annotations

import abc
import logging
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .core import Alphabet, BlockProbs, CharProbSeq, ImageBuffer, alphabet_default
from .errors import ConfigError, DataError, FormatError
from .fileio import atomic_write_text
from .glyphs import GlyphAtlas, default_atlas
from .imaging import load_pnm, pnm_dims, resize_bilinear, rotate180, to_grayscale
from .manifest import load_manifest
from .parallel import run_ordered
from .router import DEFAULT_ROUTER, Route, RouterConfig, classify, max_len_for, normalize_orientation

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURES = (0.8, 0.9, 1.0, 1.1, 1.2)


@dataclass(frozen=True)
class Recognition:
    text: str
    char_confidences: tuple = ()

    def __post_init__(self):
        if len(self.char_confidences) != len(self.text):
            raise ValueError("need one confidence per emitted character")
        if any(not 0.0 <= c <= 1.0 for c in self.char_confidences):
            raise ValueError("confidences must lie in [0, 1]")

    @property
    def mean_confidence(self) -> float:
        if not self.char_confidences:
            return 1.0
        return sum(self.char_confidences) / len(self.char_confidences)


EMPTY_RECOGNITION = Recognition("", ())


def internal_ensemble(bp: BlockProbs) -> CharProbSeq:
    """Mean over the K blocks at each step."""
    return CharProbSeq(np.mean(bp.as_array(), axis=0))


def pad_with_eos(steps: np.ndarray, t_max: int) -> np.ndarray:
    """Extend a (T, A) array to (t_max, A) with EOS one-hot rows."""
    t, a = steps.shape
    if t > t_max:
        raise ValueError(f"cannot pad {t} steps down to {t_max}")
    if t == t_max:
        return np.array(steps, dtype=np.float64)
    pad = np.zeros((t_max - t, a), dtype=np.float64)
    pad[:, 0] = 1.0
    return np.vstack([steps, pad])


def external_ensemble(seqs) -> CharProbSeq:
    """Mean across models after EOS padding to the longest sequence.

    Inputs are summed in a canonical byte order, so any permutation of the
    same sequences produces a bit-identical result.
    """
    seqs = list(seqs)
    if not seqs:
        raise ValueError("need at least one sequence")
    sizes = {s.alphabet_size for s in seqs}
    if len(sizes) != 1:
        raise ValueError(f"alphabet sizes differ: {sorted(sizes)}")
    t_max = max(s.length for s in seqs)
    padded = [pad_with_eos(s.steps, t_max) for s in seqs]
    padded.sort(key=lambda arr: arr.tobytes())
    return CharProbSeq(np.mean(np.stack(padded), axis=0))


def greedy_decode(seq: CharProbSeq, alphabet: Alphabet) -> Recognition:
    """Per-step argmax; ties go to the lowest index; stops at the first EOS."""
    if seq.alphabet_size != alphabet.size:
        raise DataError(
            f"sequence has {seq.alphabet_size} symbols, alphabet has {alphabet.size}"
        )
    chars = []
    confs = []
    for row in seq.steps:
        idx = int(np.argmax(row))
        if idx == alphabet.eos_index:
            break
        chars.append(alphabet.symbol_at(idx))
        confs.append(float(row[idx]))
    return Recognition("".join(chars), tuple(confs))


class Backend(abc.ABC):
    """One recognizer model: image in, K blocks of step probabilities out."""

    name: str
    route_affinity: frozenset

    def covers(self, sample_id: str) -> bool:
        return True

    @abc.abstractmethod
    def infer(self, sample_id: str, img: ImageBuffer, max_len: int) -> BlockProbs:
        ...


ALL_ROUTES = frozenset(Route)


def _standardize(cells: np.ndarray) -> np.ndarray:
    """Zero-mean unit-variance per cell; near-flat cells become all zeros."""
    mean = cells.mean(axis=1, keepdims=True)
    std = cells.std(axis=1, keepdims=True)
    flat = std < 1e-9
    safe = np.where(flat, 1.0, std)
    out = (cells - mean) / safe
    out[flat[:, 0]] = 0.0
    return out


class PrototypeBackend(Backend):
    """Template matcher over square cells, a stand-in for a trained model.

    The input is resized to a fixed height and cut into height x height
    cells. Cells and glyph templates are standardized, so matching depends
    only on ink shape, not on the ink/ground shades. The blank template is
    the zero vector (a flat cell standardizes to zeros) and maps to EOS.
    The K blocks are softmaxes of the same distances at K temperatures.

    flip_search decodes the image and its 180-degree rotation and keeps the
    orientation whose cells sit closer to their best templates. Vertical
    crops need this: a photo rotated clockwise at capture time ends up
    upside down after the router's uniform clockwise normalization.
    """

    def __init__(self, name: str = "prototype", alphabet: Alphabet | None = None,
                 route_affinity=ALL_ROUTES, input_height: int = 32,
                 temperatures=DEFAULT_TEMPERATURES, distance_scale: float = 25.0,
                 flip_search: bool = False, atlas: GlyphAtlas | None = None):
        if input_height < 8:
            raise ConfigError(f"input_height must be >= 8, got {input_height}")
        if not temperatures or any(t <= 0 for t in temperatures):
            raise ConfigError("temperatures must be positive")
        if distance_scale <= 0:
            raise ConfigError("distance_scale must be positive")
        self.name = name
        self.route_affinity = frozenset(route_affinity)
        self.alphabet = alphabet or alphabet_default()
        self.input_height = input_height
        self.temperatures = tuple(float(t) for t in temperatures)
        self.distance_scale = float(distance_scale)
        self.flip_search = flip_search
        atlas = atlas or default_atlas()
        missing = [ch for ch in self.alphabet.printable if ch not in atlas]
        if missing:
            raise ConfigError(f"atlas lacks glyphs for {missing!r}")
        self._templates = self._build_templates(atlas)

    def _build_templates(self, atlas: GlyphAtlas) -> np.ndarray:
        size = self.input_height
        temps = np.zeros((self.alphabet.size, size * size), dtype=np.float64)
        for j, ch in enumerate(self.alphabet.printable, start=1):
            tile = atlas.render_tile(ch, size, fg=0, bg=255).astype(np.float64)
            temps[j] = _standardize(tile.reshape(1, -1))[0]
        return temps

    def _cell_distances(self, img: ImageBuffer, max_len: int) -> np.ndarray:
        """(ncells, A) mean squared distances between cells and templates."""
        size = self.input_height
        pix = img.pixels[:, :, 0].astype(np.float64)
        ncells = min(max(1, math.ceil(img.width / size)), max_len - 1)
        want = ncells * size
        if pix.shape[1] < want:
            pix = np.pad(pix, ((0, 0), (0, want - pix.shape[1])), mode="edge")
        cells = pix[:, :want].reshape(size, ncells, size).transpose(1, 0, 2)
        cells = _standardize(cells.reshape(ncells, -1))

        t = self._templates
        c2 = np.sum(cells**2, axis=1, keepdims=True)
        t2 = np.sum(t**2, axis=1)[np.newaxis, :]
        cross = cells @ t.T
        return (c2 + t2 - 2.0 * cross) / (size * size)

    def _blocks_from_distances(self, dists: np.ndarray, max_len: int) -> BlockProbs:
        scores = -self.distance_scale * dists
        blocks = []
        for temp in self.temperatures:
            logits = scores / temp
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            blocks.append(CharProbSeq(pad_with_eos(probs, max_len)))
        return BlockProbs(tuple(blocks))

    def infer(self, sample_id: str, img: ImageBuffer, max_len: int) -> BlockProbs:
        if max_len < 2:
            raise ValueError(f"max_len must be >= 2, got {max_len}")
        gray = to_grayscale(img)
        if gray.height != self.input_height:
            new_w = max(1, round(gray.width * self.input_height / gray.height))
            gray = resize_bilinear(gray, new_w, self.input_height)

        dists = self._cell_distances(gray, max_len)
        if self.flip_search:
            flipped = self._cell_distances(rotate180(gray), max_len)
            # fit quality: how close each cell is to its nearest template
            if flipped.min(axis=1).mean() < dists.min(axis=1).mean():
                dists = flipped
        return self._blocks_from_distances(dists, max_len)


def load_recorded(path) -> dict[str, BlockProbs]:
    """Parse a recorded-probabilities file into per-sample BlockProbs.

    Rows whose probabilities sum within 1e-4 of 1 are renormalized;
    anything further off is rejected.
    """
    result: dict[str, BlockProbs] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise FormatError(f"{path}:{lineno}: expected 5 tab-separated fields")
            sid, k_s, t_s, a_s, payload = parts
            try:
                k, t, a = int(k_s), int(t_s), int(a_s)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer dimensions") from None
            if k < 1 or t < 1 or a < 2:
                raise FormatError(f"{path}:{lineno}: bad dimensions K={k} T={t} A={a}")
            if sid in result:
                raise DataError(f"{path}:{lineno}: duplicate sample id {sid!r}")
            try:
                values = np.array([float(v) for v in payload.split()], dtype=np.float64)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric probability") from None
            if values.size != k * t * a:
                raise FormatError(
                    f"{path}:{lineno}: expected {k * t * a} probabilities, got {values.size}"
                )
            grid = values.reshape(k, t, a)
            sums = grid.sum(axis=2)
            bad = np.abs(sums - 1.0) > 1e-4
            if bad.any():
                kb, tb = map(int, np.argwhere(bad)[0])
                raise DataError(
                    f"{path}:{lineno}: block {kb} step {tb} sums to {sums[kb, tb]:.6f}"
                )
            grid = grid / sums[:, :, np.newaxis]
            try:
                result[sid] = BlockProbs(tuple(CharProbSeq(grid[i]) for i in range(k)))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return result


def save_recorded(entries, path) -> None:
    """entries: iterable of (sample_id, BlockProbs)."""
    lines = []
    for sid, bp in entries:
        flat = bp.as_array().reshape(-1)
        payload = " ".join(f"{v:.9g}" for v in flat)
        lines.append(f"{sid}\t{bp.k}\t{bp.length}\t{bp.alphabet_size}\t{payload}")
    atomic_write_text(path, "\n".join(lines) + "\n" if lines else "")


class RecordedBackend(Backend):
    """Replays stored probabilities; stands in for a real model's outputs.

    The stored step count wins over the requested max_len; the external
    ensemble reconciles lengths by padding.
    """

    def __init__(self, name: str, source, route_affinity=ALL_ROUTES):
        self.name = name
        self.route_affinity = frozenset(route_affinity)
        self._table = load_recorded(source) if not isinstance(source, dict) else dict(source)

    def covers(self, sample_id: str) -> bool:
        return sample_id in self._table

    def infer(self, sample_id: str, img: ImageBuffer, max_len: int) -> BlockProbs:
        try:
            return self._table[sample_id]
        except KeyError:
            raise DataError(f"no recorded probabilities for {sample_id!r}") from None


def _recognize_one(sample, backends_by_route, router_cfg, alphabet):
    try:
        img = load_pnm(sample.image_path)
        route = classify(img.width, img.height, router_cfg)
        img = normalize_orientation(img, route)
        max_len = max_len_for(route, router_cfg)
        seqs = []
        for backend in sorted(backends_by_route[route], key=lambda b: b.name):
            if not backend.covers(sample.id):
                continue
            bp = backend.infer(sample.id, img, max_len)
            seqs.append(internal_ensemble(bp))
        if not seqs:
            log.warning("sample %s: no backend produced output", sample.id)
            return sample.id, EMPTY_RECOGNITION
        return sample.id, greedy_decode(external_ensemble(seqs), alphabet)
    except Exception:
        log.warning("sample %s: recognition failed", sample.id, exc_info=True)
        return sample.id, EMPTY_RECOGNITION


def preflight_routes(samples, backends_by_route, router_cfg: RouterConfig) -> None:
    """Fail before any work if a needed route has no backend."""
    used = set()
    for sample in samples:
        try:
            w, h, _ = pnm_dims(sample.image_path)
        except (OSError, FormatError):
            continue
        used.add(classify(w, h, router_cfg))
    uncovered = sorted(
        route.value for route in used if not backends_by_route.get(route)
    )
    if uncovered:
        raise ConfigError(f"no backend configured for route(s): {', '.join(uncovered)}")


def run_pipeline(samples, backends_by_route, router_cfg: RouterConfig = DEFAULT_ROUTER,
                 alphabet: Alphabet | None = None, jobs: int = 1):
    """Recognize every sample; returns (sample_id, Recognition) in input order.

    A sample that cannot be loaded or inferred is logged and scored as an
    empty prediction; a route without a backend aborts before processing.
    """
    samples = list(samples)
    alphabet = alphabet or alphabet_default()
    backends_by_route = {route: list(bs) for route, bs in backends_by_route.items()}
    preflight_routes(samples, backends_by_route, router_cfg)
    worker = partial(_recognize_one, backends_by_route=backends_by_route,
                     router_cfg=router_cfg, alphabet=alphabet)
    return run_ordered(worker, samples, jobs)


def recognize_manifest(manifest_path, backends_by_route,
                       router_cfg: RouterConfig = DEFAULT_ROUTER,
                       alphabet: Alphabet | None = None, jobs: int = 1):
    return run_pipeline(load_manifest(manifest_path), backends_by_route,
                        router_cfg, alphabet, jobs)
