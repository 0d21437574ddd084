"""Tab-separated dataset files: manifests, ground truth, predictions.

A manifest row is `id<TAB>path` with an optional third transcription column.
Relative image paths resolve against the manifest's own directory, so a
dataset directory can be moved wholesale.
"""

from __future__ import annotations

import os
from pathlib import Path

from .core import Sample
from .errors import DataError, FormatError
from .fileio import atomic_write_text


def _check_field(value: str, what: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise FormatError(f"{what} may not contain tabs or newlines: {value!r}")
    return value


def _read_rows(path, min_cols: int, max_cols: int):
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if not min_cols <= len(cols) <= max_cols:
            raise FormatError(
                f"{path}:{lineno}: expected {min_cols}-{max_cols} columns, got {len(cols)}"
            )
        yield lineno, cols


def load_manifest(path) -> list[Sample]:
    base = Path(path).parent
    samples = []
    seen = set()
    for lineno, cols in _read_rows(path, 2, 3):
        sid, rel = cols[0], cols[1]
        if not sid:
            raise FormatError(f"{path}:{lineno}: empty sample id")
        if sid in seen:
            raise DataError(f"{path}:{lineno}: duplicate sample id {sid!r}")
        seen.add(sid)
        image_path = str(rel if os.path.isabs(rel) else base / rel)
        transcription = cols[2] if len(cols) == 3 else None
        samples.append(Sample(sid, image_path, transcription))
    return samples


def save_manifest(samples, path) -> None:
    """Writes image paths relative to the manifest location when possible."""
    base = Path(path).parent
    lines = []
    for s in samples:
        _check_field(s.id, "sample id")
        try:
            rel = os.path.relpath(s.image_path, base)
        except ValueError:
            rel = s.image_path
        _check_field(rel, "image path")
        row = [s.id, rel]
        if s.transcription is not None:
            row.append(_check_field(s.transcription, "transcription"))
        lines.append("\t".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n" if lines else "")


def load_ground_truth(path) -> dict[str, str]:
    """Two-column `id<TAB>text` file."""
    gts = {}
    for lineno, cols in _read_rows(path, 2, 2):
        sid, text = cols
        if not sid:
            raise FormatError(f"{path}:{lineno}: empty sample id")
        if sid in gts:
            raise DataError(f"{path}:{lineno}: duplicate sample id {sid!r}")
        gts[sid] = text
    return gts


def ground_truth_from_manifest(path) -> dict[str, str]:
    gts = {}
    for sample in load_manifest(path):
        if sample.transcription is None:
            raise FormatError(f"{path}: sample {sample.id!r} has no transcription column")
        gts[sample.id] = sample.transcription
    return gts


def load_predictions(path) -> dict[str, tuple[str, float]]:
    """Three-column `id<TAB>text<TAB>confidence` file."""
    preds = {}
    for lineno, cols in _read_rows(path, 3, 3):
        sid, text, conf = cols
        if not sid:
            raise FormatError(f"{path}:{lineno}: empty sample id")
        if sid in preds:
            raise DataError(f"{path}:{lineno}: duplicate sample id {sid!r}")
        try:
            confidence = float(conf)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: bad confidence {conf!r}") from None
        preds[sid] = (text, confidence)
    return preds


def save_predictions(rows, path) -> None:
    """rows: iterable of (id, text, confidence)."""
    lines = []
    for sid, text, confidence in rows:
        _check_field(sid, "sample id")
        _check_field(text, "prediction")
        lines.append(f"{sid}\t{text}\t{confidence:.6f}")
    atomic_write_text(path, "\n".join(lines) + "\n" if lines else "")
