"""Bit-exact PNM I/O and deterministic geometric transforms.

All interpolation math runs in float64 and quantizes with round-half-up, so
results are identical across runs and platforms. Warp matrices store the
inverse (output -> source) map directly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ImageBuffer
from .errors import FormatError
from .fileio import atomic_write_bytes

FILL_DEFAULT = 127

# Float slop at the outer border: a mathematically in-bounds sample may land
# a few 1e-14 outside [0, W-1] and must not fall through to the fill value.
_EDGE_EPS = 1e-9

_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Round half up and clamp to [0, 255]."""
    arr = np.asarray(values, dtype=np.float64)
    return np.clip(np.floor(arr + 0.5), 0.0, 255.0).astype(np.uint8)


def as_float(img: ImageBuffer) -> np.ndarray:
    return img.pixels.astype(np.float64)


# ---------------------------------------------------------------------------
# PNM (binary PGM/PPM) codec
# ---------------------------------------------------------------------------

def _parse_pnm_header(blob: bytes, path) -> tuple[int, int, int, int]:
    """Returns (width, height, channels, data_offset)."""
    magic = blob[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise FormatError(f"{path}: not a binary PGM/PPM file (magic {magic!r})")

    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        # skip whitespace and comment lines
        while pos < len(blob):
            ch = blob[pos : pos + 1]
            if ch.isspace():
                pos += 1
            elif ch == b"#":
                nl = blob.find(b"\n", pos)
                pos = len(blob) if nl < 0 else nl + 1
            else:
                break
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        token = blob[start:pos]
        if not token:
            raise FormatError(f"{path}: truncated PNM header")
        try:
            fields.append(int(token))
        except ValueError:
            raise FormatError(f"{path}: bad PNM header token {token!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"{path}: invalid dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{path}: unsupported maxval {maxval} (only 255)")
    if pos >= len(blob) or not blob[pos : pos + 1].isspace():
        raise FormatError(f"{path}: missing whitespace after PNM header")
    return width, height, channels, pos + 1


def load_pnm(path) -> ImageBuffer:
    """Load a binary PGM (P5) or PPM (P6) file with maxval 255."""
    blob = Path(path).read_bytes()
    width, height, channels, offset = _parse_pnm_header(blob, path)
    expected = width * height * channels
    data = blob[offset : offset + expected]
    if len(data) < expected:
        raise OSError(f"{path}: truncated pixel data ({len(data)} of {expected} bytes)")
    return ImageBuffer.from_bytes(width, height, channels, data)


def pnm_dims(path) -> tuple[int, int, int]:
    """(width, height, channels) from the header without decoding pixels."""
    with open(path, "rb") as fh:
        head = fh.read(256)
    width, height, channels, _ = _parse_pnm_header(head, path)
    return width, height, channels


def save_pnm(img: ImageBuffer, path) -> None:
    """Write P5/P6 with maxval 255; atomic (temp file + rename), no comments."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + f"\n{img.width} {img.height}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + img.data)


# ---------------------------------------------------------------------------
# Exact pixel permutations
# ---------------------------------------------------------------------------

_CW_NAMES = {"cw", "clockwise"}
_CCW_NAMES = {"ccw", "counterclockwise"}


def rotate90(img: ImageBuffer, direction: str = "cw") -> ImageBuffer:
    """Exact 90-degree rotation; output dims are (height, width).

    Clockwise is defined by output(x, y) = input(y, H-1-x).
    """
    if direction in _CW_NAMES:
        out = img.pixels.transpose(1, 0, 2)[:, ::-1]
    elif direction in _CCW_NAMES:
        out = img.pixels.transpose(1, 0, 2)[::-1, :]
    else:
        raise ValueError(f"direction must be clockwise or counterclockwise, got {direction!r}")
    return ImageBuffer(np.ascontiguousarray(out))


def rotate180(img: ImageBuffer) -> ImageBuffer:
    return ImageBuffer(np.ascontiguousarray(img.pixels[::-1, ::-1]))


# ---------------------------------------------------------------------------
# Warps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineMatrix:
    """Inverse map: output (x, y) samples source (a*x + b*y + c, d*x + e*y + f)."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c, self.d, self.e, self.f)):
            raise ValueError("affine matrix entries must be finite")

    @classmethod
    def identity(cls) -> "AffineMatrix":
        return cls(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)

    @classmethod
    def translation(cls, dx: float, dy: float) -> "AffineMatrix":
        """Inverse map shifting sampling by (+dx, +dy); content moves by (-dx, -dy)."""
        return cls(1.0, 0.0, dx, 0.0, 1.0, dy)

    @classmethod
    def rotation_about(cls, angle_rad: float, cx: float, cy: float) -> "AffineMatrix":
        """Rotate content by angle_rad around (cx, cy); stores the inverse rotation."""
        cos, sin = math.cos(angle_rad), math.sin(angle_rad)
        return cls(
            cos, sin, cx - cos * cx - sin * cy,
            -sin, cos, cy + sin * cx - cos * cy,
        )

    @classmethod
    def from_points(cls, out_pts, src_pts) -> "AffineMatrix":
        """Solve the map sending 3 output points to 3 source points."""
        out_pts = np.asarray(out_pts, dtype=np.float64)
        src_pts = np.asarray(src_pts, dtype=np.float64)
        if out_pts.shape != (3, 2) or src_pts.shape != (3, 2):
            raise ValueError("need exactly 3 point pairs")
        lhs = np.zeros((6, 6))
        rhs = np.zeros(6)
        for i, ((x, y), (sx, sy)) in enumerate(zip(out_pts, src_pts)):
            lhs[2 * i, 0:3] = (x, y, 1.0)
            lhs[2 * i + 1, 3:6] = (x, y, 1.0)
            rhs[2 * i] = sx
            rhs[2 * i + 1] = sy
        try:
            sol = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            raise ValueError("degenerate point configuration") from None
        return cls(*sol)


@dataclass(frozen=True)
class PerspectiveMatrix:
    """Homogeneous inverse map; source = ((h11*x+h12*y+h13)/w, (h21*x+h22*y+h23)/w)."""

    h11: float
    h12: float
    h13: float
    h21: float
    h22: float
    h23: float
    h31: float
    h32: float
    h33: float

    def __post_init__(self):
        vals = (self.h11, self.h12, self.h13, self.h21, self.h22, self.h23,
                self.h31, self.h32, self.h33)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("perspective matrix entries must be finite")
        if self.h33 == 0.0:
            raise ValueError("h33 must be nonzero")

    @classmethod
    def identity(cls) -> "PerspectiveMatrix":
        return cls(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_affine(cls, m: AffineMatrix) -> "PerspectiveMatrix":
        return cls(m.a, m.b, m.c, m.d, m.e, m.f, 0.0, 0.0, 1.0)

    @classmethod
    def from_quad(cls, out_pts, src_pts) -> "PerspectiveMatrix":
        """Solve the homography sending 4 output points to 4 source points."""
        out_pts = np.asarray(out_pts, dtype=np.float64)
        src_pts = np.asarray(src_pts, dtype=np.float64)
        if out_pts.shape != (4, 2) or src_pts.shape != (4, 2):
            raise ValueError("need exactly 4 point pairs")
        lhs = np.zeros((8, 8))
        rhs = np.zeros(8)
        for i, ((x, y), (sx, sy)) in enumerate(zip(out_pts, src_pts)):
            lhs[2 * i] = (x, y, 1.0, 0.0, 0.0, 0.0, -sx * x, -sx * y)
            lhs[2 * i + 1] = (0.0, 0.0, 0.0, x, y, 1.0, -sy * x, -sy * y)
            rhs[2 * i] = sx
            rhs[2 * i + 1] = sy
        try:
            sol = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            raise ValueError("degenerate quad configuration") from None
        return cls(*sol, 1.0)

    def apply(self, x: float, y: float) -> tuple[float, float]:
        w = self.h31 * x + self.h32 * y + self.h33
        return (
            (self.h11 * x + self.h12 * y + self.h13) / w,
            (self.h21 * x + self.h22 * y + self.h23) / w,
        )


def _bilinear_gather(pix: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Bilinear sample at clamped coordinates; returns float (H, W, C)."""
    h, w = pix.shape[:2]
    sx = np.clip(sx, 0.0, w - 1.0)
    sy = np.clip(sy, 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    fx = (sx - x0)[..., np.newaxis]
    fy = (sy - y0)[..., np.newaxis]
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    p00 = pix[y0, x0].astype(np.float64)
    p01 = pix[y0, x1].astype(np.float64)
    p10 = pix[y1, x0].astype(np.float64)
    p11 = pix[y1, x1].astype(np.float64)
    top = p00 * (1.0 - fx) + p01 * fx
    bot = p10 * (1.0 - fx) + p11 * fx
    return top * (1.0 - fy) + bot * fy


def _fill_array(fill, channels: int) -> np.ndarray:
    arr = np.asarray(fill, dtype=np.float64).reshape(-1)
    if arr.size == 1:
        arr = np.repeat(arr, channels)
    if arr.size != channels:
        raise ValueError(f"fill must be scalar or per-channel ({channels} values)")
    if (arr < 0).any() or (arr > 255).any():
        raise ValueError("fill values must be 8-bit")
    return arr


def _warp(img: ImageBuffer, sx: np.ndarray, sy: np.ndarray, valid: np.ndarray,
          fill) -> ImageBuffer:
    fill_arr = _fill_array(fill, img.channels)
    sampled = _bilinear_gather(img.pixels, sx, sy)
    out = np.where(valid[..., np.newaxis], sampled, fill_arr)
    return ImageBuffer(quantize_u8(out))


def _output_grid(img: ImageBuffer) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0 : img.height, 0 : img.width]
    return xs.astype(np.float64), ys.astype(np.float64)


def warp_affine(img: ImageBuffer, m: AffineMatrix, fill=FILL_DEFAULT) -> ImageBuffer:
    """Inverse-map affine warp, bilinear sampling, fill outside the source."""
    xs, ys = _output_grid(img)
    sx = m.a * xs + m.b * ys + m.c
    sy = m.d * xs + m.e * ys + m.f
    valid = (
        (sx >= -_EDGE_EPS) & (sx <= img.width - 1 + _EDGE_EPS)
        & (sy >= -_EDGE_EPS) & (sy <= img.height - 1 + _EDGE_EPS)
    )
    return _warp(img, sx, sy, valid, fill)


def warp_perspective(img: ImageBuffer, m: PerspectiveMatrix, fill=FILL_DEFAULT) -> ImageBuffer:
    """Inverse-map perspective warp; |w| < 1e-12 counts as out of bounds."""
    xs, ys = _output_grid(img)
    w = m.h31 * xs + m.h32 * ys + m.h33
    w_ok = np.abs(w) >= 1e-12
    w_safe = np.where(w_ok, w, 1.0)
    sx = (m.h11 * xs + m.h12 * ys + m.h13) / w_safe
    sy = (m.h21 * xs + m.h22 * ys + m.h23) / w_safe
    valid = (
        w_ok
        & (sx >= -_EDGE_EPS) & (sx <= img.width - 1 + _EDGE_EPS)
        & (sy >= -_EDGE_EPS) & (sy <= img.height - 1 + _EDGE_EPS)
    )
    return _warp(img, sx, sy, valid, fill)


def resize_bilinear(img: ImageBuffer, new_w: int, new_h: int) -> ImageBuffer:
    """Half-pixel-center bilinear resize with edge clamping.

    Resizing to the input dims is bit-identical (sample points land on the
    integer grid).
    """
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target dims must be >= 1, got {new_w}x{new_h}")
    ys, xs = np.mgrid[0:new_h, 0:new_w]
    sx = (xs + 0.5) * (img.width / new_w) - 0.5
    sy = (ys + 0.5) * (img.height / new_h) - 0.5
    sampled = _bilinear_gather(img.pixels, sx, sy)
    return ImageBuffer(quantize_u8(sampled))


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    """Rec. 601 luma; grayscale input passes through unchanged."""
    if img.channels == 1:
        return img
    rw, gw, bw = _LUMA_WEIGHTS
    pix = img.pixels.astype(np.float64)
    luma = rw * pix[:, :, 0] + gw * pix[:, :, 1] + bw * pix[:, :, 2]
    return ImageBuffer(quantize_u8(luma))


def luma_float(pix: np.ndarray) -> np.ndarray:
    """Unquantized luma of a float (H, W, 3) array."""
    rw, gw, bw = _LUMA_WEIGHTS
    return rw * pix[:, :, 0] + gw * pix[:, :, 1] + bw * pix[:, :, 2]
