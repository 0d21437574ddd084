"""Aspect-ratio routing.

Very wide crops and very tall crops go to specialist recognizers; everything
else stays on the baseline. Both threshold comparisons are strict, so a crop
sitting exactly on a boundary ratio routes to Baseline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import ImageBuffer
from .errors import ConfigError
from .imaging import rotate90


class Route(enum.Enum):
    BASELINE = "Baseline"
    LONG = "Long"
    VERTICAL = "Vertical"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RouterConfig:
    long_threshold: float = 9.0
    vertical_threshold: float = 1.0 / 3.0
    max_len_baseline: int = 25
    max_len_long: int = 50
    max_len_vertical: int = 25

    def __post_init__(self):
        if not 0.0 < self.vertical_threshold < 1.0 < self.long_threshold:
            raise ConfigError(
                "thresholds must satisfy long > 1 > vertical > 0, got "
                f"long={self.long_threshold} vertical={self.vertical_threshold}"
            )
        for name in ("max_len_baseline", "max_len_long", "max_len_vertical"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be >= 2")


DEFAULT_ROUTER = RouterConfig()


def classify(width: int, height: int, cfg: RouterConfig = DEFAULT_ROUTER) -> Route:
    if width < 1 or height < 1:
        raise ValueError(f"dimensions must be positive, got {width}x{height}")
    ratio = width / height
    if ratio > cfg.long_threshold:
        return Route.LONG
    if ratio < cfg.vertical_threshold:
        return Route.VERTICAL
    return Route.BASELINE


def route_of_image(img: ImageBuffer, cfg: RouterConfig = DEFAULT_ROUTER) -> Route:
    return classify(img.width, img.height, cfg)


def max_len_for(route: Route, cfg: RouterConfig = DEFAULT_ROUTER) -> int:
    if route is Route.LONG:
        return cfg.max_len_long
    if route is Route.VERTICAL:
        return cfg.max_len_vertical
    return cfg.max_len_baseline


def normalize_orientation(img: ImageBuffer, route: Route) -> ImageBuffer:
    """Vertical crops rotate 90 degrees clockwise; others pass through."""
    if route is Route.VERTICAL:
        return rotate90(img, "cw")
    return img


def route_table_row(sample_id: str, width: int, height: int,
                    cfg: RouterConfig = DEFAULT_ROUTER) -> str:
    route = classify(width, height, cfg)
    return f"{sample_id}\t{route.value}\t{width}\t{height}\t{width / height:.3f}"
