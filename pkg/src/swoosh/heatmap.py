"""Gaussian target heatmaps, heatmap MSE, peak decoding and a dispersion measure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHeatmap, DimensionMismatch, NonPositiveInput, OutOfBounds, OverlapError

__all__ = [
    "Heatmap",
    "Landmark",
    "make_ground_truth",
    "mse",
    "optimum_mse_pair",
    "argmax_landmark",
    "dispersion",
    "patch_half_width",
]


class Heatmap:
    """Immutable 2-D intensity grid, stored row-major as ``values[y, x]``."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"heatmap must be a non-empty 2-D grid, got shape {arr.shape}")
        arr.flags.writeable = False
        self._values = arr

    @classmethod
    def zeros(cls, width: int, height: int) -> "Heatmap":
        return cls(np.zeros((height, width)))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def width(self) -> int:
        return self._values.shape[1]

    @property
    def height(self) -> int:
        return self._values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._values.shape

    def __eq__(self, other):
        if not isinstance(other, Heatmap):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._values, other._values)

    def __repr__(self):
        return f"Heatmap(width={self.width}, height={self.height}, max={self._values.max():.4g})"


@dataclass(frozen=True)
class Landmark:
    x: float
    y: float
    # set by argmax_landmark when the grid carries no peak information
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"landmark coordinates must be finite, got ({self.x}, {self.y})")


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def patch_half_width(sigma: float) -> int:
    """Half side of the square Gaussian patch; the side is ``6*sigma + 1``."""
    return int(round(3 * sigma))


def make_ground_truth(width: int, height: int, center: Landmark, sigma: float) -> Heatmap:
    """Gaussian target with peak 1 at the rounded landmark.

    The Gaussian is truncated to a ``(6*sigma+1)``-wide square patch; parts of
    the patch outside the grid are cropped, so a far out-of-bounds center gives
    an all-zero heatmap.
    """
    if width < 1 or height < 1:
        raise NonPositiveInput("width and height must be >= 1")
    if not sigma > 0:
        raise NonPositiveInput(f"sigma must be > 0, got {sigma!r}")
    cx, cy = _round_half_up(center.x), _round_half_up(center.y)
    r = patch_half_width(sigma)
    out = np.zeros((height, width))
    x0, x1 = max(cx - r, 0), min(cx + r, width - 1)
    y0, y1 = max(cy - r, 0), min(cy + r, height - 1)
    if x0 > x1 or y0 > y1:
        return Heatmap(out)
    xs = np.arange(x0, x1 + 1, dtype=float)
    ys = np.arange(y0, y1 + 1, dtype=float)[:, None]
    out[y0 : y1 + 1, x0 : x1 + 1] = np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sigma * sigma))
    return Heatmap(out)


def _as_array(h) -> np.ndarray:
    return h.values if isinstance(h, Heatmap) else np.asarray(h, dtype=float)


def mse(h1, h2) -> float:
    a, b = _as_array(h1), _as_array(h2)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape {a.shape} != {b.shape}")
    d = a - b
    return float(np.mean(d * d))


def optimum_mse_pair(width: int, height: int, sigma: float, separation: int) -> float:
    """MSE between two ground-truth heatmaps whose hotspots are ``separation`` px apart.

    The pair is placed horizontally about the grid center. While the two
    patches are disjoint and uncropped the result does not depend on placement.
    """
    r = patch_half_width(sigma)
    side = 2 * r + 1
    separation = int(separation)
    if separation < side:
        raise OverlapError(f"separation {separation} < patch side {side}: hotspots overlap")
    x1 = (width - separation) // 2
    x2 = x1 + separation
    cy = height // 2
    if x1 - r < 0 or x2 + r > width - 1 or cy - r < 0 or cy + r > height - 1:
        raise OutOfBounds(f"a {width}x{height} grid cannot hold two uncropped hotspots {separation} px apart")
    g1 = make_ground_truth(width, height, Landmark(x1, cy), sigma)
    g2 = make_ground_truth(width, height, Landmark(x2, cy), sigma)
    return mse(g1, g2)


def argmax_landmark(h) -> Landmark:
    """Decode the peak, shifted a quarter pixel toward the larger neighbour on each axis.

    Ties go to the smallest row-major index. A constant grid decodes to its
    first pixel with ``degenerate=True``.
    """
    v = _as_array(h)
    idx = int(np.argmax(v))
    py, px = divmod(idx, v.shape[1])
    if v.max() == v.min():
        return Landmark(float(px), float(py), degenerate=True)
    x, y = float(px), float(py)
    if 0 < px < v.shape[1] - 1:
        x += 0.25 * np.sign(v[py, px + 1] - v[py, px - 1])
    if 0 < py < v.shape[0] - 1:
        y += 0.25 * np.sign(v[py + 1, px] - v[py - 1, px])
    return Landmark(float(x), float(y))


def _peak_index(v: np.ndarray) -> tuple[int, int]:
    py, px = divmod(int(np.argmax(v)), v.shape[1])
    return px, py


def dispersion(h, radius: float = 9) -> float:
    """Fraction of squared intensity lying farther than ``radius`` from the peak pixel."""
    if radius < 1:
        raise NonPositiveInput(f"radius must be >= 1, got {radius!r}")
    v = _as_array(h)
    sq = v * v
    total = float(sq.sum())
    if total == 0.0:
        raise DegenerateHeatmap("heatmap has zero squared mass")
    px, py = _peak_index(v)
    ys, xs = np.ogrid[: v.shape[0], : v.shape[1]]
    disk = (xs - px) ** 2 + (ys - py) ** 2 <= radius * radius
    return 1.0 - float(sq[disk].sum()) / total
