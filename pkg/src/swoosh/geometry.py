"""Landmark geometry for biometry: ordering, distances, ellipses and coordinate spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateAxis, DegenerateInput, DegenerateSpace, NearParallelAxes, NonPositiveSpacing

__all__ = [
    "Point2",
    "EllipseParams",
    "Space",
    "dod_order",
    "landmark_distance",
    "fit_ellipse",
    "sample_ellipse",
    "axis_endpoints",
    "ellipse_from_axes",
    "circumference",
    "map_coordinates",
    "standard_spaces",
]

PARALLEL_TOL = 1e-6


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")


def _norm_theta(theta: float) -> float:
    t = math.fmod(theta, math.pi)
    if t < 0:
        t += math.pi
    # fmod can return pi itself after the shift for tiny negative inputs
    return 0.0 if t >= math.pi else t


@dataclass(frozen=True)
class EllipseParams:
    cx: float
    cy: float
    semi_major: float
    semi_minor: float
    theta: float

    def __post_init__(self):
        if not (self.semi_major >= self.semi_minor > 0):
            raise ValueError(
                f"need semi_major >= semi_minor > 0, got {self.semi_major!r}, {self.semi_minor!r}"
            )
        object.__setattr__(self, "theta", _norm_theta(self.theta))

    def to_json(self) -> dict:
        return {"cx": self.cx, "cy": self.cy, "a": self.semi_major, "b": self.semi_minor, "theta": self.theta}

    @classmethod
    def from_json(cls, d: dict) -> "EllipseParams":
        return cls(float(d["cx"]), float(d["cy"]), float(d["a"]), float(d["b"]), float(d["theta"]))


def dod_order(p1: Point2, p2: Point2) -> tuple[Point2, Point2]:
    """Left/top point first: order by x, then by y."""
    if (p2.x, p2.y) < (p1.x, p1.y):
        return p2, p1
    return p1, p2


def landmark_distance(p1: Point2, p2: Point2, pixel_spacing: float) -> float:
    if not pixel_spacing > 0:
        raise NonPositiveSpacing(f"pixel spacing must be > 0, got {pixel_spacing!r}")
    return math.hypot(p2.x - p1.x, p2.y - p1.y) * pixel_spacing


def _conic_to_params(conic: np.ndarray) -> EllipseParams:
    A, B, C, D, E, F = conic
    if 4 * A * C - B * B <= 0:
        raise DegenerateInput("fitted conic is not an ellipse")
    cx, cy = np.linalg.solve([[2 * A, B], [B, 2 * C]], [-D, -E])
    f0 = A * cx * cx + B * cx * cy + C * cy * cy + D * cx + E * cy + F
    Q = np.array([[A, B / 2], [B / 2, C]])
    if f0 > 0:
        Q, f0 = -Q, -f0
    if f0 == 0:
        raise DegenerateInput("fitted conic is a point")
    lam, vec = np.linalg.eigh(Q)
    if lam[0] <= 0:
        raise DegenerateInput("fitted conic is not a real ellipse")
    semi_major = math.sqrt(-f0 / lam[0])
    semi_minor = math.sqrt(-f0 / lam[1])
    theta = math.atan2(vec[1, 0], vec[0, 0])
    return EllipseParams(float(cx), float(cy), semi_major, semi_minor, theta)


def fit_ellipse(points: Sequence[Point2]) -> EllipseParams:
    """Direct least-squares ellipse fit under ``4AC - B^2 = 1``.

    Uses the block-partitioned form of the direct method, which avoids the
    singular scatter matrix of the naive generalized eigenproblem. Points are
    centered and scaled first for conditioning.
    """
    if len(points) < 6:
        raise DegenerateInput(f"need at least 6 points, got {len(points)}")
    xy = np.array([(p.x, p.y) for p in points], dtype=float)
    mean = xy.mean(axis=0)
    scale = np.sqrt(((xy - mean) ** 2).sum(axis=1).mean())
    if not scale > 0:
        raise DegenerateInput("points are coincident")
    u = (xy - mean) / scale
    x, y = u[:, 0], u[:, 1]
    D1 = np.column_stack([x * x, x * y, y * y])
    D2 = np.column_stack([x, y, np.ones_like(x)])
    S1, S2, S3 = D1.T @ D1, D1.T @ D2, D2.T @ D2
    if np.linalg.matrix_rank(np.column_stack([x, y, np.ones_like(x)])) < 3:
        raise DegenerateInput("points are collinear")
    T = -np.linalg.solve(S3, S2.T)
    M = S1 + S2 @ T
    # C1^-1 M with C1 = [[0,0,2],[0,-1,0],[2,0,0]]
    M = np.vstack([M[2] / 2, -M[1], M[0] / 2])
    w, v = np.linalg.eig(M)
    v = np.real(v)
    cond = 4 * v[0] * v[2] - v[1] ** 2
    ok = np.flatnonzero((cond > 0) & (np.abs(np.imag(w)) < 1e-12))
    if ok.size == 0:
        raise DegenerateInput("no elliptic solution")
    # several candidates only arise on degenerate data; keep the smallest residual
    best = ok[np.argmin(np.abs(np.real(w[ok])))]
    a1 = v[:, best]
    a1 = a1 / math.sqrt(4 * a1[0] * a1[2] - a1[1] ** 2)
    a2 = T @ a1
    A, B, C = a1
    Dn, En, Fn = a2
    # undo x' = (x - mx)/s, y' = (y - my)/s
    mx, my = mean
    s = scale
    A0, B0, C0 = A / s**2, B / s**2, C / s**2
    D0 = Dn / s - 2 * A0 * mx - B0 * my
    E0 = En / s - 2 * C0 * my - B0 * mx
    F0 = A0 * mx * mx + B0 * mx * my + C0 * my * my - Dn * mx / s - En * my / s + Fn
    return _conic_to_params(np.array([A0, B0, C0, D0, E0, F0]))


def sample_ellipse(e: EllipseParams, n: int, phase: float = 0.0) -> list[Point2]:
    """``n`` points evenly spaced in the parametric angle."""
    t = phase + 2 * np.pi * np.arange(n) / n
    ct, st = math.cos(e.theta), math.sin(e.theta)
    xs = e.cx + e.semi_major * np.cos(t) * ct - e.semi_minor * np.sin(t) * st
    ys = e.cy + e.semi_major * np.cos(t) * st + e.semi_minor * np.sin(t) * ct
    return [Point2(float(a), float(b)) for a, b in zip(xs, ys)]


def axis_endpoints(e: EllipseParams) -> tuple[Point2, Point2, Point2, Point2]:
    """Major endpoints then minor endpoints, each pair in left/top-first order."""
    ct, st = math.cos(e.theta), math.sin(e.theta)
    m1 = Point2(e.cx - e.semi_major * ct, e.cy - e.semi_major * st)
    m2 = Point2(e.cx + e.semi_major * ct, e.cy + e.semi_major * st)
    n1 = Point2(e.cx + e.semi_minor * st, e.cy - e.semi_minor * ct)
    n2 = Point2(e.cx - e.semi_minor * st, e.cy + e.semi_minor * ct)
    return (*dod_order(m1, m2), *dod_order(n1, n2))


def ellipse_from_axes(
    major: tuple[Point2, Point2], minor: tuple[Point2, Point2]
) -> EllipseParams:
    """Rebuild an ellipse from two predicted axis segments.

    The center is where the two axis lines cross. The major direction is kept
    and the minor one discarded, which makes the result's axes perpendicular.
    If the "major" segment is the shorter one the roles are swapped.
    """
    (p1, p2), (q1, q2) = major, minor
    u = np.array([p2.x - p1.x, p2.y - p1.y])
    w = np.array([q2.x - q1.x, q2.y - q1.y])
    lu, lw = float(np.hypot(*u)), float(np.hypot(*w))
    if lu == 0 or lw == 0:
        raise DegenerateAxis("axis has zero length")
    sin_angle = abs(u[0] * w[1] - u[1] * w[0]) / (lu * lw)
    if math.asin(min(sin_angle, 1.0)) < PARALLEL_TOL:
        raise NearParallelAxes("axes are parallel within 1e-6 rad")
    # p1 + s*u = q1 + t*w
    rhs = np.array([q1.x - p1.x, q1.y - p1.y])
    s, _ = np.linalg.solve(np.column_stack([u, -w]), rhs)
    cx, cy = p1.x + s * u[0], p1.y + s * u[1]
    theta = math.atan2(u[1], u[0])
    a, b = lu / 2, lw / 2
    if a < b:
        a, b = b, a
        theta += math.pi / 2
    return EllipseParams(float(cx), float(cy), a, b, theta)


def circumference(e: EllipseParams) -> float:
    """Ramanujan's second perimeter approximation."""
    a, b = e.semi_major, e.semi_minor
    h = ((a - b) / (a + b)) ** 2
    return math.pi * (a + b) * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))


@dataclass(frozen=True)
class Space:
    """A pixel coordinate frame, optionally embedded in a parent frame.

    ``box`` is ``(x0, y0, w, h)`` in parent coordinates: this frame's full
    ``width x height`` extent is stretched onto that box.
    """

    name: str
    width: float
    height: float
    parent: "Space | None" = None
    box: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DegenerateSpace(f"space {self.name!r} has a zero-sized dimension")
        if (self.parent is None) != (self.box is None):
            raise DegenerateSpace("parent and box must be given together")
        if self.box is not None and not (self.box[2] > 0 and self.box[3] > 0):
            raise DegenerateSpace(f"space {self.name!r} has a zero-sized crop box")

    def to_root(self) -> tuple["Space", float, float, float, float]:
        """Root frame plus ``(sx, sy, tx, ty)`` with ``root = s * p + t``."""
        sx, sy, tx, ty = 1.0, 1.0, 0.0, 0.0
        node = self
        while node.parent is not None:
            x0, y0, w, h = node.box
            kx, ky = w / node.width, h / node.height
            sx, sy, tx, ty = kx * sx, ky * sy, kx * tx + x0, ky * ty + y0
            node = node.parent
        return node, sx, sy, tx, ty


def standard_spaces(
    crop: tuple[float, float, float, float],
    original_size: tuple[float, float] = (1.0, 1.0),
    input_size: int = 384,
    heatmap_size: int = 96,
) -> dict[str, Space]:
    """Original image -> resized network input -> heatmap chain for one image."""
    original = Space("original", *original_size)
    inp = Space("input", input_size, input_size, original, tuple(crop))
    hm = Space("heatmap", heatmap_size, heatmap_size, inp, (0.0, 0.0, float(input_size), float(input_size)))
    return {"original": original, "input": inp, "heatmap": hm}


def map_coordinates(p: Point2, from_space: Space, to_space: Space) -> Point2:
    root_a, sxa, sya, txa, tya = from_space.to_root()
    root_b, sxb, syb, txb, tyb = to_space.to_root()
    if root_a is not root_b and root_a != root_b:
        raise DegenerateSpace("spaces do not share a common root frame")
    rx, ry = sxa * p.x + txa, sya * p.y + tya
    return Point2((rx - txb) / sxb, (ry - tyb) / syb)
