import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from swoosh.errors import DegenerateAxis, DegenerateInput, DegenerateSpace, NearParallelAxes, NonPositiveSpacing
from swoosh.geometry import (
    EllipseParams,
    Point2,
    Space,
    axis_endpoints,
    circumference,
    dod_order,
    ellipse_from_axes,
    fit_ellipse,
    landmark_distance,
    map_coordinates,
    sample_ellipse,
    standard_spaces,
)

coord = st.floats(-1e3, 1e3, allow_nan=False)


def perimeter_quad(a, b):
    """Arc length of x = a cos t, y = b sin t by adaptive quadrature."""
    val, _ = quad(lambda t: math.hypot(a * math.sin(t), b * math.cos(t)), 0, math.pi / 2, epsabs=0, epsrel=1e-13)
    return 4 * val


def _theta_close(t1, t2, tol):
    d = abs(t1 - t2) % math.pi
    return min(d, math.pi - d) <= tol


# -- ordering and distance -------------------------------------------------


def test_dod_examples():
    assert dod_order(Point2(5, 3), Point2(2, 7)) == (Point2(2, 7), Point2(5, 3))
    assert dod_order(Point2(4, 9), Point2(4, 1)) == (Point2(4, 1), Point2(4, 9))
    assert dod_order(Point2(1, 1), Point2(1, 1)) == (Point2(1, 1), Point2(1, 1))


@given(coord, coord, coord, coord)
def test_dod_idempotent_and_total(x1, y1, x2, y2):
    p, q = Point2(x1, y1), Point2(x2, y2)
    first = dod_order(p, q)
    assert dod_order(*first) == first
    assert dod_order(q, p) == first
    assert (first[0].x, first[0].y) <= (first[1].x, first[1].y)


def test_distance_examples():
    assert landmark_distance(Point2(0, 0), Point2(3, 4), 1.0) == 5.0
    assert landmark_distance(Point2(0, 0), Point2(0, 0), 0.5) == 0.0
    assert landmark_distance(Point2(10, 0), Point2(0, 0), 0.2) == pytest.approx(2.0)
    with pytest.raises(NonPositiveSpacing):
        landmark_distance(Point2(0, 0), Point2(1, 1), 0)


@given(coord, coord, coord, coord, coord, coord)
def test_distance_symmetric_and_triangle(x1, y1, x2, y2, x3, y3):
    p, q, r = Point2(x1, y1), Point2(x2, y2), Point2(x3, y3)
    d = lambda u, v: landmark_distance(u, v, 0.7)  # noqa: E731
    assert d(p, q) == d(q, p)
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-9


# -- ellipse fitting -------------------------------------------------------


def test_fit_recovers_rotated_ellipse():
    truth = EllipseParams(10, -5, 8, 3, 0.7)
    e = fit_ellipse(sample_ellipse(truth, 32))
    for got, want in ((e.cx, 10), (e.cy, -5), (e.semi_major, 8), (e.semi_minor, 3), (e.theta, 0.7)):
        assert got == pytest.approx(want, rel=1e-6)


def test_fit_circle():
    e = fit_ellipse(sample_ellipse(EllipseParams(0, 0, 4, 4, 0), 32))
    assert e.semi_major == pytest.approx(4, rel=1e-9)
    assert e.semi_minor == pytest.approx(4, rel=1e-9)
    assert abs(e.cx) < 1e-9 and abs(e.cy) < 1e-9
    assert 0 <= e.theta < math.pi


def test_fit_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        fit_ellipse(sample_ellipse(EllipseParams(0, 0, 2, 1, 0), 5))
    with pytest.raises(DegenerateInput):
        fit_ellipse([Point2(i, 2 * i + 1) for i in range(10)])
    with pytest.raises(DegenerateInput):
        fit_ellipse([Point2(1, 1)] * 8)


@settings(max_examples=100, deadline=None)
@given(
    cx=st.floats(-500, 500),
    cy=st.floats(-500, 500),
    a=st.floats(2, 200),
    ratio=st.floats(0.1, 0.99),
    theta=st.floats(0, math.pi - 1e-3),
    phase=st.floats(0, 2 * math.pi),
)
def test_fit_round_trip_noise_free(cx, cy, a, ratio, theta, phase):
    truth = EllipseParams(cx, cy, a, a * ratio, theta)
    e = fit_ellipse(sample_ellipse(truth, 32, phase))
    scale = a
    assert abs(e.cx - cx) <= 1e-6 * scale and abs(e.cy - cy) <= 1e-6 * scale
    assert e.semi_major == pytest.approx(a, rel=1e-6)
    assert e.semi_minor == pytest.approx(a * ratio, rel=1e-6)
    assert _theta_close(e.theta, truth.theta, 1e-6)


def test_fit_error_shrinks_with_more_points():
    truth = EllipseParams(10, -5, 8, 3, 0.7)
    errors = []
    for n in (64, 128, 256, 512):
        errs = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            pts = [
                Point2(p.x + 0.05 * rng.standard_normal(), p.y + 0.05 * rng.standard_normal())
                for p in sample_ellipse(truth, n, phase=rng.uniform(0, 2 * math.pi))
            ]
            e = fit_ellipse(pts)
            errs.append(
                math.hypot(e.cx - truth.cx, e.cy - truth.cy)
                + abs(e.semi_major - truth.semi_major)
                + abs(e.semi_minor - truth.semi_minor)
            )
        errors.append(np.mean(errs))
    assert all(a > b for a, b in zip(errors, errors[1:]))


# -- axes ------------------------------------------------------------------


def test_axis_endpoints_examples():
    m1, m2, n1, n2 = axis_endpoints(EllipseParams(0, 0, 2, 1, 0))
    assert (m1, m2) == (Point2(-2, 0), Point2(2, 0))
    assert (n1, n2) == (Point2(0, -1), Point2(0, 1))

    m1, m2, n1, n2 = axis_endpoints(EllipseParams(0, 0, 2, 1, math.pi / 2))
    assert (m1.x, m1.y) == pytest.approx((0, -2), abs=1e-15)
    assert (m2.x, m2.y) == pytest.approx((0, 2), abs=1e-15)
    assert (n1.x, n1.y) == pytest.approx((-1, 0), abs=1e-15)
    assert (n2.x, n2.y) == pytest.approx((1, 0), abs=1e-15)


def test_ellipse_from_axes_examples():
    e = ellipse_from_axes((Point2(-2, 0), Point2(2, 0)), (Point2(0, -1), Point2(0, 1)))
    assert (e.cx, e.cy, e.semi_major, e.semi_minor, e.theta) == (0, 0, 2, 1, 0)

    eps = 2e-7
    with pytest.raises(NearParallelAxes):
        ellipse_from_axes(
            (Point2(-1, 0), Point2(1, 0)),
            (Point2(-2 * math.cos(eps), -2 * math.sin(eps)), Point2(2 * math.cos(eps), 2 * math.sin(eps))),
        )

    with pytest.raises(DegenerateAxis):
        ellipse_from_axes((Point2(1, 1), Point2(1, 1)), (Point2(0, -1), Point2(0, 1)))


def test_ellipse_from_axes_swapped_roles():
    # "major" given along y with length 2, "minor" along x with length 6
    e = ellipse_from_axes((Point2(0, -1), Point2(0, 1)), (Point2(-3, 0), Point2(3, 0)))
    assert e.semi_major == 3 and e.semi_minor == 1
    assert e.semi_major >= e.semi_minor
    assert _theta_close(e.theta, 0.0, 1e-15)


def test_ellipse_from_non_perpendicular_axes_keeps_major_direction():
    e = ellipse_from_axes((Point2(-4, -1), Point2(4, 1)), (Point2(0.5, -2), Point2(-0.5, 2)))
    assert (e.cx, e.cy) == pytest.approx((0, 0), abs=1e-12)
    assert e.theta == pytest.approx(math.atan2(2, 8))
    assert e.semi_minor == pytest.approx(math.hypot(1, 4) / 2)


@settings(max_examples=200, deadline=None)
@given(
    cx=st.floats(-1e3, 1e3),
    cy=st.floats(-1e3, 1e3),
    a=st.floats(1, 300),
    ratio=st.floats(0.05, 0.999),
    theta=st.floats(0, math.pi, exclude_max=True),
)
def test_axes_round_trip(cx, cy, a, ratio, theta):
    e = EllipseParams(cx, cy, a, a * ratio, theta)
    m1, m2, n1, n2 = axis_endpoints(e)
    back = ellipse_from_axes((m1, m2), (n1, n2))
    tol = 1e-10 * max(1.0, abs(cx), abs(cy), a)
    assert abs(back.cx - cx) <= tol and abs(back.cy - cy) <= tol
    assert back.semi_major == pytest.approx(e.semi_major, rel=1e-10)
    assert back.semi_minor == pytest.approx(e.semi_minor, rel=1e-10)
    assert _theta_close(back.theta, e.theta, 1e-10)


# -- circumference ---------------------------------------------------------


def test_circumference_examples():
    assert circumference(EllipseParams(0, 0, 1, 1, 0)) == pytest.approx(2 * math.pi, rel=1e-15)
    assert circumference(EllipseParams(0, 0, 2, 1, 0)) == pytest.approx(perimeter_quad(2, 1), rel=1e-4)
    assert circumference(EllipseParams(0, 0, 2, 1, 0)) == pytest.approx(9.6884, abs=1e-4)
    assert circumference(EllipseParams(0, 0, 10, 1, 0)) == pytest.approx(perimeter_quad(10, 1), rel=5e-3)


@pytest.mark.parametrize("ratio", np.linspace(0.5, 1.0, 11))
def test_circumference_vs_quadrature(ratio):
    assert circumference(EllipseParams(0, 0, 7.0, 7.0 * ratio, 0)) == pytest.approx(
        perimeter_quad(7.0, 7.0 * ratio), rel=1e-4
    )


def test_circumference_symmetric_after_normalization():
    e1 = ellipse_from_axes((Point2(-3, 0), Point2(3, 0)), (Point2(0, -1), Point2(0, 1)))
    e2 = ellipse_from_axes((Point2(0, -1), Point2(0, 1)), (Point2(-3, 0), Point2(3, 0)))
    assert circumference(e1) == circumference(e2)


# -- coordinate spaces -----------------------------------------------------


def test_map_heatmap_to_input_and_original():
    sp = standard_spaces(crop=(100, 50, 384, 384), original_size=(800, 600))
    assert map_coordinates(Point2(48, 48), sp["heatmap"], sp["input"]) == Point2(192, 192)
    assert map_coordinates(Point2(0, 0), sp["heatmap"], sp["original"]) == Point2(100, 50)
    assert map_coordinates(Point2(100, 50), sp["original"], sp["heatmap"]) == Point2(0, 0)


def test_map_non_uniform_resize():
    # a 200x100 crop squashed to 384x384 without keeping the aspect ratio
    sp = standard_spaces(crop=(10, 20, 200, 100))
    p = map_coordinates(Point2(96, 96), sp["heatmap"], sp["original"])
    assert (p.x, p.y) == pytest.approx((210, 120))


@settings(max_examples=200, deadline=None)
@given(
    x0=st.floats(-500, 500),
    y0=st.floats(-500, 500),
    w=st.floats(1, 2000),
    h=st.floats(1, 2000),
    px=st.floats(-1000, 3000),
    py=st.floats(-1000, 3000),
)
def test_map_round_trip(x0, y0, w, h, px, py):
    sp = standard_spaces(crop=(x0, y0, w, h))
    p = Point2(px, py)
    q = map_coordinates(map_coordinates(p, sp["original"], sp["heatmap"]), sp["heatmap"], sp["original"])
    assert abs(q.x - px) <= 1e-9 * max(1, abs(px)) and abs(q.y - py) <= 1e-9 * max(1, abs(py))


def test_degenerate_spaces():
    with pytest.raises(DegenerateSpace):
        Space("bad", 0, 10)
    with pytest.raises(DegenerateSpace):
        standard_spaces(crop=(0, 0, 0, 10))
    with pytest.raises(DegenerateSpace):
        map_coordinates(Point2(0, 0), Space("a", 10, 10), Space("b", 10, 10))
