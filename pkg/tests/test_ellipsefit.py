import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erelsel.ellipsefit import (
    Ellipse,
    boundary_pixels,
    ellipse_contour,
    fit_ellipse,
    fit_region,
    moment_ellipse,
    rasterize_ellipse,
)
from erelsel.errors import DegenerateDataError, EllipseFitError, InputError
from erelsel.morphology import dilate, disk


def sample_ellipse(cx, cy, a, b, angle, n=64):
    """Parametric oracle, independent of ellipse_contour."""
    pts = []
    for k in range(n):
        t = 2 * math.pi * k / n
        u, v = a * math.cos(t), b * math.sin(t)
        pts.append((cx + u * math.cos(angle) - v * math.sin(angle),
                    cy + u * math.sin(angle) + v * math.cos(angle)))
    return np.array(pts)


def angle_diff(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


# boundary_pixels

def test_boundary_single_pixel():
    m = np.zeros((3, 3), bool)
    m[1, 1] = True
    assert [tuple(p) for p in boundary_pixels(m)] == [(1, 1)]


def test_boundary_square_excludes_center():
    m = np.zeros((5, 5), bool)
    m[1:4, 1:4] = True
    b = {tuple(p) for p in boundary_pixels(m)}
    assert len(b) == 8 and (2, 2) not in b


def test_boundary_line():
    m = np.zeros((3, 7), bool)
    m[1, 1:6] = True
    assert len(boundary_pixels(m)) == 5


def test_boundary_canvas_edge_counts_as_outside():
    m = np.ones((3, 3), bool)
    assert len(boundary_pixels(m)) == 8


def test_boundary_empty():
    with pytest.raises(DegenerateDataError):
        boundary_pixels(np.zeros((3, 3), bool))


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), min_size=1, max_size=60))
def test_boundary_subset_and_covers_shell(coords):
    m = np.zeros((12, 12), bool)
    for r, c in coords:
        m[r, c] = True
    bmask = np.zeros_like(m)
    rc = boundary_pixels(m)
    bmask[rc[:, 0], rc[:, 1]] = True
    assert not (bmask & ~m).any()
    shell = dilate(m, disk(1)) & ~m
    assert not (shell & ~dilate(bmask, disk(1))).any()


# fit_ellipse

def test_fit_circle():
    e = fit_ellipse(sample_ellipse(20, 20, 10, 10, 0))
    assert e.cx == pytest.approx(20, abs=0.1) and e.cy == pytest.approx(20, abs=0.1)
    assert e.semi_major == pytest.approx(10, abs=0.1)
    assert e.semi_minor == pytest.approx(10, abs=0.1)


def test_fit_axis_aligned():
    e = fit_ellipse(sample_ellipse(0, 0, 10, 5, 0))
    assert e.semi_major == pytest.approx(10, rel=0.01)
    assert e.semi_minor == pytest.approx(5, rel=0.01)
    assert angle_diff(e.angle, 0.0) < 0.02


@pytest.mark.parametrize("pts", [
    [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)],
    [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)],
    [(0, 0), (1, 1), (2, 2), (3, 3)],
    [(1, 1)] * 10,
])
def test_fit_degenerate(pts):
    with pytest.raises(EllipseFitError):
        fit_ellipse(pts)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(5, 100), st.floats(1.02, 10), st.floats(0, math.pi - 1e-6),
    st.floats(-200, 200), st.floats(-200, 200),
)
def test_fit_recovers_random_ellipses(b, ratio, angle, cx, cy):
    a = min(100.0, b * ratio)
    if a / b < 1.02:
        b = a / 1.02
    e = fit_ellipse(sample_ellipse(cx, cy, a, b, angle))
    assert e.semi_major == pytest.approx(a, rel=0.01)
    assert e.semi_minor == pytest.approx(b, rel=0.01)
    assert math.hypot(e.cx - cx, e.cy - cy) < 0.01 * b
    assert angle_diff(e.angle, angle) < 0.02


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_fit_rotation_equivariant(rot):
    base = sample_ellipse(0, 0, 30, 12, 0.3)
    c, s = math.cos(rot), math.sin(rot)
    rotated = base @ np.array([[c, s], [-s, c]])
    e0, e1 = fit_ellipse(base), fit_ellipse(rotated)
    assert angle_diff(e1.angle - e0.angle, rot) < 0.02


def test_fit_region_falls_back_on_tiny_region():
    m = np.zeros((5, 5), bool)
    m[2, 1:4] = True
    e, fallback = fit_region(m)
    assert fallback
    assert e.cx == pytest.approx(2) and e.cy == pytest.approx(2)


def test_moment_ellipse_of_raster_disc():
    e0 = Ellipse(40, 40, 20, 10, 0.5)
    e = moment_ellipse(rasterize_ellipse(e0, 80, 80))
    assert e.semi_major == pytest.approx(20, rel=0.03)
    assert e.semi_minor == pytest.approx(10, rel=0.05)
    assert angle_diff(e.angle, 0.5) < 0.02


# Ellipse type

def test_ellipse_invariants():
    with pytest.raises(InputError):
        Ellipse(0, 0, 1, 2, 0)
    with pytest.raises(InputError):
        Ellipse(0, 0, 2, 1, math.pi)
    e = Ellipse.from_axes(0, 0, 1, 2, -0.1)
    assert e.semi_major == 2 and 0 <= e.angle < math.pi


# rasterize_ellipse

def per_pixel_oracle(cx, cy, a, b, angle, w, h):
    out = np.zeros((h, w), bool)
    for r in range(h):
        for c in range(w):
            dx, dy = c - cx, r - cy
            u = dx * math.cos(angle) + dy * math.sin(angle)
            v = -dx * math.sin(angle) + dy * math.cos(angle)
            out[r, c] = (u / a) ** 2 + (v / b) ** 2 <= 1 + 1e-9
    return out


def test_rasterize_circle_3x3():
    m = rasterize_ellipse(Ellipse(2, 2, 1.5, 1.5, 0), 5, 5)
    assert m.sum() == 9 and m[1:4, 1:4].all()


def test_rasterize_outside_canvas():
    assert not rasterize_ellipse(Ellipse(100, 100, 5, 3, 0), 10, 10).any()


def test_rasterize_tiny_circle():
    assert rasterize_ellipse(Ellipse(3, 2, 0.4, 0.4, 0), 6, 6).sum() == 1


@settings(max_examples=40)
@given(st.floats(0, 20), st.floats(0, 15), st.floats(0.5, 12), st.floats(0.5, 12), st.floats(0, 3.14))
def test_rasterize_matches_oracle(cx, cy, a, b, angle):
    e = Ellipse.from_axes(cx, cy, a, b, angle)
    m = rasterize_ellipse(e, 21, 16)
    ref = per_pixel_oracle(e.cx, e.cy, e.semi_major, e.semi_minor, e.angle, 21, 16)
    # pixel centers within 1e-9 of the border may legitimately differ
    diff = m != ref
    if diff.any():
        rr, cc = np.nonzero(diff)
        assert np.all(np.abs(e.implicit(cc, rr)) < 1e-6)


@pytest.mark.parametrize("a, b", [(20, 20), (40, 20), (60, 35), (25, 21)])
def test_raster_area_near_analytic(a, b):
    e = Ellipse(100, 100, a, b, 0.7)
    assert rasterize_ellipse(e, 200, 200).sum() == pytest.approx(math.pi * a * b, rel=0.05)


# ellipse_contour

def test_contour_circle_four_points():
    pts = ellipse_contour(Ellipse(5, 5, 10, 10, 0), 4)
    d = np.hypot(pts[:, 0] - 5, pts[:, 1] - 5)
    np.testing.assert_allclose(d, 10)
    v = pts - 5
    for i in range(4):
        assert np.dot(v[i], v[(i + 1) % 4]) == pytest.approx(0, abs=1e-9)


@given(st.floats(1, 50), st.floats(1, 50), st.floats(0, 3.14), st.floats(-50, 50), st.floats(-50, 50))
def test_contour_on_implicit_curve(a, b, angle, cx, cy):
    e = Ellipse.from_axes(cx, cy, a, b, angle)
    pts = ellipse_contour(e, 37)
    assert np.all(np.abs(e.implicit(pts[:, 0], pts[:, 1])) < 1e-9)


def test_contour_rotated_bbox():
    pts = ellipse_contour(Ellipse(0, 0, 10, 5, math.pi / 2), 360)
    assert np.ptp(pts[:, 0]) == pytest.approx(10, abs=1e-6)
    assert np.ptp(pts[:, 1]) == pytest.approx(20, abs=1e-6)


def test_contour_too_few_samples():
    with pytest.raises(InputError):
        ellipse_contour(Ellipse(0, 0, 2, 1, 0), 2)
