"""Region boundaries, ellipse fitting and ellipse rasterization.

Ellipses live in image ``(x, y) = (col, row)`` coordinates with pixel
centers at integer positions. ``angle`` is the direction of the major axis,
measured from +x toward +y, normalized to ``[0, pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, EllipseFitError, InputError

DEFAULT_CONTOUR_SAMPLES = 360


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    semi_major: float
    semi_minor: float
    angle: float

    def __post_init__(self) -> None:
        vals = (self.cx, self.cy, self.semi_major, self.semi_minor, self.angle)
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"ellipse parameters must be finite: {vals}")
        if not self.semi_major >= self.semi_minor > 0:
            raise InputError(
                f"need semi_major >= semi_minor > 0, got {self.semi_major}, {self.semi_minor}"
            )
        if not 0.0 <= self.angle < math.pi:
            raise InputError(f"angle must be in [0, pi), got {self.angle}")

    @classmethod
    def from_axes(cls, cx: float, cy: float, a: float, b: float, angle: float) -> "Ellipse":
        """Build from axes in any order and any angle; canonicalizes both."""
        if b > a:
            a, b = b, a
            angle += math.pi / 2
        angle = math.fmod(angle, math.pi)
        if angle < 0:
            angle += math.pi
        if angle >= math.pi:  # fmod rounding at the wrap point
            angle = 0.0
        return cls(float(cx), float(cy), float(a), float(b), float(angle))

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)

    def to_dict(self) -> dict:
        return {
            "cx": self.cx,
            "cy": self.cy,
            "semi_major": self.semi_major,
            "semi_minor": self.semi_minor,
            "angle": self.angle,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Ellipse":
        return cls(
            float(d["cx"]), float(d["cy"]), float(d["semi_major"]),
            float(d["semi_minor"]), float(d["angle"]),
        )

    def implicit(self, x, y):
        """``(x'/a)^2 + (y'/b)^2 - 1`` in the ellipse frame; <= 0 inside."""
        dx = np.asarray(x, dtype=float) - self.cx
        dy = np.asarray(y, dtype=float) - self.cy
        c, s = math.cos(self.angle), math.sin(self.angle)
        u = dx * c + dy * s
        v = -dx * s + dy * c
        return (u / self.semi_major) ** 2 + (v / self.semi_minor) ** 2 - 1.0


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Member pixels with at least one 4-neighbor outside the region.

    The canvas edge counts as outside. Returns ``(N, 2)`` ``(row, col)``.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise DegenerateDataError("boundary of an empty region is undefined")
    p = np.pad(mask, 1, constant_values=False)
    interior = p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return np.argwhere(mask & ~interior)


def conic_to_ellipse(coeffs) -> Ellipse:
    """Geometric parameters of ``A x^2 + B xy + C y^2 + D x + E y + F = 0``."""
    A, B, C, D, E, F = (float(v) for v in coeffs)
    if A + C < 0:
        A, B, C, D, E, F = -A, -B, -C, -D, -E, -F
    q = np.array([[A, B / 2], [B / 2, C]])
    if np.linalg.det(q) <= 0:
        raise EllipseFitError("conic is not an ellipse")
    x0, y0 = np.linalg.solve(2 * q, [-D, -E])
    f0 = F + 0.5 * (D * x0 + E * y0)
    w, vecs = np.linalg.eigh(q)
    if f0 >= 0 or w[0] <= 0:
        raise EllipseFitError("conic has no real points")
    a = math.sqrt(-f0 / w[0])
    b = math.sqrt(-f0 / w[1])
    angle = math.atan2(vecs[1, 0], vecs[0, 0])
    try:
        return Ellipse.from_axes(x0, y0, a, b, angle)
    except InputError as exc:
        raise EllipseFitError(str(exc)) from exc


def fit_ellipse(points) -> Ellipse:
    """Direct least-squares ellipse-specific fit to ``(x, y)`` points.

    Uses the constraint ``4AC - B^2 = 1`` solved through the reduced 3x3
    eigenproblem (scatter matrix split into quadratic and linear parts),
    on isotropically normalized coordinates.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) < 5:
        raise EllipseFitError(f"need at least 5 distinct points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise EllipseFitError("points must be finite")

    mean = pts.mean(axis=0)
    centered = pts - mean
    scale = math.sqrt(np.mean(np.sum(centered**2, axis=1)) / 2.0)
    if scale == 0.0:
        raise EllipseFitError("points are coincident")
    sv = np.linalg.svd(centered / scale, compute_uv=False)
    if sv[-1] < 1e-9 * sv[0]:
        raise EllipseFitError("points are collinear")

    x, y = (centered / scale).T
    d1 = np.column_stack([x * x, x * y, y * y])
    d2 = np.column_stack([x, y, np.ones_like(x)])
    s1, s2, s3 = d1.T @ d1, d1.T @ d2, d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError as exc:
        raise EllipseFitError("singular linear scatter") from exc
    m = s1 + s2 @ t
    # premultiply by the inverse of the 3x3 constraint block
    m = np.array([m[2] / 2.0, -m[1], m[0] / 2.0])
    evals, evecs = np.linalg.eig(m)
    evecs = np.real(evecs)
    evals = np.real(evals)
    cond = 4 * evecs[0] * evecs[2] - evecs[1] ** 2
    ok = np.flatnonzero(cond > 0)
    if ok.size == 0:
        raise EllipseFitError("no ellipse-specific solution")
    k = ok[np.argmin(np.abs(evals[ok]))]
    a1 = evecs[:, k]
    coeffs = np.concatenate([a1, t @ a1])
    if not np.all(np.isfinite(coeffs)):
        raise EllipseFitError("non-finite conic")
    e = conic_to_ellipse(coeffs)
    return Ellipse.from_axes(
        e.cx * scale + mean[0],
        e.cy * scale + mean[1],
        e.semi_major * scale,
        e.semi_minor * scale,
        e.angle,
    )


def moment_ellipse(mask: np.ndarray) -> Ellipse:
    """Ellipse with the region's centroid and second central moments.

    Each pixel is treated as a unit square, which keeps the axes positive
    for one-pixel-wide regions.
    """
    rc = np.argwhere(mask)
    if len(rc) == 0:
        raise DegenerateDataError("moment ellipse of an empty region")
    xy = rc[:, ::-1].astype(float)
    cov = np.cov(xy.T, bias=True) + np.eye(2) / 12.0
    w, vecs = np.linalg.eigh(cov)
    # a solid ellipse with semi-axis s has variance s^2 / 4 along it
    a, b = 2 * math.sqrt(w[1]), 2 * math.sqrt(w[0])
    angle = math.atan2(vecs[1, 1], vecs[0, 1])
    cx, cy = xy.mean(axis=0)
    return Ellipse.from_axes(cx, cy, a, b, angle)


def fit_region(mask: np.ndarray) -> tuple[Ellipse, bool]:
    """Fit a region's boundary pixels; falls back to the moment ellipse.

    Returns the ellipse and whether the fallback was used.
    """
    rc = boundary_pixels(mask)
    try:
        return fit_ellipse(rc[:, ::-1]), False
    except EllipseFitError:
        return moment_ellipse(mask), True


def rasterize_ellipse(e: Ellipse, width: int, height: int) -> np.ndarray:
    """Pixels whose centers lie inside (or on) the ellipse, clipped to canvas."""
    mask = np.zeros((height, width), dtype=bool)
    c, s = math.cos(e.angle), math.sin(e.angle)
    hx = math.sqrt((e.semi_major * c) ** 2 + (e.semi_minor * s) ** 2)
    hy = math.sqrt((e.semi_major * s) ** 2 + (e.semi_minor * c) ** 2)
    c0 = max(0, math.floor(e.cx - hx))
    c1 = min(width - 1, math.ceil(e.cx + hx))
    r0 = max(0, math.floor(e.cy - hy))
    r1 = min(height - 1, math.ceil(e.cy + hy))
    if c0 > c1 or r0 > r1:
        return mask
    rr, cc = np.mgrid[r0 : r1 + 1, c0 : c1 + 1]
    mask[r0 : r1 + 1, c0 : c1 + 1] = e.implicit(cc, rr) <= 1e-9
    return mask


def ellipse_contour(e: Ellipse, n: int = DEFAULT_CONTOUR_SAMPLES) -> np.ndarray:
    """``n`` boundary points ``(x, y)`` at uniform parametric angle steps."""
    if n < 3:
        raise InputError(f"need at least 3 contour samples, got {n}")
    t = 2 * np.pi * np.arange(n) / n
    c, s = math.cos(e.angle), math.sin(e.angle)
    u = e.semi_major * np.cos(t)
    v = e.semi_minor * np.sin(t)
    return np.column_stack([e.cx + u * c - v * s, e.cy + u * s + v * c])
