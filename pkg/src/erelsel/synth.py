"""Synthetic IVUS-like frames with a nested EREL series.

A frame holds a dark elliptical lumen (~30) inside a brighter vessel wall
(~120) on a background (~80), with uniform noise of +/-10. The EREL series
grows monotonically: a few irregular regions inside the lumen, the lumen
itself, regions leaking out of the lumen through one angular sector, and
finally the whole wall ellipse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ellipsefit import Ellipse, ellipse_contour, rasterize_ellipse
from .errors import InputError
from .masks import FrameImage, mask_to_coords
from .selection import FrameSample

ARTIFACTS = ("none", "bifurcation_notch", "shadow_sector")
ARTIFACT_CATEGORY = {
    "none": "no_artifact",
    "bifurcation_notch": "bifurcation",
    "shadow_sector": "shadow",
}

LUMEN_LEVEL = 30
WALL_LEVEL = 120
BACKGROUND_LEVEL = 80
SHADOW_LEVEL = 45
NOISE_AMPLITUDE = 10
WALL_SCALE = 1.9


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    width: int = 128
    height: int = 128
    artifact: str = "none"
    lumen: Optional[Ellipse] = None
    n_inner: Optional[int] = None
    n_outer: Optional[int] = None
    lumen_level: int = LUMEN_LEVEL
    wall_level: int = WALL_LEVEL
    background_level: int = BACKGROUND_LEVEL
    noise: int = NOISE_AMPLITUDE

    def __post_init__(self) -> None:
        if self.artifact not in ARTIFACTS:
            raise InputError(f"artifact must be one of {ARTIFACTS}, got {self.artifact!r}")
        if self.width < 32 or self.height < 32:
            raise InputError("synthetic canvas must be at least 32x32")
        if self.lumen is not None:
            e = self.lumen
            r = e.semi_major * WALL_SCALE
            if e.cx - r < 0 or e.cy - r < 0 or e.cx + r > self.width - 1 or e.cy + r > self.height - 1:
                raise InputError("lumen (with its wall) must fit inside the canvas")


def _polar(shape, e: Ellipse):
    """Per-pixel angle around the lumen center and normalized elliptic radius."""
    rr, cc = np.mgrid[0 : shape[0], 0 : shape[1]]
    dx, dy = cc - e.cx, rr - e.cy
    theta = np.arctan2(dy, dx)
    rho = np.sqrt(np.maximum(e.implicit(cc, rr) + 1.0, 0.0))
    return theta, rho


def _sector(theta: np.ndarray, center: float, half_width: float) -> np.ndarray:
    d = np.angle(np.exp(1j * (theta - center)))
    return np.abs(d) <= half_width


def _scaled(e: Ellipse, s: float) -> Ellipse:
    return Ellipse(e.cx, e.cy, e.semi_major * s, e.semi_minor * s, e.angle)


def generate_synthetic(spec: SynthSpec) -> FrameSample:
    """Build one frame. ``designed_index`` on the result marks the lumen EREL."""
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width
    if spec.lumen is None:
        a = rng.uniform(16.0, 22.0)
        b = a * rng.uniform(0.75, 1.0)
        ang = rng.uniform(0.0, math.pi)
        cx = (w - 1) / 2 + rng.uniform(-4, 4)
        cy = (h - 1) / 2 + rng.uniform(-4, 4)
        lumen = Ellipse.from_axes(cx, cy, a, b, ang)
    else:
        lumen = spec.lumen
        rng.uniform(size=5)  # keep the stream aligned with the random-lumen branch
    n_inner = spec.n_inner if spec.n_inner is not None else int(rng.integers(1, 4))
    n_outer = spec.n_outer if spec.n_outer is not None else int(rng.integers(2, 5))
    leak_dir = rng.uniform(-math.pi, math.pi)
    cut_dir = rng.uniform(-math.pi, math.pi)
    artifact_dir = leak_dir + rng.choice([-1, 1]) * rng.uniform(math.pi / 3, math.pi)

    theta, rho = _polar((h, w), lumen)
    lumen_mask = rasterize_ellipse(lumen, w, h)
    wall_mask = rasterize_ellipse(_scaled(lumen, WALL_SCALE), w, h)

    img = np.full((h, w), float(spec.background_level))
    img[wall_mask] = spec.wall_level

    # region that later ERELs leak into, outside the lumen
    if spec.artifact == "bifurcation_notch":
        # side branch: dark disc straddling the lumen border
        br = 0.55 * lumen.semi_minor
        edge = _radius_at(lumen, artifact_dir)
        bx = lumen.cx + math.cos(artifact_dir) * edge
        by = lumen.cy + math.sin(artifact_dir) * edge
        rr, cc = np.mgrid[0:h, 0:w]
        branch = (cc - bx) ** 2 + (rr - by) ** 2 <= br * br
        img[branch] = spec.lumen_level
        artifact_mask = branch & ~lumen_mask
    elif spec.artifact == "shadow_sector":
        shadow = _sector(theta, artifact_dir, math.radians(18)) & (rho > 1.0) & (rho <= WALL_SCALE)
        img[shadow] = SHADOW_LEVEL
        artifact_mask = shadow
    else:
        artifact_mask = np.zeros((h, w), dtype=bool)
    img[lumen_mask] = spec.lumen_level

    noise = rng.integers(-spec.noise, spec.noise + 1, size=(h, w))
    img = np.clip(img + noise, 0, 255).astype(np.uint8)

    regions = []
    # inner ERELs: the lumen truncated by a chord that recedes as they grow
    rr, cc = np.mgrid[0:h, 0:w]
    depth = (cc - lumen.cx) * math.cos(cut_dir) + (rr - lumen.cy) * math.sin(cut_dir)
    edge = _radius_at(lumen, cut_dir)
    for k in range(n_inner):
        t = (k + 1) / (n_inner + 1)
        regions.append(lumen_mask & (depth <= (0.1 + 0.5 * t) * edge))
    lumen_index = len(regions)
    regions.append(lumen_mask.copy())
    # outer ERELs: leak outward through one sector, then the whole wall
    for j in range(n_outer):
        t = (j + 1) / n_outer
        reach = 1.0 + 0.35 + 0.5 * t
        half = math.radians(25 + 20 * t)
        leak = _sector(theta, leak_dir, half) & (rho <= reach)
        regions.append(lumen_mask | leak | (artifact_mask & (rho <= reach)))
    regions.append(wall_mask | artifact_mask)

    nested = []
    acc = np.zeros((h, w), dtype=bool)
    for m in regions:
        acc = acc | m
        nested.append(acc.copy())

    sample = FrameSample(
        frame=FrameImage(img),
        erels=[mask_to_coords(m) for m in nested],
        ground_truth=ellipse_contour(lumen, 360),
        category=ARTIFACT_CATEGORY[spec.artifact],
        frame_id=f"synth_{spec.artifact}_{spec.seed}",
        designed_index=lumen_index,
    )
    return sample


def _radius_at(e: Ellipse, phi: float) -> float:
    """Distance from the center to the ellipse border in direction ``phi``."""
    u = math.cos(phi - e.angle)
    v = math.sin(phi - e.angle)
    return 1.0 / math.sqrt((u / e.semi_major) ** 2 + (v / e.semi_minor) ** 2)
