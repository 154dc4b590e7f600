"""Raster geometry on the frame canvas.

Conventions: coordinates are zero-based ``(row, col)``; masks are boolean
arrays of shape ``(height, width)`` covering the whole frame, never a
cropped bounding box.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDataError, InputError


@dataclass(frozen=True)
class FrameImage:
    """Grayscale IVUS frame, intensities in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] == 0 or px.shape[1] == 0:
            raise InputError(f"frame must be a non-empty 2-D array, got shape {px.shape}")
        if px.size and (px.min() < 0 or px.max() > 255):
            raise InputError("frame intensities must lie in [0, 255]")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class GrayMask:
    """A region together with the frame intensities of its member pixels.

    ``values`` follows row-major order of the member pixels.
    """

    mask: np.ndarray
    values: np.ndarray

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    def as_image(self) -> np.ndarray:
        """Full-canvas float image; non-member pixels read as 0."""
        img = np.zeros(self.mask.shape, dtype=float)
        img[self.mask] = self.values
        return img


def canonical_coords(coords: Iterable[Sequence[int]]) -> np.ndarray:
    """Sorted, de-duplicated ``(N, 2)`` integer array of ``(row, col)`` pairs."""
    arr = np.asarray(list(coords) if not isinstance(coords, np.ndarray) else coords)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f"coordinates must be (row, col) pairs, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise InputError("coordinates must be integers")
        arr = arr.astype(np.int64)
    return np.unique(arr.astype(np.int64), axis=0)


def _check_bounds(pts: np.ndarray, width: int, height: int) -> None:
    bad = (pts[:, 0] < 0) | (pts[:, 0] >= height) | (pts[:, 1] < 0) | (pts[:, 1] >= width)
    if bad.any():
        r, c = pts[np.argmax(bad)]
        raise InputError(
            f"coordinate ({int(r)}, {int(c)}) outside {height}x{width} canvas (rows x cols)"
        )


def rasterize(coords, width: int, height: int) -> np.ndarray:
    """Boolean mask with exactly the listed pixels set. Duplicates collapse."""
    if width <= 0 or height <= 0:
        raise InputError(f"canvas must be non-empty, got {height}x{width}")
    pts = canonical_coords(coords)
    _check_bounds(pts, width, height)
    mask = np.zeros((height, width), dtype=bool)
    mask[pts[:, 0], pts[:, 1]] = True
    return mask


def mask_to_coords(mask: np.ndarray) -> np.ndarray:
    return np.argwhere(mask)


def extract_gray(coords, frame: FrameImage) -> GrayMask:
    mask = rasterize(coords, frame.width, frame.height)
    return GrayMask(mask=mask, values=frame.pixels[mask].astype(float))


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InputError(f"mask dimensions differ: {a.shape} vs {b.shape}")


def intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _same_shape(a, b)
    return np.logical_and(a, b)


def union(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _same_shape(a, b)
    return np.logical_or(a, b)


def area(a: np.ndarray) -> int:
    return int(np.count_nonzero(a))


def mean_intensity(g: GrayMask) -> float:
    if g.values.size == 0:
        raise DegenerateDataError("mean intensity of an empty region is undefined")
    return float(np.mean(g.values))
