"""Pass-1 correlation scoring and pass-2 compactness scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InputError
from .masks import GrayMask, area, intersect, mean_intensity


@dataclass(frozen=True)
class CorrelationScore:
    erel_index: int
    r: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", float(self.r))
        if not -1.0 <= self.r <= 1.0:
            raise InputError(f"correlation must be in [-1, 1], got {self.r}")


@dataclass(frozen=True)
class CompactnessScore:
    erel_index: int
    m1: float
    m2: float

    def __post_init__(self) -> None:
        for name in ("m1", "m2"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise InputError(f"{name} must be in [0, 1], got {v}")
            object.__setattr__(self, name, v)

    @property
    def total(self) -> float:
        return self.m1 + self.m2


def approximate_lumen(last: GrayMask) -> np.ndarray:
    """Pixels of the last (largest) EREL darker than its mean intensity.

    Raises DegenerateDataError when nothing is strictly below the mean,
    e.g. for a uniform region.
    """
    thr = mean_intensity(last)
    out = np.zeros_like(last.mask)
    rows, cols = np.nonzero(last.mask)
    dark = last.values < thr
    out[rows[dark], cols[dark]] = True
    if not out.any():
        raise DegenerateDataError("no pixel below the mean intensity of the last EREL")
    return out


def corr2(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two equally sized images over every pixel."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"image dimensions differ: {a.shape} vs {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    saa = float(np.sum(da * da))
    sbb = float(np.sum(db * db))
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateDataError("correlation with a constant image is undefined")
    r = float(np.sum(da * db)) / np.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))


def pass1_filter(scores: list[CorrelationScore]) -> list[int]:
    """Indices whose correlation reaches the mean correlation (inclusive)."""
    if not scores:
        raise InputError("no correlation scores to filter")
    rs = np.array([s.r for s in scores])
    thr = rs.mean()
    keep = [s.erel_index for s in scores if s.r >= thr]
    if not keep:
        # float rounding of the mean can exceed every member when all r are equal
        best = max(s.r for s in scores)
        keep = [s.erel_index for s in scores if s.r == best]
    return keep


def compactness(region: np.ndarray, ellipse_mask: np.ndarray, erel_index: int = 0) -> CompactnessScore:
    """Overlap of a (dilated) region with its fitted ellipse raster.

    m1 is the overlap over the ellipse area, m2 the overlap over the region area.
    """
    ov = area(intersect(region, ellipse_mask))
    ae, ar = area(ellipse_mask), area(region)
    if ae == 0 or ar == 0:
        raise DegenerateDataError("compactness needs non-empty region and ellipse")
    return CompactnessScore(erel_index=erel_index, m1=ov / ae, m2=ov / ar)
