"""Two-pass EREL selection.

Pass 1 keeps the ERELs whose correlation with an approximate lumen region
(the dark part of the last EREL) reaches the mean correlation. Pass 2 dilates
each survivor, fits an ellipse to it and ranks survivors by ellipse
compactness, choosing among the first local maxima of that curve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .ellipsefit import DEFAULT_CONTOUR_SAMPLES, Ellipse, ellipse_contour, fit_region, rasterize_ellipse
from .errors import DegenerateDataError, InputError
from .masks import FrameImage, canonical_coords, extract_gray, rasterize
from .metrics import hausdorff
from .morphology import DEFAULT_DILATE_RADIUS, dilate, disk
from .scoring import (
    CompactnessScore,
    CorrelationScore,
    approximate_lumen,
    compactness,
    corr2,
    pass1_filter,
)

logger = logging.getLogger(__name__)

CATEGORIES = ("general", "no_artifact", "bifurcation", "side_vessels", "shadow")
CORR_MODES = ("binary", "gray")


@dataclass(frozen=True)
class PipelineConfig:
    dilate_radius: int = DEFAULT_DILATE_RADIUS
    k_maxima: int = 2
    corr_mode: str = "binary"
    contour_samples: int = DEFAULT_CONTOUR_SAMPLES

    def __post_init__(self) -> None:
        if self.dilate_radius < 0:
            raise InputError("dilate_radius must be >= 0")
        if self.k_maxima < 1:
            raise InputError("k_maxima must be >= 1")
        if self.corr_mode not in CORR_MODES:
            raise InputError(f"corr_mode must be one of {CORR_MODES}, got {self.corr_mode!r}")
        if self.contour_samples < 3:
            raise InputError("contour_samples must be >= 3")

    def to_dict(self) -> dict:
        return {
            "dilate_radius": self.dilate_radius,
            "k_maxima": self.k_maxima,
            "corr_mode": self.corr_mode,
            "contour_samples": self.contour_samples,
        }


@dataclass
class FrameSample:
    frame: FrameImage
    erels: list
    ground_truth: Optional[np.ndarray] = None
    category: str = "general"
    frame_id: str = "frame"
    split: Optional[str] = None
    # known lumen EREL, only for generated frames
    designed_index: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.erels:
            raise InputError(f"{self.frame_id}: a frame needs at least one EREL")
        if self.category not in CATEGORIES:
            raise InputError(f"{self.frame_id}: unknown category {self.category!r}")
        self.erels = [canonical_coords(c) for c in self.erels]
        for i, c in enumerate(self.erels):
            if len(c) == 0:
                raise InputError(f"{self.frame_id}: EREL {i} is empty")
        if self.ground_truth is not None:
            gt = np.asarray(self.ground_truth, dtype=float).reshape(-1, 2)
            if len(gt) == 0:
                raise InputError(f"{self.frame_id}: empty ground-truth contour")
            self.ground_truth = gt

    def masks(self) -> list[np.ndarray]:
        return [rasterize(c, self.frame.width, self.frame.height) for c in self.erels]


@dataclass
class SelectionResult:
    chosen_index: int
    chosen_ellipse: Ellipse
    correlation_trace: list[CorrelationScore] = field(default_factory=list)
    compactness_trace: list[CompactnessScore] = field(default_factory=list)
    pass1_survivors: list[int] = field(default_factory=list)
    fallback_used: bool = False
    fallback_reason: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "chosen_index": self.chosen_index,
            "chosen_ellipse": self.chosen_ellipse.to_dict(),
            "correlation_trace": [{"erel_index": s.erel_index, "r": s.r} for s in self.correlation_trace],
            "compactness_trace": [
                {"erel_index": s.erel_index, "m1": s.m1, "m2": s.m2, "total": s.total}
                for s in self.compactness_trace
            ],
            "pass1_survivors": list(self.pass1_survivors),
            "fallback_used": self.fallback_used,
            "fallback_reason": self.fallback_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionResult":
        return cls(
            chosen_index=int(d["chosen_index"]),
            chosen_ellipse=Ellipse.from_dict(d["chosen_ellipse"]),
            correlation_trace=[CorrelationScore(int(s["erel_index"]), float(s["r"])) for s in d["correlation_trace"]],
            compactness_trace=[
                CompactnessScore(int(s["erel_index"]), float(s["m1"]), float(s["m2"]))
                for s in d["compactness_trace"]
            ],
            pass1_survivors=[int(i) for i in d["pass1_survivors"]],
            fallback_used=bool(d["fallback_used"]),
            fallback_reason=d.get("fallback_reason"),
        )


def local_maxima(values) -> list[int]:
    """Interior indices strictly greater than both neighbours."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return []
    mid = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    return [int(i) + 1 for i in np.flatnonzero(mid)]


def choose_position(totals, k_maxima: int = 2) -> int:
    """Position in ``totals`` picked by the local-maxima rule.

    Best total among the first ``k_maxima`` local maxima; without any local
    maximum, the global maximum. Ties go to the earliest position.
    """
    totals = list(totals)
    if not totals:
        raise InputError("no compactness totals to choose from")
    cands = local_maxima(totals)[:k_maxima] or list(range(len(totals)))
    best = cands[0]
    for i in cands[1:]:
        if totals[i] > totals[best]:
            best = i
    return best


def region_ellipse(mask: np.ndarray) -> Ellipse:
    """Ellipse representing an EREL's border: fit to the hole-filled region."""
    return fit_region(ndimage.binary_fill_holes(mask))[0]


def _correlations(sample: FrameSample, masks, lumen: np.ndarray, mode: str) -> list[CorrelationScore]:
    if mode == "gray":
        px = sample.frame.pixels.astype(float)
        ref = np.where(lumen, px, 0.0)
    else:
        ref = lumen
    scores = []
    for i, m in enumerate(masks):
        img = np.where(m, px, 0.0) if mode == "gray" else m
        try:
            r = corr2(img, ref)
        except DegenerateDataError:
            # a constant EREL image (full canvas) carries no spatial information
            r = 0.0
        scores.append(CorrelationScore(i, r))
    return scores


def select(sample: FrameSample, cfg: PipelineConfig = PipelineConfig()) -> SelectionResult:
    masks = sample.masks()

    fallback_reason = None
    corr_trace: list[CorrelationScore] = []
    try:
        lumen = approximate_lumen(extract_gray(sample.erels[-1], sample.frame))
        if cfg.corr_mode == "gray" and not np.any(np.where(lumen, sample.frame.pixels, 0)):
            raise DegenerateDataError("gray approximate lumen is constant")
        corr_trace = _correlations(sample, masks, lumen, cfg.corr_mode)
        if all(s.r <= 0 for s in corr_trace):
            fallback_reason = "no positive correlation"
    except DegenerateDataError as exc:
        fallback_reason = f"approximate lumen extraction failed: {exc}"

    if fallback_reason is None:
        survivors = pass1_filter(corr_trace)
    else:
        logger.info("%s: %s; ranking all ERELs by compactness", sample.frame_id, fallback_reason)
        survivors = list(range(len(masks)))

    se = disk(cfg.dilate_radius)
    h, w = masks[0].shape
    comp_trace = []
    for i in survivors:
        grown = dilate(masks[i], se)
        ell, _ = fit_region(grown)
        try:
            score = compactness(grown, rasterize_ellipse(ell, w, h), erel_index=i)
        except DegenerateDataError:
            # fitted ellipse fell off the canvas
            score = CompactnessScore(i, 0.0, 0.0)
        comp_trace.append(score)

    pos = choose_position([s.total for s in comp_trace], cfg.k_maxima)
    chosen = survivors[pos]
    return SelectionResult(
        chosen_index=chosen,
        chosen_ellipse=region_ellipse(masks[chosen]),
        correlation_trace=corr_trace,
        compactness_trace=comp_trace,
        pass1_survivors=survivors,
        fallback_used=fallback_reason is not None,
        fallback_reason=fallback_reason,
    )


def gold_standard(sample: FrameSample, n_samples: int = DEFAULT_CONTOUR_SAMPLES, spacing: float = 1.0):
    """Index of the EREL whose ellipse is closest (Hausdorff) to the ground
    truth, and the per-EREL distances. Ties go to the lower index.
    """
    if sample.ground_truth is None:
        raise InputError(f"{sample.frame_id}: gold standard needs a ground-truth contour")
    hds = [
        hausdorff(ellipse_contour(region_ellipse(m), n_samples), sample.ground_truth, spacing)
        for m in sample.masks()
    ]
    return int(np.argmin(hds)), hds


def gold_standard_index(sample: FrameSample, n_samples: int = DEFAULT_CONTOUR_SAMPLES) -> int:
    return gold_standard(sample, n_samples)[0]
