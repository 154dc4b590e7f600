"""Hausdorff distance, Jaccard measure and per-category aggregation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DegenerateDataError, InputError

STD_MODES = ("population", "sample")
SELECTORS = ("proposed", "gold")


def hausdorff(a, b, spacing: float = 1.0) -> float:
    """Symmetric Hausdorff distance between two point sets, times ``spacing``."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise InputError("Hausdorff distance needs two non-empty contours")
    if not spacing > 0:
        raise InputError(f"spacing must be positive, got {spacing}")
    d = cdist(a, b)
    return float(spacing * max(d.min(axis=1).max(), d.min(axis=0).max()))


def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise InputError(f"mask dimensions differ: {a.shape} vs {b.shape}")
    inter = np.count_nonzero(a & b)
    uni = np.count_nonzero(a | b)
    if uni == 0:
        raise DegenerateDataError("Jaccard measure of two empty masks is undefined")
    return inter / uni


def fill_polygon(points, width: int, height: int) -> np.ndarray:
    """Even-odd fill of a closed ``(x, y)`` polygon, sampled at pixel centers."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    mask = np.zeros((height, width), dtype=bool)
    if len(pts) < 3:
        return mask
    x1, y1 = pts[:, 0], pts[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    cols = np.arange(width, dtype=float)
    r0 = max(0, int(np.floor(y1.min())))
    r1 = min(height - 1, int(np.ceil(y1.max())))
    for r in range(r0, r1 + 1):
        y = float(r)
        hit = ((y1 <= y) & (y < y2)) | ((y2 <= y) & (y < y1))
        if not hit.any():
            continue
        xs = x1[hit] + (y - y1[hit]) * (x2[hit] - x1[hit]) / (y2[hit] - y1[hit])
        xs.sort()
        right = len(xs) - np.searchsorted(xs, cols, side="right")
        mask[r] = (right % 2) == 1
    return mask


@dataclass
class FrameEvaluation:
    frame_id: str
    hd: float
    jm: float
    category: str
    chosen_index: int
    gold_index: int
    gold_hd: float
    gold_jm: float
    split: Optional[str] = None

    def __post_init__(self) -> None:
        if self.hd < 0 or self.gold_hd < 0:
            raise InputError("Hausdorff distance must be non-negative")
        if not (0.0 <= self.jm <= 1.0 and 0.0 <= self.gold_jm <= 1.0):
            raise InputError("Jaccard measure must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AggregateRow:
    category: str
    split: str
    selector: str
    n: int
    hd_mean: float
    hd_std: float
    jm_mean: float
    jm_std: float


@dataclass
class AggregateReport:
    rows: list[AggregateRow] = field(default_factory=list)
    std_mode: str = "population"

    def row(self, category: str = "general", selector: str = "proposed", split: str = "all") -> AggregateRow:
        for r in self.rows:
            if (r.category, r.selector, r.split) == (category, selector, split):
                return r
        raise KeyError((category, selector, split))

    def to_dict(self) -> dict:
        return {"std_mode": self.std_mode, "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "AggregateReport":
        return cls(rows=[AggregateRow(**r) for r in d["rows"]], std_mode=d["std_mode"])


def evaluate_frame(sample, result, spacing: float = 1.0, n_samples: Optional[int] = None) -> FrameEvaluation:
    """Score a selection against the frame's ground-truth contour.

    The gold-standard EREL (minimum Hausdorff distance among all ERELs) is
    scored the same way for comparison.
    """
    from .ellipsefit import DEFAULT_CONTOUR_SAMPLES, ellipse_contour, rasterize_ellipse
    from .selection import gold_standard, region_ellipse

    if sample.ground_truth is None:
        raise InputError(f"{sample.frame_id}: evaluation needs a ground-truth contour")
    n = n_samples or DEFAULT_CONTOUR_SAMPLES
    w, h = sample.frame.width, sample.frame.height
    gt = sample.ground_truth
    gt_mask = fill_polygon(gt, w, h)

    def score(ell):
        hd = hausdorff(ellipse_contour(ell, n), gt, spacing)
        jm = jaccard(rasterize_ellipse(ell, w, h), gt_mask)
        return hd, jm

    hd, jm = score(result.chosen_ellipse)
    gold_index, _ = gold_standard(sample, n, spacing)
    gold_hd, gold_jm = score(region_ellipse(sample.masks()[gold_index]))
    return FrameEvaluation(
        frame_id=sample.frame_id,
        hd=hd,
        jm=jm,
        category=sample.category,
        chosen_index=result.chosen_index,
        gold_index=gold_index,
        gold_hd=gold_hd,
        gold_jm=gold_jm,
        split=sample.split,
    )


def _stats(values, ddof: int) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if len(v) <= ddof:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=ddof))


def aggregate(evals: list[FrameEvaluation], std: str = "population") -> AggregateReport:
    """Mean and standard deviation of HD and JM per category and split.

    Category ``general`` always covers every frame; split ``all`` covers
    every split. Per-split rows appear only when frames carry split labels.
    """
    if not evals:
        raise InputError("nothing to aggregate")
    if std not in STD_MODES:
        raise InputError(f"std must be one of {STD_MODES}, got {std!r}")
    ddof = 0 if std == "population" else 1

    cats = ["general"] + sorted({e.category for e in evals} - {"general"})
    splits = ["all"] + sorted({e.split for e in evals if e.split})
    rows = []
    for cat in cats:
        for split in splits:
            group = [
                e for e in evals
                if (cat == "general" or e.category == cat) and (split == "all" or e.split == split)
            ]
            if not group:
                continue
            for sel in SELECTORS:
                hds = [e.hd if sel == "proposed" else e.gold_hd for e in group]
                jms = [e.jm if sel == "proposed" else e.gold_jm for e in group]
                hd_m, hd_s = _stats(hds, ddof)
                jm_m, jm_s = _stats(jms, ddof)
                rows.append(AggregateRow(cat, split, sel, len(group), hd_m, hd_s, jm_m, jm_s))
    return AggregateReport(rows=rows, std_mode=std)
