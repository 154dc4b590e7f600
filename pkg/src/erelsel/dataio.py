"""Dataset manifests, per-frame files, result and report serialization.

File formats
------------
manifest (JSON)::

    {"format": "erelsel-manifest/1",
     "frames": [{"frame_id": "f000",
                 "image": "f000/frame.pgm",          # 8-bit PGM (P5) or PNG
                 "erels": ["f000/erel_00.txt", ...],  # detector order, small to large
                 "ground_truth": "f000/gt.csv",       # optional
                 "category": "no_artifact",           # optional, default "general"
                 "split": "test"}]}                   # optional

Paths are relative to the manifest's directory. An EREL file holds one
``row col`` integer pair per line (blank lines and ``#`` comments are
ignored). A ground-truth file is CSV with ``x,y`` float pairs, optional
header line.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from PIL import Image

from .errors import InputError
from .masks import FrameImage
from .metrics import AggregateReport, FrameEvaluation
from .selection import CATEGORIES, FrameSample, PipelineConfig, SelectionResult
from .synth import SynthSpec, generate_synthetic

logger = logging.getLogger(__name__)

__all__ = [
    "SynthSpec", "dataset_stats", "generate_synthetic", "load_dataset", "read_contour",
    "read_erel", "read_image", "read_report", "read_results", "write_contour",
    "write_dataset", "write_erel", "write_image", "write_plotdata", "write_report",
    "write_results",
]

MANIFEST_FORMAT = "erelsel-manifest/1"
RESULTS_FORMAT = "erelsel-results/1"
REPORT_FORMAT = "erelsel-report/1"
REPORT_COLUMNS = ("category", "split", "selector", "n", "hd_mean", "hd_std", "jm_mean", "jm_std")


def read_image(path) -> FrameImage:
    path = Path(path)
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise InputError(f"{path}: cannot read image ({exc})") from exc
    return FrameImage(arr)


def write_image(path, frame: FrameImage) -> None:
    Image.fromarray(np.asarray(frame.pixels, dtype=np.uint8), mode="L").save(path)


def read_erel(path, shape: Optional[tuple[int, int]] = None) -> np.ndarray:
    """``(N, 2)`` ``(row, col)`` array; with ``shape`` given, points are
    bounds-checked against the ``(height, width)`` canvas."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: EREL file not found")
    pts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            try:
                if len(parts) != 2:
                    raise ValueError
                r, c = int(parts[0]), int(parts[1])
            except ValueError:
                raise InputError(f"{path}:{lineno}: expected 'row col' integers, got {line!r}") from None
            if shape is not None and not (0 <= r < shape[0] and 0 <= c < shape[1]):
                raise InputError(f"{path}:{lineno}: point ({r}, {c}) outside {shape[0]}x{shape[1]} frame")
            pts.append((r, c))
    return np.asarray(pts, dtype=np.int64).reshape(-1, 2)


def write_erel(path, coords) -> None:
    with open(path, "w") as fh:
        for r, c in np.asarray(coords).reshape(-1, 2):
            fh.write(f"{int(r)} {int(c)}\n")


def read_contour(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: ground-truth file not found")
    pts = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            try:
                if len(row) != 2:
                    raise ValueError
                pts.append((float(row[0]), float(row[1])))
            except ValueError:
                if lineno == 1 and not pts:
                    continue  # header
                raise InputError(f"{path}:{lineno}: expected 'x,y' numbers, got {row!r}") from None
    if not pts:
        raise InputError(f"{path}: empty ground-truth contour")
    return np.asarray(pts, dtype=float)


def write_contour(path, points) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for x, y in np.asarray(points, dtype=float).reshape(-1, 2):
            w.writerow([repr(float(x)), repr(float(y))])


def _load_manifest_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: manifest not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("frames", []), list):
        raise InputError(f"{path}: manifest must be an object with a 'frames' list")
    return doc


def load_dataset(manifest_path) -> list[FrameSample]:
    manifest_path = Path(manifest_path)
    doc = _load_manifest_json(manifest_path)
    root = manifest_path.parent
    samples = []
    for k, entry in enumerate(doc.get("frames", [])):
        where = f"{manifest_path}: frames[{k}]"
        try:
            frame_id = str(entry.get("frame_id", f"frame{k:04d}"))
            image_rel, erel_rels = entry["image"], entry["erels"]
        except (KeyError, AttributeError):
            raise InputError(f"{where}: needs 'image' and 'erels'") from None
        frame = read_image(root / image_rel)
        erels = [read_erel(root / e, frame.pixels.shape) for e in erel_rels]
        for rel, pts in zip(erel_rels, erels):
            if len(pts) == 0:
                raise InputError(f"{root / rel}: EREL file has no coordinates")
        gt = entry.get("ground_truth")
        category = entry.get("category") or "general"
        if category not in CATEGORIES:
            logger.warning("%s: unknown category %r, using 'general'", where, category)
            category = "general"
        samples.append(
            FrameSample(
                frame=frame,
                erels=erels,
                ground_truth=read_contour(root / gt) if gt else None,
                category=category,
                frame_id=frame_id,
                split=entry.get("split"),
                designed_index=entry.get("designed_index"),
            )
        )
    return samples


def dataset_stats(samples: Iterable[FrameSample]) -> dict[str, dict]:
    """Frame and EREL counts per split (plus ``all``)."""
    groups: dict[str, list[int]] = {}
    for s in samples:
        for key in ("all", s.split) if s.split else ("all",):
            groups.setdefault(key, []).append(len(s.erels))
    return {
        k: {"frames": len(v), "total_erels": sum(v), "mean_erels": sum(v) / len(v),
            "max_erels": max(v), "min_erels": min(v)}
        for k, v in groups.items()
    }


def write_dataset(out_dir, samples: Iterable[FrameSample], extra: Optional[dict] = None) -> Path:
    """Write samples as image/EREL/contour files plus ``manifest.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = []
    for s in samples:
        fdir = out_dir / s.frame_id
        fdir.mkdir(exist_ok=True)
        write_image(fdir / "frame.pgm", s.frame)
        erels = []
        for i, c in enumerate(s.erels):
            name = f"erel_{i:03d}.txt"
            write_erel(fdir / name, c)
            erels.append(f"{s.frame_id}/{name}")
        entry = {"frame_id": s.frame_id, "image": f"{s.frame_id}/frame.pgm", "erels": erels, "category": s.category}
        if s.ground_truth is not None:
            write_contour(fdir / "gt.csv", s.ground_truth)
            entry["ground_truth"] = f"{s.frame_id}/gt.csv"
        if s.split:
            entry["split"] = s.split
        if s.designed_index is not None:
            entry["designed_index"] = int(s.designed_index)
        frames.append(entry)
    doc = {"format": MANIFEST_FORMAT, **(extra or {}), "frames": frames}
    path = out_dir / "manifest.json"
    _dump_json(path, doc)
    return path


def _dump_json(path, doc) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"{path}: cannot write ({exc.strerror})") from exc


def write_results(path, cfg: PipelineConfig, samples, results) -> None:
    frames = [
        {
            "frame_id": s.frame_id,
            "category": s.category,
            "split": s.split,
            "n_erels": len(s.erels),
            "result": r.to_dict(),
        }
        for s, r in zip(samples, results)
    ]
    _dump_json(path, {"format": RESULTS_FORMAT, "config": cfg.to_dict(), "frames": frames})


def read_results(path) -> tuple[PipelineConfig, dict[str, SelectionResult]]:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
        cfg = PipelineConfig(**doc["config"])
        results = {f["frame_id"]: SelectionResult.from_dict(f["result"]) for f in doc["frames"]}
    except FileNotFoundError:
        raise InputError(f"{path}: results file not found") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed results file ({exc})") from exc
    return cfg, results


def plot_arrays(result: SelectionResult) -> dict:
    """Correlation and compactness curves of one frame, in EREL order."""
    return {
        "correlation": {
            "erel_index": [s.erel_index for s in result.correlation_trace],
            "r": [s.r for s in result.correlation_trace],
        },
        "compactness": {
            "erel_index": [s.erel_index for s in result.compactness_trace],
            "m1": [s.m1 for s in result.compactness_trace],
            "m2": [s.m2 for s in result.compactness_trace],
            "total": [s.total for s in result.compactness_trace],
        },
        "pass1_survivors": list(result.pass1_survivors),
        "chosen_index": result.chosen_index,
    }


def write_report(report: AggregateReport, evals: list[FrameEvaluation], out, fmt: Optional[str] = None,
                 results: Optional[dict[str, SelectionResult]] = None) -> None:
    """Write the aggregate table as CSV, or everything (plus per-frame
    curves when ``results`` is given) as JSON. ``fmt`` defaults to the
    file extension.
    """
    out = Path(out)
    fmt = fmt or ("json" if out.suffix.lower() == ".json" else "csv")
    if fmt == "csv":
        try:
            with open(out, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
                w.writeheader()
                for r in report.rows:
                    w.writerow({k: getattr(r, k) for k in REPORT_COLUMNS})
        except OSError as exc:
            raise OSError(f"{out}: cannot write ({exc.strerror})") from exc
    elif fmt == "json":
        doc = {
            "format": REPORT_FORMAT,
            "aggregate": report.to_dict(),
            "frames": [e.to_dict() for e in evals],
        }
        if results is not None:
            doc["plot_data"] = {fid: plot_arrays(r) for fid, r in results.items()}
        _dump_json(out, doc)
    else:
        raise InputError(f"unknown report format {fmt!r}")


def read_report(path) -> tuple[AggregateReport, list[FrameEvaluation]]:
    with open(path) as fh:
        doc = json.load(fh)
    return (
        AggregateReport.from_dict(doc["aggregate"]),
        [FrameEvaluation(**e) for e in doc["frames"]],
    )


def write_plotdata(out_dir, results: dict[str, SelectionResult]) -> list[Path]:
    """One CSV per frame: erel_index, r, survived, m1, m2, total."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fid, res in results.items():
        comp = {s.erel_index: s for s in res.compactness_trace}
        corr = {s.erel_index: s.r for s in res.correlation_trace}
        survivors = set(res.pass1_survivors)
        path = out_dir / f"{fid}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["erel_index", "r", "pass1", "m1", "m2", "total", "chosen"])
            for i in sorted(set(corr) | set(comp)):
                c = comp.get(i)
                w.writerow([
                    i,
                    corr.get(i, ""),
                    int(i in survivors),
                    "" if c is None else c.m1,
                    "" if c is None else c.m2,
                    "" if c is None else c.total,
                    int(i == res.chosen_index),
                ])
        paths.append(path)
    return paths
