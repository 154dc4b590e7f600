"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .dataio import (
    load_dataset,
    read_results,
    write_dataset,
    write_plotdata,
    write_report,
    write_results,
)
from .ellipsefit import DEFAULT_CONTOUR_SAMPLES
from .errors import DegenerateDataError, InputError
from .metrics import STD_MODES, aggregate, evaluate_frame
from .morphology import DEFAULT_DILATE_RADIUS
from .selection import CORR_MODES, PipelineConfig, gold_standard, select
from .synth import ARTIFACTS, SynthSpec, generate_synthetic

logger = logging.getLogger("erelsel")


def _manifest_spacing(path) -> float:
    with open(path) as fh:
        return float(json.load(fh).get("spacing", 1.0))


def cmd_select(args) -> int:
    cfg = PipelineConfig(
        dilate_radius=args.dilate_radius,
        k_maxima=args.k_maxima,
        corr_mode=args.corr_mode,
        contour_samples=args.contour_samples,
    )
    samples = load_dataset(args.manifest)
    if args.jobs > 1:
        # frames are independent; map keeps manifest order, so output is unchanged
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(select, samples, [cfg] * len(samples), chunksize=8))
    else:
        results = [select(s, cfg) for s in samples]
    for s, r in zip(samples, results):
        logger.debug("%s: chose EREL %d of %d", s.frame_id, r.chosen_index, len(s.erels))
    write_results(args.out, cfg, samples, results)
    logger.info("selected %d frames -> %s", len(samples), args.out)
    return 0


def cmd_evaluate(args) -> int:
    samples = load_dataset(args.manifest)
    cfg, results = read_results(args.results)
    spacing = args.spacing if args.spacing is not None else _manifest_spacing(args.manifest)
    evals = []
    for s in samples:
        if s.ground_truth is None:
            logger.warning("%s: no ground truth, skipped", s.frame_id)
            continue
        if s.frame_id not in results:
            raise InputError(f"{args.results}: no result for frame {s.frame_id}")
        evals.append(evaluate_frame(s, results[s.frame_id], spacing, cfg.contour_samples))
    if not evals:
        raise InputError(f"{args.manifest}: no frame with ground truth to evaluate")
    report = aggregate(evals, std=args.std)
    write_report(report, evals, args.out, args.format, results={e.frame_id: results[e.frame_id] for e in evals})
    g = report.row("general", "proposed")
    logger.info("general: HD %.4f (%.2f)  JM %.4f (%.2f)  n=%d", g.hd_mean, g.hd_std, g.jm_mean, g.jm_std, g.n)
    return 0


def cmd_synth(args) -> int:
    samples = []
    for i in range(args.frames):
        spec = SynthSpec(seed=args.seed + i, width=args.size, height=args.size, artifact=args.artifact)
        samples.append(generate_synthetic(spec))
    extra = {
        "synthetic": {
            "seed": args.seed,
            "artifact": args.artifact,
            "levels": {"lumen": spec.lumen_level, "wall": spec.wall_level,
                       "background": spec.background_level, "noise": spec.noise},
        }
    }
    path = write_dataset(args.out, samples, extra)
    logger.info("wrote %d synthetic frames -> %s", len(samples), path)
    return 0


def cmd_gold(args) -> int:
    samples = load_dataset(args.manifest)
    spacing = args.spacing if args.spacing is not None else _manifest_spacing(args.manifest)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame_id", "category", "split", "n_erels", "gold_index", "gold_hd"])
        for s in samples:
            if s.ground_truth is None:
                logger.warning("%s: no ground truth, skipped", s.frame_id)
                continue
            idx, hds = gold_standard(s, args.contour_samples, spacing)
            w.writerow([s.frame_id, s.category, s.split or "", len(s.erels), idx, hds[idx]])
    return 0


def cmd_plotdata(args) -> int:
    _, results = read_results(args.results)
    paths = write_plotdata(args.out, results)
    logger.info("wrote %d curve files -> %s", len(paths), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="erelsel", description="Two-pass EREL selection for IVUS lumen segmentation")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("select", parents=[common], help="choose the lumen EREL of every frame")
    s.add_argument("--manifest", required=True)
    s.add_argument("--dilate-radius", type=int, default=DEFAULT_DILATE_RADIUS)
    s.add_argument("--k-maxima", type=int, default=2)
    s.add_argument("--corr-mode", choices=CORR_MODES, default="binary")
    s.add_argument("--contour-samples", type=int, default=DEFAULT_CONTOUR_SAMPLES)
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--out", required=True, help="results JSON")
    s.set_defaults(func=cmd_select)

    e = sub.add_parser("evaluate", parents=[common], help="HD/JM report against ground truth")
    e.add_argument("--manifest", required=True)
    e.add_argument("--results", required=True)
    e.add_argument("--spacing", type=float, default=None,
                   help="physical size of one pixel (default: manifest 'spacing' or 1.0)")
    e.add_argument("--std", choices=STD_MODES, default="population")
    e.add_argument("--format", choices=("csv", "json"), default=None, help="default: from --out extension")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    y = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--frames", type=int, default=10)
    y.add_argument("--artifact", choices=ARTIFACTS, default="none")
    y.add_argument("--size", type=int, default=128)
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)

    g = sub.add_parser("gold", parents=[common], help="gold-standard EREL per frame (minimum HD)")
    g.add_argument("--manifest", required=True)
    g.add_argument("--spacing", type=float, default=None)
    g.add_argument("--contour-samples", type=int, default=DEFAULT_CONTOUR_SAMPLES)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gold)

    d = sub.add_parser("plotdata", parents=[common], help="per-frame correlation/compactness curves as CSV")
    d.add_argument("--results", required=True)
    d.add_argument("--out", required=True, help="output directory")
    d.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"erelsel: error: {exc}", file=sys.stderr)
        return 1
    except DegenerateDataError as exc:
        print(f"erelsel: degenerate data: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
