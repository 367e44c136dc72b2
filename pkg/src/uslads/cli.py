"""Command-line front end: generate synthetic targets, run sampling
experiments with CSV/PGM outputs, and score one truth/mask pair."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from time import perf_counter

import numpy as np

from .imaging import (
    Image,
    PgmError,
    generate_dendrite,
    load_image,
    save_image,
)
from .metrics import psnr, random_baseline, ssim
from .sampler import BASELINE_STREAM, SamplerConfig, derive_seed, run_uslads

log = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_size(text: str, parser: argparse.ArgumentParser) -> tuple[int, int]:
    try:
        w, h = (int(part) for part in text.lower().split("x"))
    except ValueError:
        parser.error(f"invalid size {text!r}; expected WxH like 128x128")
    return w, h


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uslads", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an adaptive sampling experiment")
    source = p_run.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", metavar="PATH", help="ground-truth PGM to sample")
    source.add_argument("--generate", metavar="WxH", help="generate a dendrite target instead")
    p_run.add_argument("--arms", type=int, default=4, help="primary arms for --generate")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--initial-ratio", type=float, default=0.05)
    p_run.add_argument("--stop-ratio", type=float, default=0.40)
    p_run.add_argument("--maxiter", type=int, default=10)
    p_run.add_argument("--epsilon", type=int, default=10)
    p_run.add_argument("--max-clusters", type=int, default=10)
    p_run.add_argument("--snapshot-every", type=float, default=0.05)
    p_run.add_argument("--out", metavar="DIR", default="out")
    p_run.add_argument("--baseline", choices=("random", "none"), default="random")
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("generate", help="write a synthetic dendrite PGM")
    p_gen.add_argument("--size", metavar="WxH", required=True)
    p_gen.add_argument("--arms", type=int, default=4)
    p_gen.add_argument("--secondary-rate", type=float, default=0.25)
    p_gen.add_argument("--thickness", type=int, default=3)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("-o", "--output", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_met = sub.add_parser("metrics", help="print ratio,psnr_db,ssim for a truth/mask pair")
    p_met.add_argument("truth", help="ground-truth PGM")
    p_met.add_argument("mask", help="measured-location mask PGM (values 0/255)")
    p_met.set_defaults(func=cmd_metrics)
    return parser


def cmd_generate(args, parser) -> int:
    width, height = _parse_size(args.size, parser)
    if width < 32 or height < 32:
        parser.error(f"size {width}x{height} below the 32x32 minimum")
    if args.arms < 1:
        parser.error("--arms must be at least 1")
    if args.thickness < 1:
        parser.error("--thickness must be at least 1")
    img = generate_dendrite(
        width,
        height,
        n_primary_arms=args.arms,
        secondary_arm_rate=args.secondary_rate,
        arm_thickness=args.thickness,
        seed=args.seed,
    )
    try:
        save_image(img, args.output)
    except OSError as exc:
        print(f"uslads: cannot write {args.output}: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %s (%dx%d)", args.output, width, height)
    return 0


def _snapshot_percent(target_ratio: float) -> int:
    return int(round(target_ratio * 100))


def cmd_run(args, parser) -> int:
    try:
        cfg = SamplerConfig(
            stop_ratio=args.stop_ratio,
            initial_ratio=args.initial_ratio,
            maxiter=args.maxiter,
            epsilon=args.epsilon,
            max_clusters=args.max_clusters,
            seed=args.seed,
            snapshot_every=args.snapshot_every,
        )
    except ValueError as exc:
        parser.error(str(exc))

    if args.input is not None:
        try:
            truth = load_image(args.input)
        except (OSError, PgmError) as exc:
            print(f"uslads: cannot load {args.input}: {exc}", file=sys.stderr)
            return 1
        source = {"kind": "file", "path": str(args.input)}
    else:
        width, height = _parse_size(args.generate, parser)
        if width < 32 or height < 32:
            parser.error(f"size {width}x{height} below the 32x32 minimum")
        if args.arms < 1:
            parser.error("--arms must be at least 1")
        truth = generate_dendrite(width, height, n_primary_arms=args.arms, seed=args.seed)
        source = {"kind": "generated", "width": width, "height": height,
                  "arms": args.arms, "seed": args.seed}

    out_dir = Path(args.out)
    started = perf_counter()
    ms, trace = run_uslads(truth, cfg)
    log.info("adaptive run measured %d pixels (%.4f)", len(ms), ms.ratio())

    rows: list[tuple[str, float, float, float]] = []
    snapshot_files: list[dict] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for snap in trace.snapshots:
            view = Image(np.where(snap.mask, truth.pixels, 0).astype(np.uint8))
            rows.append(("uslads", snap.ratio, psnr(truth, view), ssim(truth, view)))
            files = []
            pct = _snapshot_percent(snap.target_ratio)
            if pct % 10 == 0:
                mask_path = out_dir / f"uslads_{pct:02d}_mask.pgm"
                img_path = out_dir / f"uslads_{pct:02d}_img.pgm"
                save_image(Image(np.where(snap.mask, 255, 0).astype(np.uint8)), mask_path)
                save_image(view, img_path)
                files = [mask_path.name, img_path.name]
            snapshot_files.append(
                {"target_ratio": snap.target_ratio, "ratio": snap.ratio, "files": files}
            )

        if args.baseline == "random":
            baseline_seed = derive_seed(cfg.seed, BASELINE_STREAM)
            for snap in trace.snapshots:
                _, report = random_baseline(truth, snap.target_ratio, baseline_seed)
                rows.append(("random", report.ratio, report.psnr_db, report.ssim))

        rows.sort(key=lambda row: (row[0], row[1]))
        metrics_path = out_dir / "metrics.csv"
        with open(metrics_path, "w") as fh:
            fh.write("method,ratio,psnr_db,ssim\n")
            for method, ratio, psnr_db, ssim_score in rows:
                fh.write(f"{method},{_fmt(ratio)},{_fmt(psnr_db)},{_fmt(ssim_score)}\n")

        timing_path = out_dir / "timing.csv"
        with open(timing_path, "w") as fh:
            fh.write("ratio,elapsed_seconds\n")
            for snap in trace.snapshots:
                fh.write(f"{_fmt(snap.ratio)},{_fmt(snap.elapsed)}\n")

        manifest = {
            "config": {
                "stop_ratio": cfg.stop_ratio,
                "initial_ratio": cfg.initial_ratio,
                "maxiter": cfg.maxiter,
                "epsilon": cfg.epsilon,
                "max_clusters": cfg.max_clusters,
                "seed": cfg.seed,
                "snapshot_every": cfg.snapshot_every,
                "baseline": args.baseline,
            },
            "source": source,
            "out_dir": str(out_dir),
            "snapshots": snapshot_files,
            "csv_files": [metrics_path.name, timing_path.name],
            "final_ratio": ms.ratio(),
            "total_wall_time_seconds": perf_counter() - started,
        }
        with open(out_dir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"uslads: cannot write outputs under {out_dir}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_metrics(args, parser) -> int:
    try:
        truth = load_image(args.truth)
        mask_img = load_image(args.mask)
    except (OSError, PgmError) as exc:
        print(f"uslads: {exc}", file=sys.stderr)
        return 1
    if (truth.height, truth.width) != (mask_img.height, mask_img.width):
        print(
            f"uslads: size mismatch: truth {truth.width}x{truth.height} "
            f"vs mask {mask_img.width}x{mask_img.height}",
            file=sys.stderr,
        )
        return 1
    values = np.unique(mask_img.pixels)
    if not np.isin(values, (0, 255)).all():
        print("uslads: mask values must be 0 or 255", file=sys.stderr)
        return 1
    mask = mask_img.pixels == 255
    view = Image(np.where(mask, truth.pixels, 0).astype(np.uint8))
    ratio = float(mask.sum()) / truth.size
    print(f"{_fmt(ratio)},{_fmt(psnr(truth, view))},{_fmt(ssim(truth, view))}")
    return 0


def main(argv=None) -> int:
    level = _LOG_LEVELS.get(os.environ.get("USLADS_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


def entry() -> None:
    sys.exit(main())
