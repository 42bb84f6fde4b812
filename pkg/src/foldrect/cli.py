"""Command-line interface: rectify, eval, synth, bench.

Exit codes: 0 success (a trivial rectification is a success), 1 bad
input or I/O error, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import statistics
import sys
from pathlib import Path

import cv2

from .imaging import ImageError, load_image, save_image
from .params import DEFAULT_PARAMS, Params, ParamsError

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")


def _params(path) -> Params:
    return Params.from_json(path) if path else DEFAULT_PARAMS


def cmd_rectify(args) -> int:
    from .pipeline import unfold

    try:
        p = _params(args.config)
        img = load_image(args.input)
    except (ImageError, ParamsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        res = unfold(img, p, args.debug_dir)
        save_image(args.output, res.output)
    except (ImageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    t = res.timings
    print(f"{res.status} L={t['L']:.1f}ms T={t['T']:.1f}ms total={t['total']:.1f}ms")
    return 0


def cmd_eval(args) -> int:
    from .evalkit import DatasetError, EvalOptions, OcrClient, evaluate, load_fdi, unfold_rectifier

    try:
        p = _params(args.config)
        records = load_fdi(args.dataset, args.subset, args.scene)
    except (DatasetError, ParamsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ocr = OcrClient(args.ocr_cmd, max_concurrent=args.threads) if args.ocr_cmd else None
    opts = EvalOptions(crop_c=args.crop_c, ocr=ocr, threads=args.threads)
    report = evaluate(records, None if args.no_algo else unfold_rectifier(p), opts)
    try:
        report.write_csv(args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.table())
    return 0


def cmd_synth(args) -> int:
    from . import synth

    out = Path(args.out)
    try:
        for i in range(args.count):
            seed = args.seed + i
            spec = synth.random_spec(seed, args.kind, args.width, args.height, args.curl)
            img, gt = synth.generate(spec)
            ip, _ = synth.write_scene(out, f"scene_{seed:05d}", img, gt)
            print(ip)
    except (synth.SceneError, ImageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def bench_images(paths, reps: int, p: Params = DEFAULT_PARAMS) -> dict:
    """Per-stage samples (ms) of ``reps`` timed runs per image after one untimed pass."""
    from .pipeline import unfold_timed

    imgs = [load_image(x) for x in paths]
    for img in imgs:
        unfold_timed(img, p)
    samples = {"L": [], "T": [], "total": []}
    for _ in range(reps):
        for img in imgs:
            t = unfold_timed(img, p).timings
            for k in samples:
                samples[k].append(t[k])
    return samples


def cmd_bench(args) -> int:
    d = Path(args.dir)
    paths = sorted(x for x in d.iterdir() if x.suffix.lower() in IMAGE_SUFFIXES) if d.is_dir() else []
    if not paths:
        print(f"error: no images in {d}", file=sys.stderr)
        return 1
    if args.reps < 1:
        print("error: --reps must be at least 1", file=sys.stderr)
        return 2
    try:
        s = bench_images(paths, args.reps, _params(args.config))
    except (ImageError, ParamsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{len(paths)} image(s) x {args.reps} rep(s), {len(s['total'])} samples")
    print(f"{'stage':<6} {'mean_ms':>9} {'median_ms':>10}")
    for k in ("L", "T", "total"):
        print(f"{k:<6} {statistics.fmean(s[k]):>9.1f} {statistics.median(s[k]):>10.1f}")
    frac = statistics.fmean(s["T"]) / statistics.fmean(s["total"])
    print(f"T fraction {frac:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="foldrect", description="Rectify photos of documents folded in half.")
    ap.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rectify", help="rectify one image")
    r.add_argument("input")
    r.add_argument("output")
    r.add_argument("--config", help="JSON file overriding parameters")
    r.add_argument("--debug-dir", help="write intermediate products here")
    r.set_defaults(func=cmd_rectify)

    e = sub.add_parser("eval", help="evaluate on an FDI-layout dataset")
    e.add_argument("--dataset", required=True)
    e.add_argument("--subset", choices=("2fold", "3fold", "4fold", "8fold", "all"), default="2fold")
    e.add_argument("--scene", choices=("hand", "table", "all"), default="all")
    e.add_argument("--crop-c", action="store_true", help="crop to the annotated vertices (+20 px) first")
    e.add_argument("--no-algo", action="store_true", help="baseline without rectification")
    e.add_argument("--ocr-cmd", help="OCR command template with {input} and {langs}, e.g. "
                                      "'tesseract {input} stdout -l {langs}'; ED/CER stay empty without it")
    e.add_argument("--config", help="JSON file overriding parameters")
    e.add_argument("--out", required=True, help="CSV report path")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="write synthetic scenes with ground truth")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--curl", type=float, default=0.0)
    s.add_argument("--kind", choices=("twofold", "planar"), default="twofold")
    s.add_argument("--width", type=int, default=720)
    s.add_argument("--height", type=int, default=960)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="time the pipeline on a directory of images")
    b.add_argument("--dir", required=True)
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--config", help="JSON file overriding parameters")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    cv2.setNumThreads(args.threads if args.command == "eval" else 1)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
