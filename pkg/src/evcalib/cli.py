"""Command line front end: ``evcalib simulate|calibrate|evaluate|classify``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import calib
from .core import DEFAULT_TOL_B, DEFAULT_TOL_C, CalibrationMap, PixelClass, classify_map
from .ingest import load_dataset, load_frames, read_calibration_map, write_calibration_map, write_events
from .pgm import write_pgm
from .reconstruct import evaluate
from .simulate import SimConfig, SpecialPixelSpec, inject_special_pixels, simulate_events

log = logging.getLogger("evcalib")

INDEX_NAME = "images.txt"
CLASS_GRAY = {PixelClass.NOMINAL: 0, PixelClass.HOT: 60, PixelClass.COLD: 120,
              PixelClass.WARM: 180, PixelClass.COOL: 240}
HIST_BINS = 50


class CliError(Exception):
    pass


def _index_path(path: str) -> Path:
    p = Path(path)
    if p.is_dir():
        p = p / INDEX_NAME
    if not p.exists():
        raise CliError(f"no such video/image index: {path}")
    return p


def _existing(path: str | None, what: str) -> str | None:
    if path is not None and not Path(path).exists():
        raise CliError(f"{what} not found: {path}")
    return path


def cmd_simulate(args) -> int:
    frames = load_frames(_index_path(args.video))
    if len(frames) < 2:
        raise CliError(f"need at least 2 frames, found {len(frames)}")
    h, w = frames[0].shape
    if args.map:
        cmap = read_calibration_map(_existing(args.map, "calibration map"))
    else:
        cmap = CalibrationMap.uniform(w, h, args.nominal_c, 0.0)
        if args.special:
            spec = SpecialPixelSpec.parse(Path(_existing(args.special, "special-pixel spec")).read_text())
            cmap = inject_special_pixels(cmap, spec, args.nominal_c)
    stream = simulate_events(frames, cmap, SimConfig(refractory=args.refractory))
    n = write_events(args.out, stream)
    print(f"events {n}")
    return 0


def _write_report(path: Path, report) -> None:
    path.write_text("\n".join(report.lines()) + "\n")


def cmd_calibrate(args) -> int:
    out = Path(args.out)
    events = _existing(args.events, "event file")
    images = _index_path(args.images) if args.images else None
    if args.algorithm in ("offei", "onei") and images is None:
        raise CliError(f"{args.algorithm} needs intensity frames (--images)")
    if args.algorithm == "offe" and events is None:
        raise CliError("offe needs an event file (--events)")
    ds = load_dataset(events, images, args.width, args.height)
    if ds.report and ds.report.out_of_range:
        log.warning("%d events lie outside the frame time span", ds.report.out_of_range)

    if args.algorithm == "offei":
        cfg = calib.OffEiConfig(d=args.d, fallback_c=args.fallback_c, fallback_b=args.fallback_b,
                                min_rows=args.min_rows, min_events=args.min_events or 2)
        cmap, report = calib.calibrate_offei(ds, cfg)
    elif args.algorithm == "offe":
        if len(ds.stream) == 0:
            raise CliError("offe needs events, the event file is empty")
        cfg = calib.OffEConfig(min_events=args.min_events or 10,
                               fallback_c=args.fallback_c, fallback_b=args.fallback_b,
                               r_floor=args.r_floor, c_scale=args.c_scale)
        cmap, report = calib.calibrate_offe(ds.stream, cfg)
    else:
        cfg = calib.OnEiConfig(big_capacity=args.big_capacity, small_capacity=args.small_capacity,
                               filter_alpha=args.alpha, fallback_c=args.fallback_c,
                               fallback_b=args.fallback_b, min_rows=args.min_rows,
                               min_events=args.min_events or 2)
        cal, snapshots = calib.run_online(ds, cfg)
        snap_dir = out.with_name(out.name + ".snapshots")
        snap_dir.mkdir(parents=True, exist_ok=True)
        lines = []
        for i, (ts, m) in enumerate(snapshots):
            name = f"{i:05d}.txt"
            write_calibration_map(m, snap_dir / name)
            lines.append(f"{ts!r} {name}\n")
        (snap_dir / "snapshots.txt").write_text("".join(lines))
        if not snapshots:
            log.warning("buffer never filled: %d events buffered, capacity %d",
                        cal.buffered_events, cfg.big_capacity)
        cmap, report = cal.estimate, cal.report()
        print(f"snapshots {len(snapshots)}")
    write_calibration_map(cmap, out)
    _write_report(Path(args.report) if args.report else out.with_name(out.name + ".report.txt"), report)
    print(f"degenerate {report.degenerate_count} of {report.reason.size}")
    return 0


def cmd_evaluate(args) -> int:
    events = _existing(args.events, "event file")
    ds = load_dataset(events, _index_path(args.images))
    h, w = ds.shape
    if args.uniform is not None:
        cmap = CalibrationMap.uniform(w, h, args.uniform, 0.0)
    else:
        cmap = read_calibration_map(_existing(args.map, "calibration map"))
    every = args.every_events if args.cadence == "events" else None
    rows = evaluate(list(ds.frames), ds.stream, cmap, window=args.window,
                    every_events=every, skip=args.skip)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = []
    for row in rows:
        write_pgm(out / f"recon_{row.index:05d}.pgm", row.image)
        table.append(row.line() + "\n")
    (out / "metrics.txt").write_text("".join(table))
    if rows:
        mean = np.mean([[r.metrics.rmse, r.metrics.psnr, r.metrics.ssim] for r in rows], axis=0)
        print(f"rows {len(rows)} mean_rmse {mean[0]:.4f} mean_psnr {mean[1]:.4f} mean_ssim {mean[2]:.4f}")
    else:
        print("rows 0")
    return 0


def histogram_lines(name: str, values: np.ndarray, bins: int = HIST_BINS) -> list[str]:
    counts, edges = np.histogram(values, bins=bins)
    out = [f"# {name} {bins} bins"]
    out += [f"{lo:.9f} {hi:.9f} {n}" for lo, hi, n in zip(edges[:-1], edges[1:], counts)]
    return out


def cmd_classify(args) -> int:
    cmap = read_calibration_map(_existing(args.map, "calibration map"))
    classes = classify_map(cmap, args.nominal_c, args.tol_c, args.tol_b)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"{k.name.lower()} {int((classes == k).sum())}" for k in PixelClass]
    (out / "counts.txt").write_text("\n".join(lines) + "\n")
    gray = np.zeros(classes.shape, dtype=np.uint8)
    for k, g in CLASS_GRAY.items():
        gray[classes == k] = g
    write_pgm(out / "classes.pgm", gray)
    hist = histogram_lines("c", cmap.c.ravel()) + histogram_lines("b", cmap.b.ravel())
    (out / "histogram.txt").write_text("\n".join(hist) + "\n")
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evcalib", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate events from an intensity video")
    s.add_argument("--video", required=True, help="directory with images.txt, or an image index file")
    s.add_argument("--map", help="calibration map file")
    s.add_argument("--nominal-c", type=float, default=0.1)
    s.add_argument("--special", help="special-pixel spec: lines 'x y class magnitude'")
    s.add_argument("--refractory", type=float, default=0.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("calibrate", help="estimate per-pixel thresholds and biases")
    c.add_argument("algorithm", choices=["offei", "onei", "offe"])
    c.add_argument("--events")
    c.add_argument("--images", help="image index file or directory containing images.txt")
    c.add_argument("--width", type=int)
    c.add_argument("--height", type=int)
    c.add_argument("--out", required=True)
    c.add_argument("--report")
    c.add_argument("--d", type=int, default=40)
    c.add_argument("--fallback-c", type=float, default=0.1)
    c.add_argument("--fallback-b", type=float, default=0.0)
    c.add_argument("--min-rows", type=int, default=2)
    c.add_argument("--min-events", type=int, default=None)
    c.add_argument("--big-capacity", type=int, default=1_700_000)
    c.add_argument("--small-capacity", type=int, default=200_000)
    c.add_argument("--alpha", type=float, default=0.1)
    c.add_argument("--r-floor", type=float, default=1e-6)
    c.add_argument("--c-scale", type=float, default=1.0)
    c.set_defaults(func=cmd_calibrate)

    e = sub.add_parser("evaluate", help="reconstruct by direct integration and score against frames")
    e.add_argument("--events")
    e.add_argument("--images", required=True)
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--map")
    g.add_argument("--uniform", type=float, metavar="C0")
    e.add_argument("--cadence", choices=["frame", "events"], default="frame")
    e.add_argument("--window", type=int, default=1, help="frames per window (frame cadence)")
    e.add_argument("--every-events", type=int, default=500_000)
    e.add_argument("--skip", type=float, default=5.0, help="seconds excluded at the start")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    k = sub.add_parser("classify", help="label hot/cold/warm/cool pixels of a map")
    k.add_argument("--map", required=True)
    k.add_argument("--nominal-c", type=float, default=0.1)
    k.add_argument("--tol-c", type=float, default=DEFAULT_TOL_C)
    k.add_argument("--tol-b", type=float, default=DEFAULT_TOL_B)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_classify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
