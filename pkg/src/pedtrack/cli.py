"""Command-line entry point: ``pedtrack <subcommand> ...``.

Exit codes: 0 success, 1 processing failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import tables
from .calibration import CalibrationError, apply_calibration, fit_calibration
from .config import ConfigError, PipelineConfig, load_scenario
from .detection import build_descriptor_database
from .imaging import ImageError, as_color, load_image_sequence, median_background, read_netpbm, write_netpbm
from .metrics import build_tracks, flow_report, headway_series, speed_profile
from .synth import render_background, render_scenario, score_tracking
from .tracking import label_database, pedestrian_count, trace_stack

log = logging.getLogger("pedtrack")

FRAME_SUFFIXES = (".ppm", ".pgm")


class UsageError(Exception):
    """Bad arguments or unusable input; exit code 2."""


def frame_paths(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"no input frames: {directory} is not a directory")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)
    if not paths:
        raise UsageError(f"no input frames in {directory}")
    return paths


def load_config(args) -> PipelineConfig:
    overrides = {f.name: getattr(args, f.name, None) for f in fields(PipelineConfig)}
    return PipelineConfig.load(args.config, overrides)


def _background(cfg: PipelineConfig, stack):
    if cfg.background == "median":
        return median_background(stack)
    bg = as_color(read_netpbm(cfg.background))
    if bg.shape != stack.frames.shape[1:]:
        raise ImageError(f"{cfg.background}: background size differs from frames")
    return bg


def detect_database(frames_dir, cfg: PipelineConfig):
    stack = load_image_sequence(frame_paths(frames_dir), cfg.frame_interval)
    rows = build_descriptor_database(stack, _background(cfg, stack), cfg.detection_params())
    return stack, rows


def cmd_detect(args) -> int:
    cfg = load_config(args)
    stack, rows = detect_database(args.frames, cfg)
    tables.write_database(args.out, rows, [cfg.provenance()])
    counts = {t: 0 for t in range(1, len(stack) + 1)}
    for row in rows:
        counts[row.slice_number] += 1
    for t, n in counts.items():
        print(f"slice {t}: {n} objects")
    return 0


def cmd_track(args) -> int:
    cfg = load_config(args)
    params = cfg.vote_params()
    if bool(args.db) == bool(args.frames):
        raise UsageError("give exactly one of --db or --frames")
    if args.db:
        rows = tables.read_database(args.db)
        slices = max((r.slice_number for r in rows), default=0)
    else:
        stack, rows = detect_database(args.frames, cfg)
        slices = len(stack)
    records = trace_stack(rows, params)
    if cfg.calibration:
        records = apply_calibration(tables.read_calibration(cfg.calibration), records)
    tables.write_ntxy(args.out, records, [cfg.provenance()])
    if args.annotated_db:
        tables.write_database(args.annotated_db, label_database(rows, params), [cfg.provenance()])
    print(f"pedestrians: {pedestrian_count(records)}, slices: {slices}")
    return 0


def cmd_metrics(args) -> int:
    cfg = load_config(args)
    trap = cfg.trap_config()
    if trap is None:
        raise UsageError("metrics needs a trap rectangle (config key 'trap')")
    records = tables.read_ntxy(args.ntxy)
    if args.interval:
        t1, t2 = args.interval
    elif records:
        t1, t2 = min(r.time for r in records), max(r.time for r in records)
    else:
        t1, t2 = 0, 1
    if not t1 < t2:
        raise UsageError(f"interval must satisfy T1 < T2, got {t1} {t2}")
    tracks = build_tracks(records, trap, cfg.frame_interval)
    report = flow_report(tracks, trap, (t1, t2), cfg.line_y)
    tables.write_flow_report(args.out, report, [cfg.provenance()])
    if args.series_dir:
        out = Path(args.series_dir)
        out.mkdir(parents=True, exist_ok=True)
        tables.write_table(out / "trajectories.csv", ("PedNum", "T", "X", "Y"),
                           ((tr.pedestrian_number, t, x, y) for tr in tracks
                            for t, x, y in zip(tr.times.tolist(), tr.xs.tolist(), tr.ys.tolist())),
                           [cfg.provenance()])
        tables.write_table(out / "speed_profile.csv", ("PedNum", "T", "Speed"),
                           ((tr.pedestrian_number, t, v) for tr in tracks for t, v in speed_profile(tr)),
                           [cfg.provenance()])
        tables.write_table(out / "headways.csv", ("PedNum", "T", "Headway"),
                           ((tr.pedestrian_number, t, h) for tr in tracks for t, h in headway_series(tr, tracks)),
                           [cfg.provenance()])
    print(f"kappa: {report.kappa}, flow rate: {report.flow_rate:.6g} ped/s")
    return 0


def cmd_synth(args) -> int:
    scenario = load_scenario(args.scenario)
    stack, truth = render_scenario(scenario)
    out = Path(args.out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    for t, frame in stack.slices():
        write_netpbm(out / "frames" / f"frame_{t:04d}.ppm", frame)
    write_netpbm(out / "background.ppm", render_background(scenario))
    tables.write_truth(out / "truth.csv", truth)
    print(f"rendered {len(stack)} frames, {len(truth.positions)} actors")
    return 0


def cmd_score(args) -> int:
    score = score_tracking(tables.read_ntxy(args.ntxy), tables.read_truth(args.truth), args.match_radius)
    items = [
        ("actors", score.actors), ("output_tracks", score.output_tracks),
        ("identity_rate", score.identity_rate), ("centroid_rms", score.centroid_rms),
        ("false_positives", score.false_positives), ("false_negatives", score.false_negatives),
    ]
    if args.out:
        tables.write_key_values(args.out, items)
    for k, v in items:
        print(f"{k}: {v}")
    return 0


def cmd_calibrate(args) -> int:
    cal = fit_calibration(tables.read_control_points(args.points))
    tables.write_calibration(args.out, cal)
    print(f"fit residual (rms): {cal.fit_residual:.6g}")
    return 0


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    for f in fields(PipelineConfig):
        p.add_argument(f"--{f.name}", dest=f.name, default=None, metavar="VALUE",
                       help=f"override config key '{f.name}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pedtrack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="frames -> descriptor database")
    _add_config_flags(p)
    p.add_argument("--frames", required=True, help="directory of PGM/PPM frames, ordered by name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("track", help="descriptor database (or frames) -> NTXY")
    _add_config_flags(p)
    p.add_argument("--db")
    p.add_argument("--frames")
    p.add_argument("--out", required=True)
    p.add_argument("--annotated-db", help="also write the database with pedestrian numbers filled")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("metrics", help="NTXY -> flow report")
    _add_config_flags(p)
    p.add_argument("--ntxy", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--interval", nargs=2, type=int, metavar=("T1", "T2"))
    p.add_argument("--series-dir", help="write trajectory, speed-profile and headway series here")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth", help="render a scenario file to frames + truth")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="compare NTXY with ground truth")
    p.add_argument("--ntxy", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--match-radius", type=float, default=3.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("calibrate", help="fit image->world regression from control points")
    p.add_argument("--points", required=True, help="CSV with header Xi,Yi,Xr,Yr")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ImageError, tables.TableError, CalibrationError, FileNotFoundError) as exc:
        print(f"pedtrack {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.debug("processing failure", exc_info=True)
        print(f"pedtrack {args.command}: processing failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
