"""Detected-object count over a grid of subtraction and area thresholds.

Renders a noisy synthetic stack (or reads a frame directory) and prints a
CSV table: one row per theta, one column per area threshold. Near an
actor's contrast, noise can split a blob and push the count up; the
default demo keeps such cases so they are visible.

    python scripts/threshold_sweep.py --noise 3 --seed 1
    python scripts/threshold_sweep.py --frames run/frames --background run/background.ppm
"""
import argparse
import csv
import sys

import numpy as np

from pedtrack.cli import frame_paths
from pedtrack.detection import DetectionParams, detect_objects
from pedtrack.imaging import as_color, load_image_sequence, median_background, read_netpbm
from pedtrack.synth import Actor, Scenario, render_background, render_scenario


def demo_stack(noise, seed):
    rng = np.random.default_rng(seed)
    actors = []
    for i in range(6):
        y = 30 + 35 * i
        x0, x1 = (20, 300) if i % 2 else (300, 20)
        # contrasts 8, 17, 26, ... on one channel so theta has something to cut
        color = [90, 90, 90]
        color[i % 3] += 8 + 9 * i
        actors.append(Actor(size=float(rng.integers(4, 15)), color=tuple(color), path=[(1, x0, y), (40, x1, y)]))
    s = Scenario(actors=actors, frame_count=40, noise_amplitude=noise, seed=seed)
    stack, _ = render_scenario(s)
    return stack, render_background(s)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", help="frame directory (default: synthetic demo stack)")
    ap.add_argument("--background", help="background image (default: clean render or temporal median)")
    ap.add_argument("--noise", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--thetas", type=int, nargs="+", default=list(range(0, 55, 5)))
    ap.add_argument("--areas", type=int, nargs="+", default=list(range(0, 550, 50)))
    ap.add_argument("--morph-radius", type=int, default=1)
    args = ap.parse_args(argv)

    if args.frames:
        stack = load_image_sequence(frame_paths(args.frames))
        bg = as_color(read_netpbm(args.background)) if args.background else median_background(stack)
    else:
        stack, bg = demo_stack(args.noise, args.seed)

    out = csv.writer(sys.stdout)
    out.writerow(["theta"] + [f"area>={a}" for a in args.areas])
    for theta in args.thetas:
        row = []
        for area in args.areas:
            params = DetectionParams(theta=theta, area_threshold=area, morph_radius=args.morph_radius)
            row.append(sum(len(detect_objects(f, bg, params)) for _, f in stack.slices()))
        out.writerow([theta] + row)


if __name__ == "__main__":
    main()
