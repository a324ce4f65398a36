"""Identity survival versus the length of a disappearance.

A single disk is hidden for k consecutive slices mid-scene; for each k and
each max_gap setting, report whether it keeps one pedestrian number and the
worst interpolation error over the hidden slices.
"""
import argparse
import math

from pedtrack.detection import DetectionParams, build_descriptor_database
from pedtrack.synth import Actor, Scenario, render_background, render_scenario
from pedtrack.tracking import VoteParams, trace_stack


def run(hidden_len, max_gap, speed_threshold, step):
    start = 12
    hidden = set(range(start, start + hidden_len))
    actor = Actor(size=8, color=(220, 60, 60), path=[(1, 30.0, 120.0), (30, 30.0 + 29 * step, 120.0)], hidden=hidden)
    s = Scenario(actors=[actor], frame_count=30)
    stack, truth = render_scenario(s)
    db = build_descriptor_database(stack, render_background(s), DetectionParams())
    recs = trace_stack(db, VoteParams(speed_threshold, max_gap=max_gap))
    peds = {r.pedestrian_number for r in recs}
    pos = {r.time: (r.x, r.y) for r in recs}
    errs = [math.dist(pos[t], truth.positions[1][t]) for t in hidden if t in pos]
    return len(peds), max(errs) if errs else float("nan")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-gaps", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--hidden", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--speed-threshold", type=float, default=10.0)
    ap.add_argument("--step", type=float, default=6.0, help="disk speed in px/slice")
    args = ap.parse_args(argv)
    print("max_gap,hidden,pedestrians,max_interp_error_px")
    for g in args.max_gaps:
        for k in args.hidden:
            n, err = run(k, g, args.speed_threshold, args.step)
            print(f"{g},{k},{n},{err:.3f}")


if __name__ == "__main__":
    main()
