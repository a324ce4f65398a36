"""Traffic-flow characteristics computed from NTXY records."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calibration import TrapConfig


@dataclass
class Track:
    """In-trap observations of one pedestrian, uniformly spaced by ``dt`` slices."""

    pedestrian_number: int
    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    dt: int = 1
    theta_seconds: float = 1.0

    @property
    def t_in(self) -> int:
        return int(self.times[0])

    @property
    def t_out(self) -> int:
        return int(self.times[-1])

    @property
    def rho(self) -> int:
        return len(self.times)

    def position_at(self, t: int):
        i = np.searchsorted(self.times, t)
        if i < len(self.times) and self.times[i] == t:
            return float(self.xs[i]), float(self.ys[i])
        return None


def _runs(times, inside, dt):
    """Maximal index ranges of consecutive in-trap records spaced by ``dt``."""
    runs, start = [], None
    for i, ok in enumerate(inside):
        if ok and start is not None and times[i] - times[i - 1] != dt:
            runs.append((start, i))
            start = None
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(inside)))
    return runs


def build_tracks(records, trap: Optional[TrapConfig], theta_seconds: float) -> list[Track]:
    """Group records into per-pedestrian tracks restricted to the trap.

    Only the longest contiguous in-trap run of each pedestrian is kept
    (earliest on ties) and tracks shorter than two observations are dropped.
    """
    if not theta_seconds > 0:
        raise ValueError("theta_seconds must be positive")
    grouped = defaultdict(list)
    for rec in records:
        grouped[rec.pedestrian_number].append(rec)
    tracks = []
    for ped in sorted(grouped):
        recs = sorted(grouped[ped], key=lambda r: r.time)
        times = [r.time for r in recs]
        steps = [b - a for a, b in zip(times, times[1:])]
        dt = min(steps) if steps else 1
        inside = [trap is None or trap.contains(r.x, r.y) for r in recs]
        runs = _runs(times, inside, dt)
        if not runs:
            continue
        lo, hi = max(runs, key=lambda r: (r[1] - r[0], -r[0]))
        if hi - lo < 2:
            continue
        sel = recs[lo:hi]
        tracks.append(Track(
            ped,
            np.array([r.time for r in sel]),
            np.array([r.x for r in sel], dtype=float),
            np.array([r.y for r in sel], dtype=float),
            dt,
            theta_seconds,
        ))
    return tracks


def step_lengths(track: Track) -> np.ndarray:
    return np.hypot(np.diff(track.xs), np.diff(track.ys))


def individual_speed(track: Track) -> float:
    """Walked path length over elapsed time, in world units per second."""
    if track.rho < 2:
        raise ValueError(f"pedestrian {track.pedestrian_number}: speed needs at least 2 observations")
    elapsed = (track.t_out - track.t_in) * track.theta_seconds
    return float(step_lengths(track).sum()) / elapsed


def speed_profile(track: Track) -> list[tuple[int, float]]:
    """Per-step speed, reported at the later time of each step."""
    per_step = step_lengths(track) / (np.diff(track.times) * track.theta_seconds)
    return list(zip(track.times[1:].tolist(), per_step.tolist()))


def headway_series(track: Track, all_tracks) -> list[tuple[int, float]]:
    """Distance to the nearest other pedestrian at each observed time."""
    series = []
    others = [t for t in all_tracks if t.pedestrian_number != track.pedestrian_number]
    for t, x, y in zip(track.times.tolist(), track.xs, track.ys):
        best = math.inf
        for other in others:
            pos = other.position_at(t)
            if pos is not None:
                best = min(best, math.hypot(pos[0] - x, pos[1] - y))
        if best < math.inf:
            series.append((t, best))
    return series


def direction(track: Track) -> Optional[tuple[float, float]]:
    """Unit vector from first to last observation, None when they coincide."""
    ox, oy = track.xs[-1] - track.xs[0], track.ys[-1] - track.ys[0]
    norm = math.hypot(ox, oy)
    if norm == 0:
        return None
    return float(ox / norm), float(oy / norm)


def line_crossings(tracks, line_y: float, t1: int, t2: int) -> int:
    """Pedestrians whose path crosses ``Y = line_y`` between ``t1`` and ``t2``."""
    count = 0
    for tr in tracks:
        sel = (tr.times >= t1) & (tr.times <= t2)
        side = np.sign(tr.ys[sel] - line_y)
        side = side[side != 0]
        if len(side) > 1 and np.any(side[1:] != side[:-1]):
            count += 1
    return count


@dataclass
class PedestrianStats:
    pedestrian_number: int
    t_in: int
    t_out: int
    rho: int
    speed: float
    direction: Optional[tuple[float, float]]
    headways: list = field(default_factory=list)


@dataclass
class FlowReport:
    t1: int
    t2: int
    kappa: int
    flow_rate: float
    time_mean_speed: Optional[float]
    space_mean_speed: Optional[float]
    stationary: int
    area_module: Optional[float]
    density: Optional[float]
    line_crossings: int
    pedestrians: list = field(default_factory=list)


def flow_report(tracks, trap: TrapConfig, interval, line_y: Optional[float] = None) -> FlowReport:
    """Macroscopic summary over ``interval = (T1, T2)`` in slices.

    Pedestrians count when their in-trap track overlaps the interval.
    Zero-speed pedestrians are left out of the space mean speed and
    reported as ``stationary``.
    """
    t1, t2 = interval
    if not t1 < t2:
        raise ValueError(f"interval must satisfy T1 < T2, got [{t1}, {t2}]")
    present = [tr for tr in tracks if tr.t_in <= t2 and tr.t_out >= t1]
    kappa = len(present)
    if line_y is None:
        line_y = 0.5 * (trap.y_min + trap.y_max)
    crossings = line_crossings(present, line_y, t1, t2)
    if kappa == 0:
        return FlowReport(t1, t2, 0, 0.0, None, None, 0, None, 0.0, crossings, [])

    theta = present[0].theta_seconds
    peds = [
        PedestrianStats(
            tr.pedestrian_number, tr.t_in, tr.t_out, tr.rho,
            individual_speed(tr), direction(tr), headway_series(tr, present),
        )
        for tr in present
    ]
    speeds = [p.speed for p in peds]
    moving = [v for v in speeds if v > 0]
    return FlowReport(
        t1=t1,
        t2=t2,
        kappa=kappa,
        flow_rate=kappa / ((t2 - t1) * theta),
        time_mean_speed=sum(speeds) / kappa,
        space_mean_speed=len(moving) / sum(1.0 / v for v in moving) if moving else None,
        stationary=kappa - len(moving),
        area_module=trap.area / kappa,
        density=kappa / trap.area,
        line_crossings=crossings,
        pedestrians=peds,
    )
