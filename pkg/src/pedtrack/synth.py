"""Synthetic scenes with known trajectories, and scoring against them."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .imaging import ImageStack


@dataclass
class Actor:
    """A flat-colored shape moving along waypoints ``(slice, x, y)``.

    The actor exists from its first to its last waypoint slice; slices in
    ``hidden`` are not drawn (used to fake disappearance).
    """

    shape: str = "disk"
    size: float = 8.0  # disk radius, or rectangle width
    color: tuple[int, int, int] = (200, 40, 40)
    path: list = field(default_factory=list)
    hidden: frozenset = frozenset()
    height: float | None = None  # rectangle height; defaults to size

    def __post_init__(self):
        if self.shape not in ("disk", "rect"):
            raise ValueError(f"unknown actor shape {self.shape!r}")
        if self.size <= 0:
            raise ValueError("actor size must be positive")
        if not self.path:
            raise ValueError("actor needs at least one waypoint")
        self.path = sorted((int(t), float(x), float(y)) for t, x, y in self.path)
        slices = [p[0] for p in self.path]
        if len(set(slices)) != len(slices):
            raise ValueError("duplicate waypoint slice")
        self.hidden = frozenset(int(t) for t in self.hidden)

    @property
    def entry(self) -> int:
        return self.path[0][0]

    @property
    def exit(self) -> int:
        return self.path[-1][0]

    def position(self, t: int):
        if t < self.entry or t > self.exit:
            return None
        for (ta, xa, ya), (tb, xb, yb) in zip(self.path, self.path[1:]):
            if ta <= t <= tb:
                f = (t - ta) / (tb - ta)
                return xa + f * (xb - xa), ya + f * (yb - ya)
        return self.path[0][1], self.path[0][2]


@dataclass
class Scenario:
    width: int = 320
    height: int = 240
    background_color: tuple[int, int, int] = (90, 90, 90)
    actors: list = field(default_factory=list)
    frame_count: int = 30
    seed: int = 0
    noise_amplitude: int = 0
    frame_interval: float = 1.0


@dataclass
class GroundTruth:
    """True (unrounded) centroids per actor; actors are numbered from 1."""

    positions: dict  # actor -> {slice: (x, y)}
    visible: dict  # actor -> set of slices where it was drawn

    def entry(self, actor: int) -> int:
        return min(self.positions[actor])

    def exit(self, actor: int) -> int:
        return max(self.positions[actor])

    def rows(self):
        for a in sorted(self.positions):
            for t in sorted(self.positions[a]):
                x, y = self.positions[a][t]
                yield a, t, x, y, int(t in self.visible[a])


def _paint(img, actor: Actor, cx: float, cy: float) -> None:
    h, w = img.shape[:2]
    cx, cy = round(cx), round(cy)
    if actor.shape == "disk":
        r = actor.size
        y0, y1 = max(0, math.floor(cy - r)), min(h - 1, math.ceil(cy + r))
        x0, x1 = max(0, math.floor(cx - r)), min(w - 1, math.ceil(cx + r))
        if y0 > y1 or x0 > x1:
            return
        yy, xx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
        inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        img[y0:y1 + 1, x0:x1 + 1][inside] = actor.color
    else:
        hw = actor.size / 2
        hh = (actor.height or actor.size) / 2
        y0, y1 = max(0, math.ceil(cy - hh)), min(h - 1, math.floor(cy + hh))
        x0, x1 = max(0, math.ceil(cx - hw)), min(w - 1, math.floor(cx + hw))
        if y0 <= y1 and x0 <= x1:
            img[y0:y1 + 1, x0:x1 + 1] = actor.color


def render_background(s: Scenario) -> np.ndarray:
    img = np.empty((s.height, s.width, 3), dtype=np.uint8)
    img[:] = s.background_color
    return img


def render_scenario(s: Scenario) -> tuple[ImageStack, GroundTruth]:
    """Draw every frame (slices 1..frame_count); later actors paint on top."""
    if s.width <= 0 or s.height <= 0 or s.frame_count < 0:
        raise ValueError("invalid canvas or frame count")
    rng = np.random.default_rng(s.seed)
    base = render_background(s)
    frames = np.empty((s.frame_count, s.height, s.width, 3), dtype=np.uint8)
    positions = {i: {} for i in range(1, len(s.actors) + 1)}
    visible = {i: set() for i in positions}
    for t in range(1, s.frame_count + 1):
        img = base.copy()
        for i, actor in enumerate(s.actors, start=1):
            pos = actor.position(t)
            if pos is None:
                continue
            positions[i][t] = pos
            if t not in actor.hidden:
                _paint(img, actor, *pos)
                visible[i].add(t)
        if s.noise_amplitude:
            a = int(s.noise_amplitude)
            noise = rng.integers(-a, a + 1, size=img.shape)
            img = np.clip(img.astype(np.int16) + noise, 0, 255).astype(np.uint8)
        frames[t - 1] = img
    return ImageStack(frames, s.frame_interval), GroundTruth(positions, visible)


@dataclass
class ScoreReport:
    actors: int
    output_tracks: int
    matched: dict  # actor -> pedestrian number
    identity_rate: float  # percent of actors followed by one number throughout
    centroid_rms: float
    false_positives: int
    false_negatives: int


def score_tracking(output, truth: GroundTruth, match_radius: float = 3.0) -> ScoreReport:
    """Compare NTXY output with ground truth.

    Each (actor, track) pair costs the summed centroid distance over the
    actor's slices, with ``match_radius`` charged wherever the track is
    absent or farther than the radius. Pairs are assigned greedily by
    ascending cost; a pair needs at least one slice within the radius.
    """
    tracks = defaultdict(dict)
    for rec in output:
        tracks[rec.pedestrian_number][rec.time] = (rec.x, rec.y)

    pairs = []
    for a, pos in truth.positions.items():
        for p, tr in tracks.items():
            cost, hits = 0.0, 0
            for t, (x, y) in pos.items():
                q = tr.get(t)
                d = math.hypot(q[0] - x, q[1] - y) if q is not None else math.inf
                if d <= match_radius:
                    cost += d
                    hits += 1
                else:
                    cost += match_radius
            if hits:
                pairs.append((cost, a, p))
    pairs.sort()
    matched: dict[int, int] = {}
    used = set()
    for cost, a, p in pairs:
        if a not in matched and p not in used:
            matched[a] = p
            used.add(p)

    preserved, sq, n = 0, 0.0, 0
    for a, p in matched.items():
        tr = tracks[p]
        whole = True
        for t in truth.visible[a]:
            x, y = truth.positions[a][t]
            q = tr.get(t)
            if q is None:
                whole = False
                continue
            d2 = (q[0] - x) ** 2 + (q[1] - y) ** 2
            sq += d2
            n += 1
            if d2 > match_radius**2:
                whole = False
        preserved += whole
    actors = len(truth.positions)
    return ScoreReport(
        actors=actors,
        output_tracks=len(tracks),
        matched=matched,
        identity_rate=100.0 * preserved / actors if actors else 100.0,
        centroid_rms=math.sqrt(sq / n) if n else 0.0,
        false_positives=len(tracks) - len(used),
        false_negatives=actors - len(matched),
    )
