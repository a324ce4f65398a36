"""Object detection on binary masks and per-object descriptors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from functools import cached_property

import numpy as np
from scipy import ndimage

from .imaging import DEFAULT_MORPH_RADIUS, DEFAULT_THETA, ImageStack, morph_close_open, subtract_background

MISSING = -1.0

# Chain-code directions as (dx, dy) in image coordinates (y grows downward),
# numbered clockwise starting east.
DIRECTIONS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_DIR_INDEX = {d: i for i, d in enumerate(DIRECTIONS)}

# Order of the descriptor vector used for matching.
DESCRIPTOR_NAMES = (
    "area", "width", "height", "perimeter", "compactness",
    "cg_area_x", "cg_area_y",
    "mean_r", "mean_g", "mean_b", "std_r", "std_g", "std_b",
    "skewness", "kurtosis", "cg_color_x", "cg_color_y",
)


@dataclass
class DetectedObject:
    slice_object_number: int
    xs: np.ndarray
    ys: np.ndarray

    @property
    def area(self) -> int:
        return len(self.xs)

    @property
    def bounding_box(self) -> tuple[int, int, int, int]:
        return int(self.xs.min()), int(self.ys.min()), int(self.xs.max()), int(self.ys.max())

    @property
    def pixel_set(self) -> list[tuple[int, int]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    @cached_property
    def _boundary(self):
        return trace_contour(self)

    @property
    def contour(self) -> list[tuple[int, int]]:
        return self._boundary[0]

    @property
    def chain_code(self) -> list[int]:
        return self._boundary[1]

    def translated(self, dx: int, dy: int) -> "DetectedObject":
        return DetectedObject(self.slice_object_number, self.xs + dx, self.ys + dy)


@dataclass
class FeatureRow:
    """One row of the descriptor database."""

    slice_object_number: int
    pedestrian_number: int
    slice_number: int
    cg_area_x: float
    cg_area_y: float
    area: float
    width: float
    height: float
    perimeter: float
    compactness: float
    mean_r: float
    mean_g: float
    mean_b: float
    std_r: float
    std_g: float
    std_b: float
    skewness: float
    kurtosis: float
    cg_color_x: float
    cg_color_y: float

    @property
    def x(self) -> float:
        return self.cg_area_x

    @property
    def y(self) -> float:
        return self.cg_area_y

    @property
    def features(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in DESCRIPTOR_NAMES)


FEATURE_FIELDS = tuple(f.name for f in fields(FeatureRow))


@dataclass
class DetectionParams:
    theta: float = DEFAULT_THETA
    area_threshold: int = 0
    morph_radius: int = DEFAULT_MORPH_RADIUS


def label_components(mask: np.ndarray) -> list[DetectedObject]:
    """8-connected components, numbered in order of their first raster pixel."""
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return []
    values, first = np.unique(labels.ravel(), return_index=True)
    order = [int(v) for _, v in sorted(zip(first.tolist(), values.tolist())) if v != 0]
    boxes = ndimage.find_objects(labels)
    objects = []
    for number, label in enumerate(order, start=1):
        sy, sx = boxes[label - 1]
        ys, xs = np.nonzero(labels[sy, sx] == label)
        objects.append(DetectedObject(number, xs + sx.start, ys + sy.start))
    return objects


def filter_by_area(objects: list[DetectedObject], area_threshold: int) -> list[DetectedObject]:
    """Drop objects smaller than ``area_threshold`` and renumber the rest 1..m."""
    if area_threshold < 0:
        raise ValueError("area threshold must be >= 0")
    kept = [obj for obj in objects if obj.area >= area_threshold]
    return [DetectedObject(i, obj.xs, obj.ys) for i, obj in enumerate(kept, start=1)]


def trace_contour(obj: DetectedObject) -> tuple[list[tuple[int, int]], list[int]]:
    """Moore-neighbour walk of the outer boundary.

    Starts at the first raster pixel and searches neighbours clockwise,
    stopping when the start pixel is about to be left in its initial
    direction again. Returns the visited boundary pixels (start first,
    closing step omitted) and the chain code of every step, including
    the one back to the start.
    """
    pixels = set(zip(obj.xs.tolist(), obj.ys.tolist()))
    start = min(pixels, key=lambda p: (p[1], p[0]))
    contour = [start]
    codes: list[int] = []

    def step_from(cur, back):
        for i in range(1, 9):
            d = (back + i) % 8
            dx, dy = DIRECTIONS[d]
            if (cur[0] + dx, cur[1] + dy) in pixels:
                return d
        return None

    # The west neighbour of the first raster pixel is never in the object.
    back = 4
    first = step_from(start, back)
    if first is None:
        return contour, codes
    cur, d = start, first
    while True:
        # last background neighbour examined before the hit, seen from the new pixel
        bx, by = DIRECTIONS[(d - 1) % 8]
        prev_bg = (cur[0] + bx, cur[1] + by)
        dx, dy = DIRECTIONS[d]
        cur = (cur[0] + dx, cur[1] + dy)
        codes.append(d)
        back = _DIR_INDEX[(prev_bg[0] - cur[0], prev_bg[1] - cur[1])]
        d = step_from(cur, back)
        if cur == start and d == first:
            break
        contour.append(cur)
    return contour, codes


def chain_length(codes) -> float:
    """Euclidean length of a chain code: 1 per axis step, sqrt(2) per diagonal."""
    odd = sum(c % 2 for c in codes)
    return (len(codes) - odd) + odd * math.sqrt(2.0)


def _moments(values: np.ndarray) -> tuple[float, float, float, float]:
    mean = float(values.mean())
    centred = values - mean
    var = float(np.mean(centred**2))
    if var == 0.0:
        return mean, 0.0, 0.0, 0.0
    std = math.sqrt(var)
    skew = float(np.mean(centred**3)) / std**3
    kurt = float(np.mean(centred**4)) / var**2
    return mean, std, skew, kurt


def compute_features(obj: DetectedObject, frame: np.ndarray, slice_number: int) -> FeatureRow:
    h, w = frame.shape[:2]
    xs, ys = obj.xs, obj.ys
    if xs.min() < 0 or ys.min() < 0 or xs.max() >= w or ys.max() >= h:
        raise IndexError(f"object {obj.slice_object_number} has pixels outside the {w}x{h} frame")
    area = obj.area
    cx, cy = float(xs.mean()), float(ys.mean())
    min_x, min_y, max_x, max_y = obj.bounding_box
    perimeter = chain_length(obj.chain_code)
    compactness = perimeter**2 / (4.0 * math.pi * area) if area > 1 else 0.0

    colors = frame[ys, xs].astype(np.float64)
    if colors.ndim == 1:
        colors = np.repeat(colors[:, None], 3, axis=1)
    stats = [_moments(colors[:, c]) for c in range(3)]
    weight = colors.sum(axis=1)
    total = float(weight.sum())
    if total > 0:
        gx, gy = float(weight @ xs) / total, float(weight @ ys) / total
    else:
        # all-black object: no intensity to weight by
        gx, gy = cx, cy

    return FeatureRow(
        slice_object_number=obj.slice_object_number,
        pedestrian_number=-1,
        slice_number=slice_number,
        cg_area_x=cx,
        cg_area_y=cy,
        area=float(area),
        width=float(max_x - min_x + 1),
        height=float(max_y - min_y + 1),
        perimeter=perimeter,
        compactness=compactness,
        mean_r=stats[0][0],
        mean_g=stats[1][0],
        mean_b=stats[2][0],
        std_r=stats[0][1],
        std_g=stats[1][1],
        std_b=stats[2][1],
        skewness=sum(s[2] for s in stats) / 3.0,
        kurtosis=sum(s[3] for s in stats) / 3.0,
        cg_color_x=gx,
        cg_color_y=gy,
    )


def detect_objects(frame: np.ndarray, background: np.ndarray, params: DetectionParams) -> list[DetectedObject]:
    """Subtract, clean up and label one frame; returns the area-filtered objects."""
    _, mask = subtract_background(frame, background, params.theta)
    mask = morph_close_open(mask, params.morph_radius)
    return filter_by_area(label_components(mask), params.area_threshold)


def detect_frame(frame, background, slice_number: int, params: DetectionParams) -> list[FeatureRow]:
    return [compute_features(obj, frame, slice_number) for obj in detect_objects(frame, background, params)]


def build_descriptor_database(stack: ImageStack, background: np.ndarray, params: DetectionParams | None = None) -> list[FeatureRow]:
    params = params or DetectionParams()
    rows: list[FeatureRow] = []
    for slice_number, frame in stack.slices():
        rows.extend(detect_frame(frame, background, slice_number, params))
    return rows
