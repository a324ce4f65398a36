"""Linear image-to-world regression and the pedestrian trap."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class Calibration:
    """``X_r = u + v*X_i + w*Y_i`` and ``Y_r = x0 + y0*X_i + z0*Y_i``."""

    u: float
    v: float
    w: float
    x0: float
    y0: float
    z0: float
    fit_residual: float = 0.0

    def apply(self, x, y):
        return self.u + self.v * x + self.w * y, self.x0 + self.y0 * x + self.z0 * y

    def inverse(self, xr, yr):
        det = self.v * self.z0 - self.w * self.y0
        if det == 0:
            raise CalibrationError("calibration is not invertible")
        dx, dy = xr - self.u, yr - self.x0
        return (self.z0 * dx - self.w * dy) / det, (self.v * dy - self.y0 * dx) / det

    @classmethod
    def identity(cls) -> "Calibration":
        return cls(0.0, 1.0, 0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class TrapConfig:
    """Axis-aligned world rectangle; pedestrians flow along Y."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError(f"degenerate trap rectangle {self}")

    @property
    def length(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


def fit_calibration(control_points) -> Calibration:
    """Least-squares fit from ``[((xi, yi), (xr, yr)), ...]``."""
    pts = np.asarray(control_points, dtype=float).reshape(-1, 4)
    if len(pts) < 3:
        raise CalibrationError(f"need at least 3 control points, got {len(pts)}")
    design = np.column_stack([np.ones(len(pts)), pts[:, 0], pts[:, 1]])
    if np.linalg.matrix_rank(design) < 3:
        raise CalibrationError("control points are collinear in image coordinates (rank-deficient design)")
    coef, *_ = np.linalg.lstsq(design, pts[:, 2:], rcond=None)
    err = design @ coef - pts[:, 2:]
    rms = float(np.sqrt(np.mean(np.sum(err**2, axis=1))))
    (u, x0), (v, y0), (w, z0) = coef.tolist()
    return Calibration(u, v, w, x0, y0, z0, rms)


def apply_calibration(cal: Calibration, records) -> list:
    out = []
    for rec in records:
        x, y = cal.apply(rec.x, rec.y)
        out.append(replace(rec, x=x, y=y))
    return out
