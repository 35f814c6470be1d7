# car parameters and the rectangular footprint C(x, y, theta)
# the rectangle is 2d long (along the heading) and 2R wide, centred on (x, y)

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from grid.field import Config

# corner order in the car frame: rear-right, front-right, front-left, rear-left (ccw)
_CORNER_SIGNS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class CarParams:
    R: float
    d: float
    W: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"CarParams.R must be > 0, got {self.R}")
        if not self.d >= 0:
            raise ValueError(f"CarParams.d must be >= 0, got {self.d}")
        if not self.W > 0:
            raise ValueError(f"CarParams.W must be > 0, got {self.W}")

    @property
    def turning_radius(self) -> float:
        return 1.0 / self.W

    def to_dict(self) -> dict:
        return {"R": self.R, "d": self.d, "W": self.W}


@dataclass(frozen=True)
class Footprint:
    corners: np.ndarray  # (4, 2), counterclockwise

    @property
    def center(self) -> Tuple[float, float]:
        c = self.corners.mean(axis=0)
        return (float(c[0]), float(c[1]))


def corner_offsets(params: CarParams, theta: float) -> np.ndarray:
    """rotated corner offsets from the centre, shape (4, 2)."""
    half = _CORNER_SIGNS * np.array([params.d, params.R])
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    rot = np.array([[cos_t, -sin_t], [sin_t, cos_t]])
    return half @ rot.T


def footprint(params: CarParams, q: Config) -> Footprint:
    return Footprint(corners=np.array([q.x, q.y]) + corner_offsets(params, q.theta))
