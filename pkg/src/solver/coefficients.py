# control candidates and precomputed upwind coefficients
# A_k = v cos(theta_k) - w W d sin(theta_k), B_k = v sin(theta_k) + w W d cos(theta_k)
# a_k = sign(A_k), b_k = sign(B_k); the update uses |A_k| and |B_k| as weights

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from grid.field import GridSpec, grid_axes
from geometry.footprint import CarParams

# |A|, |B| below this are round-off (e.g. sin(pi)) and snapped to exactly zero
COEFF_SNAP = 1e-12


@dataclass(frozen=True)
class ControlPair:
    v: int
    w: int

    def __post_init__(self):
        if self.v not in (-1, 0, 1) or self.w not in (-1, 0, 1):
            raise ValueError(f"Control components must be in {{-1, 0, 1}}, got ({self.v}, {self.w})")
        if self.v == 0 and self.w == 0:
            raise ValueError("(0, 0) is not an admissible control pair")

    def as_tuple(self) -> Tuple[int, int]:
        return (self.v, self.w)


# fixed enumeration order; the argmin keeps the first minimum in this order
CONTROL_SET: List[ControlPair] = [
    ControlPair(1, 0),
    ControlPair(-1, 0),
    ControlPair(1, 1),
    ControlPair(1, -1),
    ControlPair(-1, 1),
    ControlPair(-1, -1),
    ControlPair(0, 1),
    ControlPair(0, -1),
]


@dataclass
class CoeffTable:
    """per (k, control) upwind data; arrays are shaped (K, n_controls)."""
    A: np.ndarray
    B: np.ndarray
    a: np.ndarray
    b: np.ndarray
    # per control: theta weight |w| W / dtheta and theta offset sign(w)
    theta_weight: np.ndarray
    theta_offset: np.ndarray
    controls: List[ControlPair]
    dx: float
    dy: float

    @property
    def x_weight(self) -> np.ndarray:
        return np.abs(self.A) / self.dx

    @property
    def y_weight(self) -> np.ndarray:
        return np.abs(self.B) / self.dy

    @property
    def control_v(self) -> np.ndarray:
        return np.array([c.v for c in self.controls], dtype=np.int8)

    @property
    def control_w(self) -> np.ndarray:
        return np.array([c.w for c in self.controls], dtype=np.int8)


def _snap(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    out[np.abs(out) < COEFF_SNAP] = 0.0
    return out


def precompute_coeffs(params: CarParams, spec: GridSpec,
                      control_set: Sequence[ControlPair] = CONTROL_SET) -> CoeffTable:
    controls = list(control_set)
    if not controls:
        raise ValueError("control_set must not be empty")

    _, _, thetas = grid_axes(spec)
    v = np.array([c.v for c in controls], dtype=np.float64)[None, :]
    w = np.array([c.w for c in controls], dtype=np.float64)[None, :]
    cos_t = np.cos(thetas)[:, None]
    sin_t = np.sin(thetas)[:, None]
    wd = params.W * params.d

    A = _snap(v * cos_t - w * wd * sin_t)
    B = _snap(v * sin_t + w * wd * cos_t)

    return CoeffTable(
        A=A,
        B=B,
        a=np.sign(A).astype(np.int64),
        b=np.sign(B).astype(np.int64),
        theta_weight=np.abs(w[0]) * params.W / spec.dtheta,
        theta_offset=np.sign(w[0]).astype(np.int64),
        controls=controls,
        dx=spec.dx,
        dy=spec.dy,
    )

