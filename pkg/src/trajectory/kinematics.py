# car kinematics: x' = v cos(theta) - w W d sin(theta), y' = v sin(theta) + w W d cos(theta), theta' = w W
# forward euler with the control held constant over the step (shared by tracer and oracle)

import math
from typing import Tuple

import numpy as np

from grid.field import Config
from geometry.footprint import CarParams
from solver.coefficients import ControlPair


def velocity_components(cos_t, sin_t, pair: ControlPair, car: CarParams):
    """(x', y', theta') from cos/sin of the heading; scalars or numpy arrays."""
    wd = pair.w * car.W * car.d
    return (
        pair.v * cos_t - wd * sin_t,
        pair.v * sin_t + wd * cos_t,
        pair.w * car.W,
    )


def velocity(q: Config, pair: ControlPair, car: CarParams) -> Tuple[float, float, float]:
    return velocity_components(math.cos(q.theta), math.sin(q.theta), pair, car)


def euler_step(q: Config, pair: ControlPair, car: CarParams, dt: float) -> Config:
    vx, vy, vt = velocity(q, pair, car)
    # Config re-normalizes theta into [0, 2pi)
    return Config(q.x + dt * vx, q.y + dt * vy, q.theta + dt * vt)


def euler_steps(x: np.ndarray, y: np.ndarray, theta: np.ndarray, pair: ControlPair, car: CarParams,
                h, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """n euler steps of size h (scalar or per element) over arrays of configurations; theta is not wrapped."""
    for _ in range(n):
        vx, vy, vt = velocity_components(np.cos(theta), np.sin(theta), pair, car)
        x, y, theta = x + h * vx, y + h * vy, theta + h * vt
    return x, y, theta
