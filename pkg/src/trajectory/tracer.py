# time-optimal path recovery from a solved value field
# controls come from the sign of the switching functions on the interpolated gradient:
#   v = -sign(u_x cos(theta) + u_y sin(theta))
#   w = -sign(-d u_x sin(theta) + d u_y cos(theta) + u_theta)
# inside the dead band (or where the gradient is undefined) the recorded sweep controls are used
# a component that would flip and flip back over two steps slides along its switching surface (held at 0)

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from grid.field import (
    INF_THRESHOLD, Config, DomainError, Field3, GradientUndefinedError, GridSpec,
    central_gradient, is_infinite, nearest_node, theta_distance, trilinear_sample,
)
from geometry.collision import is_admissible
from scenario.scene import Scene
from solver.coefficients import ControlPair
from solver.hjb_solver import SolveResult
from trajectory.kinematics import euler_step

logger = logging.getLogger(__name__)


class TrajectoryError(RuntimeError):
    """tracing cannot continue; `sample` is the offending (t, config) pair."""

    def __init__(self, message: str, sample: Optional["TrajectorySample"] = None):
        self.sample = sample
        if sample is not None:
            q = sample.config
            message = f"{message} at t={sample.t:.4f}, q=({q.x:.4f}, {q.y:.4f}, {q.theta:.4f})"
        super().__init__(message)


@dataclass(frozen=True)
class TraceParams:
    dt: float
    goal_tol: float
    theta_tol: float
    max_time_factor: float = 1.5
    dead_band_fraction: float = 1e-3
    use_recorded_controls: bool = False
    sliding: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.goal_tol > 0:
            raise ValueError(f"goal_tol must be > 0, got {self.goal_tol}")
        if not self.theta_tol >= 0:
            raise ValueError(f"theta_tol must be >= 0, got {self.theta_tol}")
        if self.max_time_factor < 1:
            raise ValueError(f"max_time_factor must be >= 1, got {self.max_time_factor}")

    @classmethod
    def for_grid(cls, spec: GridSpec, settings=None, **overrides) -> "TraceParams":
        """defaults scaled to the grid: dt a quarter cell, capture within two cells."""
        if settings is None:
            import config
            settings = config.settings
        values = dict(
            dt=settings.TRACE_DT_FRACTION * min(spec.dx, spec.dy),
            goal_tol=settings.TRACE_GOAL_TOL_CELLS * max(spec.dx, spec.dy),
            theta_tol=settings.TRACE_THETA_TOL_CELLS * spec.dtheta,
            max_time_factor=settings.TRACE_MAX_TIME_FACTOR,
            dead_band_fraction=settings.TRACE_DEAD_BAND_FRACTION,
            sliding=settings.TRACE_SLIDING,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    config: Config
    control: Optional[ControlPair]  # None on the terminal sample


@dataclass
class Trajectory:
    samples: List[TrajectorySample] = field(default_factory=list)
    duration: float = 0.0
    reached_goal: bool = False
    kink_count: int = 0

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def configs(self) -> List[Config]:
        return [s.config for s in self.samples]

    @property
    def v_sequence(self) -> List[int]:
        return [s.control.v if s.control is not None else 0 for s in self.samples]


# control law

def _recorded(fallback: Tuple[np.ndarray, np.ndarray], spec: GridSpec, q: Config) -> Tuple[int, int]:
    v_opt, w_opt = fallback
    node = nearest_node(spec, q)
    return int(v_opt[node]), int(w_opt[node])


def _to_pair(v: int, w: int) -> Optional[ControlPair]:
    if v == 0 and w == 0:
        return None
    return ControlPair(int(v), int(w))


def control_law(u: Field3, q: Config, d: float, fallback: Tuple[np.ndarray, np.ndarray],
                dead_band: float = 0.0) -> Optional[ControlPair]:
    """bang-bang feedback at q; None when neither the gradient nor the record yields a control."""
    rec_v, rec_w = _recorded(fallback, u.spec, q)
    try:
        u_x, u_y, u_t = central_gradient(u, q)
    except (GradientUndefinedError, DomainError):
        return _to_pair(rec_v, rec_w)

    cos_t, sin_t = np.cos(q.theta), np.sin(q.theta)
    v_arg = u_x * cos_t + u_y * sin_t
    w_arg = -d * u_x * sin_t + d * u_y * cos_t + u_t

    v = -int(np.sign(v_arg)) if abs(v_arg) >= dead_band else rec_v
    w = -int(np.sign(w_arg)) if abs(w_arg) >= dead_band else rec_w
    pair = _to_pair(v, w)
    if pair is None:
        return _to_pair(rec_v, rec_w)
    return pair


def sliding_control(pair: ControlPair, next_pair: Optional[ControlPair],
                    after_next: Optional[ControlPair]) -> Optional[ControlPair]:
    """pair with every chattering component set to 0, or None when nothing chatters.

    a component chatters when the law two steps ahead flips it and then flips it back.
    None is also returned when both components chatter, since (0, 0) is not a control.
    """
    if next_pair is None or after_next is None:
        return None
    v = 0 if pair.v and next_pair.v == -pair.v and after_next.v == pair.v else pair.v
    w = 0 if pair.w and next_pair.w == -pair.w and after_next.w == pair.w else pair.w
    if (v, w) == (pair.v, pair.w) or (v == 0 and w == 0):
        return None
    return ControlPair(v, w)


def count_kinks(traj: Union[Trajectory, Iterable[int]]) -> int:
    """strict -1 <-> +1 reversals of v; zeros in between are skipped."""
    v_values = traj.v_sequence if isinstance(traj, Trajectory) else list(traj)
    kinks, last = 0, 0
    for v in v_values:
        if v == 0:
            continue
        if last and v != last:
            kinks += 1
        last = v
    return kinks


def kink_indices(traj: Trajectory) -> List[int]:
    indices, last = [], 0
    for idx, v in enumerate(traj.v_sequence):
        if v == 0:
            continue
        if last and v != last:
            indices.append(idx)
        last = v
    return indices


def waypoint_indices(traj: Trajectory) -> List[int]:
    """start, every direction reversal, and the end."""
    if not traj.samples:
        return []
    return sorted({0, *kink_indices(traj), len(traj.samples) - 1})


def value_decrease_violations(traj: Trajectory, u: Field3, tol: Optional[float] = None) -> List[int]:
    """sample indices n where u(q_{n+1}) exceeds u(q_n) by more than tol (default 2 dt)."""
    samples = traj.samples
    if len(samples) < 2:
        return []
    if tol is None:
        tol = 2.0 * (samples[1].t - samples[0].t)

    values = [trilinear_sample(u, s.config) for s in samples]
    violations = []
    for n in range(len(values) - 1):
        if is_infinite(values[n]) or is_infinite(values[n + 1]):
            continue
        if values[n + 1] > values[n] + tol:
            violations.append(n)
    return violations


def median_gradient_magnitude(u: Field3) -> float:
    """median |grad u| over interior nodes whose neighbours are all finite."""
    spec = u.spec
    data = u.data
    finite = data < INF_THRESHOLD
    ok = finite.copy()
    for axis in (0, 1, 2):
        ok &= np.roll(finite, 1, axis=axis) & np.roll(finite, -1, axis=axis)
    ok[[0, -1], :, :] = False
    ok[:, [0, -1], :] = False
    if not ok.any():
        return 1.0

    clipped = np.where(finite, data, 0.0)
    gx, gy, gt = np.gradient(clipped, spec.dx, spec.dy, spec.dtheta)
    magnitude = np.sqrt(gx ** 2 + gy ** 2 + gt ** 2)[ok]
    return float(np.median(magnitude))


class Tracer:
    """integrates the kinematics under the feedback law of one solved field."""

    def __init__(self, result: SolveResult, scene: Scene):
        self.result = result
        self.scene = scene
        self.spec = result.spec
        self.gradient_scale = median_gradient_magnitude(result.u)
        logger.debug(f"Tracer gradient scale (median |grad u|): {self.gradient_scale:.4g}")

    def control_at(self, q: Config, params: TraceParams) -> Optional[ControlPair]:
        fallback = (self.result.v_opt, self.result.w_opt)
        if params.use_recorded_controls:
            return _to_pair(*_recorded(fallback, self.spec, q))
        return control_law(self.result.u, q, self.scene.car.d, fallback,
                           dead_band=params.dead_band_fraction * self.gradient_scale)

    def _law_ahead(self, q: Config, pair: ControlPair, params: TraceParams) -> Tuple[Config, Optional[ControlPair]]:
        q_next = euler_step(q, pair, self.scene.car, params.dt)
        if not self.spec.contains(q_next.x, q_next.y):
            return q_next, None
        return q_next, self.control_at(q_next, params)

    def slide(self, q: Config, pair: ControlPair,
              params: TraceParams) -> Tuple[ControlPair, Optional[ControlPair]]:
        """(control to apply at q, law at the next sample when that control is pair itself)."""
        q1, p1 = self._law_ahead(q, pair, params)
        flips = p1 is not None and ((pair.v and p1.v == -pair.v) or (pair.w and p1.w == -pair.w))
        if not flips:
            return pair, p1
        _, p2 = self._law_ahead(q1, p1, params)
        sliding = sliding_control(pair, p1, p2)
        if sliding is None:
            return pair, p1
        return sliding, None

    def captured(self, q: Config, params: TraceParams) -> bool:
        goal = self.scene.goal
        return (np.hypot(q.x - goal.x, q.y - goal.y) <= params.goal_tol
                and theta_distance(q.theta, goal.theta) <= params.theta_tol)

    def _check(self, sample: TrajectorySample):
        q = sample.config
        if not self.spec.contains(q.x, q.y):
            raise TrajectoryError("Trajectory left the domain", sample)
        if not is_admissible(self.scene.car, self.scene.obstacles, q):
            raise TrajectoryError("Trajectory became inadmissible (grid too coarse?)", sample)

    def integrate(self, start: Config, params: TraceParams) -> Trajectory:
        car = self.scene.car
        first = TrajectorySample(0.0, start, None)
        self._check(first)

        u_start = trilinear_sample(self.result.u, start)
        if is_infinite(u_start):
            raise TrajectoryError("Start is unreachable (u is INF)", first)
        t_max = params.max_time_factor * u_start

        samples: List[TrajectorySample] = []
        q = start
        step = 0
        reached = False
        ahead: Optional[ControlPair] = None
        slid = 0
        while True:
            t = step * params.dt
            if self.captured(q, params):
                samples.append(TrajectorySample(t, q, None))
                reached = True
                break
            if t > t_max:
                samples.append(TrajectorySample(t, q, None))
                break

            pair = ahead if ahead is not None else self.control_at(q, params)
            ahead = None
            if pair is None:
                raise TrajectoryError("No control could be resolved", TrajectorySample(t, q, None))
            if params.sliding:
                applied, ahead = self.slide(q, pair, params)
                slid += applied != pair
                pair = applied
            samples.append(TrajectorySample(t, q, pair))

            q = euler_step(q, pair, car, params.dt)
            step += 1
            self._check(TrajectorySample(step * params.dt, q, None))

        traj = Trajectory(samples=samples, duration=samples[-1].t, reached_goal=reached)
        traj.kink_count = count_kinks(traj)
        if slid:
            logger.debug(f"Held a chattering control at 0 on {slid} steps")

        if reached:
            logger.info(f"Trajectory reached the goal: T={traj.duration:.4f} (u(start)={u_start:.4f}), "
                        f"{len(samples)} samples, {traj.kink_count} kinks")
        else:
            logger.warning(f"Trajectory did not reach the goal within {t_max:.4f} "
                           f"({params.max_time_factor}x u(start))")
        return traj


def integrate(result: SolveResult, scene: Scene, start: Config, params: Optional[TraceParams] = None) -> Trajectory:
    params = params or TraceParams.for_grid(result.spec)
    return Tracer(result, scene).integrate(start, params)
