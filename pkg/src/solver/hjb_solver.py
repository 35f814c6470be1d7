# minimum travel time to the goal by monotone upwind gauss-seidel sweeping
# u starts at INF everywhere except the goal node (0); each outer iteration runs
# the 8 alternating index orders until the sup-norm change drops below eps
# boundary nodes (i in {0, I}, j in {0, J}) and blocked nodes are never updated

import time
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from grid.field import (
    INF, Config, Field3, GridSpec, node_to_config, nearest_node, theta_distance,
)
from geometry.collision import is_admissible
from geometry.footprint import CarParams
from geometry.mask import AdmissibilityMask, build_mask
from scenario.scene import Scene
from solver.coefficients import CONTROL_SET, CoeffTable, ControlPair, precompute_coeffs
from solver.kernels import kernel_arrays, local_update_kernel, sweep_kernel

logger = logging.getLogger(__name__)

Node = Tuple[int, int, int]
Direction = Tuple[int, int, int]

# fixed gray-code-like order; it changes the iteration count, never the fixed point
SWEEP_DIRECTIONS: List[Direction] = [
    (1, 1, 1),
    (1, 1, -1),
    (1, -1, -1),
    (1, -1, 1),
    (-1, -1, 1),
    (-1, -1, -1),
    (-1, 1, -1),
    (-1, 1, 1),
]


class ConfigurationError(ValueError):
    """goal outside the domain, inadmissible, or on a node the solver cannot seed."""


@dataclass(frozen=True)
class SolverParams:
    eps: float = 1e-6
    max_outer: int = 500
    control_set: Tuple[ControlPair, ...] = tuple(CONTROL_SET)
    reach_ceiling: float = 1e6
    strict_containment: bool = False
    goal_offgrid_warn: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "control_set", tuple(self.control_set))
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")
        if not self.control_set:
            raise ValueError("control_set must not be empty")
        if any(not isinstance(c, ControlPair) for c in self.control_set):
            raise ValueError("control_set entries must be ControlPair instances")
        if not 0 < self.reach_ceiling < INF:
            raise ValueError(f"reach_ceiling must lie in (0, INF), got {self.reach_ceiling}")

    @classmethod
    def from_settings(cls, settings=None, **overrides) -> "SolverParams":
        if settings is None:
            import config
            settings = config.settings
        values = dict(
            eps=settings.SOLVER_EPS,
            max_outer=settings.SOLVER_MAX_OUTER,
            reach_ceiling=settings.SOLVER_REACH_CEILING,
            strict_containment=settings.MASK_STRICT_CONTAINMENT,
            goal_offgrid_warn=settings.GOAL_OFFGRID_WARN,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class SolveResult:
    u: Field3
    v_opt: np.ndarray
    w_opt: np.ndarray
    outer_iterations: int
    final_residual: float
    converged: bool
    goal: Config
    goal_node: Node
    car: CarParams
    params: SolverParams
    residual_history: List[float] = field(default_factory=list)
    mask: Optional[AdmissibilityMask] = None
    obstacle_digest: bytes = b""

    def __post_init__(self):
        # shared between concurrent tracers; nobody writes after the solve
        for arr in (self.u.data, self.v_opt, self.w_opt):
            arr.setflags(write=False)

    @property
    def spec(self) -> GridSpec:
        return self.u.spec

    @property
    def walls(self) -> np.ndarray:
        blocked = self.mask.blocked if self.mask is not None else np.zeros(self.spec.shape, dtype=bool)
        return wall_mask(self.spec, blocked)

    def reachable_fraction(self) -> float:
        return float(self.u.finite_mask().mean())

    def summary(self) -> Dict:
        spec = self.spec
        return {
            "grid": {"I": spec.I, "J": spec.J, "K": spec.K,
                     "bounds": [spec.a, spec.b, spec.c, spec.dlim]},
            "car": self.car.to_dict(),
            "turning_radius": self.car.turning_radius,
            "goal": list(self.goal.as_tuple()),
            "goal_node": list(self.goal_node),
            "eps": self.params.eps,
            "outer_iterations": self.outer_iterations,
            "final_residual": self.final_residual,
            "converged": self.converged,
            "reachable_fraction": self.reachable_fraction(),
            "blocked_fraction": self.mask.blocked_fraction if self.mask is not None else 0.0,
        }


def wall_mask(spec: GridSpec, blocked: np.ndarray) -> np.ndarray:
    """blocked nodes plus the spatial boundary layer."""
    walls = np.array(blocked, dtype=bool, copy=True)
    if walls.shape != spec.shape:
        raise ValueError(f"Blocked mask shape {walls.shape} != grid shape {spec.shape}")
    walls[0, :, :] = True
    walls[-1, :, :] = True
    walls[:, 0, :] = True
    walls[:, -1, :] = True
    return walls


def _values(u) -> np.ndarray:
    return u.data if isinstance(u, Field3) else u


def local_update(u, coeffs: CoeffTable, node: Node, pair: ControlPair,
                 walls: Optional[np.ndarray] = None) -> float:
    """upwind value at one node for one control pair; INF when the pair leads into a wall."""
    data = _values(u)
    if pair not in coeffs.controls:
        raise ValueError(f"{pair} is not part of the coefficient table")
    if walls is None:
        walls = np.zeros(data.shape, dtype=bool)
    i, j, k = node
    if not (0 < i < data.shape[0] - 1 and 0 < j < data.shape[1] - 1):
        raise IndexError(f"local_update needs an interior node, got {node}")

    x_w, x_off, y_w, y_off, t_w, t_off = kernel_arrays(coeffs)
    return float(local_update_kernel(
        np.ascontiguousarray(data, dtype=np.float64), np.ascontiguousarray(walls, dtype=np.bool_),
        i, j, k % data.shape[2], coeffs.controls.index(pair),
        x_w, x_off, y_w, y_off, t_w, t_off,
    ))


def sweep(u: np.ndarray, v_opt: np.ndarray, w_opt: np.ndarray, walls: np.ndarray,
          coeffs: CoeffTable, direction: Direction, ceiling: float = INF) -> float:
    """one in-place gauss-seidel pass; returns the largest pointwise decrease."""
    if direction not in SWEEP_DIRECTIONS:
        raise ValueError(f"Sweep direction must be a (+-1, +-1, +-1) triple, got {direction}")
    for name, arr in (("u", u), ("v_opt", v_opt), ("w_opt", w_opt), ("walls", walls)):
        if not arr.flags.c_contiguous:
            raise ValueError(f"{name} must be C-contiguous for in-place sweeping")

    x_w, x_off, y_w, y_off, t_w, t_off = kernel_arrays(coeffs)
    di, dj, dk = direction
    return float(sweep_kernel(
        u, v_opt, w_opt, walls, x_w, x_off, y_w, y_off, t_w, t_off,
        coeffs.control_v, coeffs.control_w, di, dj, dk, float(ceiling),
    ))


def outer_residuals(previous: np.ndarray, u: np.ndarray, walls: np.ndarray,
                    ceiling: float) -> Tuple[float, float]:
    """(sup-norm decrease of min(u, ceiling), max relative decrease among nodes that started above it).

    the first term ignores how fast sentinel-fed nodes fall; the second keeps the
    outer loop running while any of them is still moving toward a real value.
    """
    clipped = float(np.max(np.minimum(previous, ceiling) - np.minimum(u, ceiling)))
    high = (previous >= ceiling) & ~walls
    if not high.any():
        return clipped, 0.0
    leak = float(np.max((previous[high] - u[high]) / previous[high]))
    return clipped, leak


def seed_goal_node(scene: Scene, spec: GridSpec, mask: AdmissibilityMask, sp: SolverParams) -> Node:
    goal = scene.goal
    if not spec.contains(goal.x, goal.y):
        raise ConfigurationError(f"Goal ({goal.x}, {goal.y}) lies outside the domain")
    if not is_admissible(scene.car, scene.obstacles, goal):
        raise ConfigurationError(f"Goal {goal.as_tuple()} is inadmissible: car footprint hits an obstacle")

    node = nearest_node(spec, goal)
    if spec.is_boundary(node[0], node[1]):
        raise ConfigurationError(f"Goal node {node} lies on the domain boundary, which is never updated")
    if mask.blocked[node]:
        raise ConfigurationError(f"Goal node {node} is blocked on this grid; refine the grid")

    snapped = node_to_config(spec, *node)
    offset = max(abs(goal.x - snapped.x), abs(goal.y - snapped.y), theta_distance(goal.theta, snapped.theta))
    if offset > sp.goal_offgrid_warn:
        logger.warning(f"Goal {goal.as_tuple()} is {offset:.3g} off-grid; seeding nearest node {node}")
    return node


def solve(scene: Scene, spec: GridSpec, sp: Optional[SolverParams] = None,
          on_iteration: Optional[Callable[[int, float, np.ndarray], None]] = None) -> SolveResult:
    sp = sp or SolverParams()
    start = time.time()

    mask = build_mask(scene.car, scene.obstacles, spec, strict_containment=sp.strict_containment)
    goal_node = seed_goal_node(scene, spec, mask, sp)
    coeffs = precompute_coeffs(scene.car, spec, sp.control_set)
    walls = wall_mask(spec, mask.blocked)

    u = np.full(spec.shape, INF, dtype=np.float64)
    u[goal_node] = 0.0
    v_opt = np.zeros(spec.shape, dtype=np.int8)
    w_opt = np.zeros(spec.shape, dtype=np.int8)

    logger.info(f"Solving on {spec.I}x{spec.J}x{spec.K} grid ({spec.size:,} nodes), "
                f"{len(coeffs.controls)} controls, eps={sp.eps:g}, max_outer={sp.max_outer}")

    history: List[float] = []
    converged = False
    residual = float("inf")
    for n in range(1, sp.max_outer + 1):
        previous = u.copy()
        for direction in SWEEP_DIRECTIONS:
            change = sweep(u, v_opt, w_opt, walls, coeffs, direction, sp.reach_ceiling)
            logger.debug(f"  sweep {direction}: max change {change:.3e}")

        clipped, leak = outer_residuals(previous, u, walls, sp.reach_ceiling)
        residual = max(clipped, leak)
        history.append(residual)
        logger.info(f"Outer iteration {n}: residual {clipped:.3e}, above-ceiling decrease {leak:.3e}")
        if on_iteration is not None:
            on_iteration(n, residual, u.copy())
        if residual < sp.eps:
            converged = True
            break

    # whatever never dropped below the ceiling was only fed by the sentinel
    leaked = (u >= sp.reach_ceiling) & ~walls
    u[leaked] = INF
    v_opt[leaked] = 0
    w_opt[leaked] = 0

    if not converged:
        logger.warning(f"Solver stopped at the iteration cap ({sp.max_outer}) with residual {residual:.3e}")
    logger.info(f"Solve finished in {time.time() - start:.1f}s after {len(history)} outer iterations "
                f"(converged={converged}, reachable {float((u < sp.reach_ceiling).mean()):.2%})")

    return SolveResult(
        u=Field3(spec, u),
        v_opt=v_opt,
        w_opt=w_opt,
        outer_iterations=len(history),
        final_residual=residual,
        converged=converged,
        goal=scene.goal,
        goal_node=goal_node,
        car=scene.car,
        params=sp,
        residual_history=history,
        mask=mask,
        obstacle_digest=scene.obstacle_digest(),
    )


# diagnostics

def fixed_point_defect(result: SolveResult, nodes: Iterable[Node]) -> np.ndarray:
    """how much one more local minimization would still lower u at each node (0 at a fixed point)."""
    coeffs = precompute_coeffs(result.car, result.spec, result.params.control_set)
    walls = result.walls
    data = result.u.data
    defects = []
    for node in nodes:
        if walls[node] or data[node] >= INF:
            defects.append(0.0)
            continue
        best = min(local_update(data, coeffs, node, pair, walls) for pair in coeffs.controls)
        defects.append(max(0.0, data[node] - best))
    return np.array(defects, dtype=np.float64)


def pi_periodicity_gap(u: Field3, other: Optional[Field3] = None) -> float:
    """max |u(x, y, theta + pi) - other(x, y, theta)| over interior nodes finite in both (other defaults to u).

    with d = 0, other solved for the goal heading turned by pi must match to convergence
    error; against itself the gap is only bounded by pi / W (turn in place), which it
    reaches at the goal.
    """
    K = u.spec.K
    if K % 2:
        raise ValueError(f"pi shift needs an even K, got {K}")
    other = u if other is None else other
    if other.spec != u.spec:
        raise ValueError("pi periodicity gap needs two fields on the same grid")
    shifted = np.roll(u.data[1:-1, 1:-1, :], -K // 2, axis=2)
    data = other.data[1:-1, 1:-1, :]
    both = (data < INF / 2) & (shifted < INF / 2)
    if not both.any():
        return 0.0
    return float(np.max(np.abs(data - shifted)[both]))
