# brute-force travel-time oracle for small grids
# nodes are the unblocked interior grid nodes (the solver's non-wall nodes); each control
# gives one edge: integrate the kinematics until the fastest-moving coordinate (in cells)
# has advanced step_count cells, then snap to the nearest node
# shortest times to the goal come from a backward dijkstra (heapq) over the reversed edges

import heapq
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from grid.field import INF, Field3, GridSpec, TWO_PI, grid_axes
from geometry.mask import build_mask
from scenario.scene import Scene
from solver.coefficients import CONTROL_SET, ControlPair
from solver.hjb_solver import SolverParams, seed_goal_node, wall_mask
from trajectory.kinematics import euler_steps, velocity_components

logger = logging.getLogger(__name__)

# euler sub-steps per edge; matches the tracer's step rule, only finer
EDGE_SUBSTEPS = 8


class OracleSizeError(ValueError):
    """grid too large to enumerate as a graph."""


@dataclass
class ControlGraph:
    """directed edges over flat node indices; reversed adjacency is CSR-packed by successor."""
    spec: GridSpec
    src: np.ndarray
    dst: np.ndarray
    cost: np.ndarray
    control: np.ndarray
    controls: List[ControlPair]

    def __post_init__(self):
        order = np.argsort(self.dst, kind="stable")
        self._rev_src = self.src[order]
        self._rev_cost = self.cost[order]
        counts = np.bincount(self.dst, minlength=self.spec.size)
        self._rev_start = np.concatenate([[0], np.cumsum(counts)])

    @property
    def n_edges(self) -> int:
        return int(len(self.src))

    def predecessors(self, node: int):
        lo, hi = self._rev_start[node], self._rev_start[node + 1]
        return zip(self._rev_src[lo:hi].tolist(), self._rev_cost[lo:hi].tolist())

    @classmethod
    def build(cls, scene: Scene, spec: GridSpec, walls: np.ndarray, step_count: int = 1,
              control_set: Sequence[ControlPair] = CONTROL_SET) -> "ControlGraph":
        if step_count < 1:
            raise ValueError(f"step_count must be >= 1, got {step_count}")
        if step_count % 2 == 0:
            # even counts split the graph by node parity (half the free grid never reaches the goal)
            raise ValueError(f"step_count must be odd, got {step_count}")
        car = scene.car
        xs, ys, ts = grid_axes(spec)
        X, Y, T = (arr.ravel() for arr in np.meshgrid(xs, ys, ts, indexing="ij"))
        flat = np.arange(spec.size)
        open_nodes = ~walls.ravel()

        srcs, dsts, costs, ctrls = [], [], [], []
        for c_idx, pair in enumerate(control_set):
            vx0, vy0, _ = velocity_components(np.cos(T), np.sin(T), pair, car)
            rate = np.maximum.reduce([np.abs(vx0) / spec.dx, np.abs(vy0) / spec.dy,
                                      np.full_like(T, abs(pair.w) * car.W / spec.dtheta)])
            tau = step_count / rate

            x, y, th = euler_steps(X, Y, T, pair, car, tau / EDGE_SUBSTEPS, EDGE_SUBSTEPS)

            inside = (x >= spec.a) & (x <= spec.b) & (y >= spec.c) & (y <= spec.dlim)
            i = np.clip(np.ceil((x - spec.a) / spec.dx - 0.5), 0, spec.I).astype(np.int64)
            j = np.clip(np.ceil((y - spec.c) / spec.dy - 0.5), 0, spec.J).astype(np.int64)
            k = np.mod(np.ceil(np.mod(th, TWO_PI) / spec.dtheta - 0.5), spec.K).astype(np.int64)
            succ = (i * (spec.J + 1) + j) * spec.K + k

            keep = open_nodes & inside & (succ != flat)
            keep[keep] &= open_nodes[succ[keep]]
            srcs.append(flat[keep])
            dsts.append(succ[keep])
            costs.append(tau[keep])
            ctrls.append(np.full(int(keep.sum()), c_idx, dtype=np.int8))

        graph = cls(
            spec=spec,
            src=np.concatenate(srcs),
            dst=np.concatenate(dsts),
            cost=np.concatenate(costs),
            control=np.concatenate(ctrls),
            controls=list(control_set),
        )
        logger.info(f"Control graph: {int(open_nodes.sum()):,} nodes, {graph.n_edges:,} edges")
        return graph


def backward_dijkstra(graph: ControlGraph, goal: int) -> np.ndarray:
    dist = np.full(graph.spec.size, INF, dtype=np.float64)
    dist[goal] = 0.0
    heap = [(0.0, goal)]
    done = np.zeros(graph.spec.size, dtype=bool)

    while heap:
        d, node = heapq.heappop(heap)
        if done[node]:
            continue
        done[node] = True
        for pred, cost in graph.predecessors(node):
            alt = d + cost
            if alt < dist[pred]:
                dist[pred] = alt
                heapq.heappush(heap, (alt, pred))
    return dist


def bellman_residual(graph: ControlGraph, dist: np.ndarray) -> float:
    """max |dist - one-step backup| over finite non-goal nodes (0 for an exact solution)."""
    backup = np.full_like(dist, INF)
    finite_dst = dist[graph.dst] < INF / 2
    np.minimum.at(backup, graph.src[finite_dst], graph.cost[finite_dst] + dist[graph.dst[finite_dst]])
    check = (dist < INF / 2) & (dist > 0)
    if not check.any():
        return 0.0
    return float(np.max(np.abs(dist[check] - backup[check])))


def dijkstra_travel_time(scene: Scene, spec: GridSpec, step_count: int = 1,
                         max_nodes: Optional[int] = 1_000_000,
                         strict_containment: bool = False) -> Field3:
    if max_nodes is not None and spec.size > max_nodes:
        raise OracleSizeError(f"Grid has {spec.size:,} nodes; the oracle is limited to {max_nodes:,}")

    mask = build_mask(scene.car, scene.obstacles, spec, strict_containment=strict_containment)
    goal_node = seed_goal_node(scene, spec, mask, SolverParams(strict_containment=strict_containment))
    walls = wall_mask(spec, mask.blocked)

    graph = ControlGraph.build(scene, spec, walls, step_count=step_count)
    dist = backward_dijkstra(graph, spec.flat_index(*goal_node))

    reached = int((dist < INF / 2).sum())
    logger.info(f"Oracle reached {reached:,} of {spec.size:,} nodes "
                f"(step_count={step_count})")
    return Field3(spec, dist.reshape(spec.shape))

