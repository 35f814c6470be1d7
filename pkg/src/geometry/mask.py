# precomputes the set of inadmissible grid nodes (blocked[i, j, k] = True)
# vectorized per heading: every (i, j) position is tested against each obstacle at once
# uses the same separating-axis rule and contact tolerance as collision.convex_overlap

import logging
from dataclasses import dataclass

import numpy as np

from grid.field import GridSpec, grid_axes
from geometry.footprint import CarParams, corner_offsets
from geometry.collision import CONTACT_TOL, ObstacleSet, edge_normals

logger = logging.getLogger(__name__)


@dataclass
class AdmissibilityMask:
    spec: GridSpec
    blocked: np.ndarray  # bool, shape spec.shape

    @property
    def blocked_fraction(self) -> float:
        return float(self.blocked.mean()) if self.blocked.size else 0.0

    def is_blocked(self, i: int, j: int, k: int) -> bool:
        return bool(self.blocked[i, j, k % self.spec.K])


def _overlaps_polygon(centers: np.ndarray, offsets: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """SAT verdict for one footprint orientation at many centres against one polygon."""
    axes = np.vstack([edge_normals(offsets), edge_normals(poly)])
    # corners: (n, 4, 2) -> projections (n, 4, n_axes)
    corners = centers[:, None, :] + offsets[None, :, :]
    proj_rect = corners @ axes.T
    proj_poly = poly @ axes.T
    rect_min = proj_rect.min(axis=1)
    rect_max = proj_rect.max(axis=1)
    separated = (rect_max < proj_poly.min(axis=0) - CONTACT_TOL) | \
                (proj_poly.max(axis=0) < rect_min - CONTACT_TOL)
    return ~np.any(separated, axis=1)


def build_mask(params: CarParams, obstacles: ObstacleSet, spec: GridSpec,
               strict_containment: bool = False) -> AdmissibilityMask:
    xs, ys, thetas = grid_axes(spec)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    centers = np.column_stack([X.ravel(), Y.ravel()])

    blocked = np.zeros(spec.shape, dtype=bool)
    for k, theta in enumerate(thetas):
        offsets = corner_offsets(params, float(theta))
        hit = np.zeros(len(centers), dtype=bool)
        for poly in obstacles:
            hit |= _overlaps_polygon(centers, offsets, poly)

        if strict_containment:
            corners = centers[:, None, :] + offsets[None, :, :]
            outside = (corners[..., 0] < spec.a) | (corners[..., 0] > spec.b) | \
                      (corners[..., 1] < spec.c) | (corners[..., 1] > spec.dlim)
            hit |= outside.any(axis=1)

        blocked[:, :, k] = hit.reshape(spec.I + 1, spec.J + 1)

    mask = AdmissibilityMask(spec=spec, blocked=blocked)
    logger.info(f"Admissibility mask: {int(blocked.sum())} of {blocked.size} nodes blocked "
                f"({mask.blocked_fraction:.2%})")
    return mask
