# exact rectangle-vs-convex-polygon collision testing (separating axis theorem)
# closed-set semantics: shapes that merely touch count as overlapping
# obstacles are unions of convex ccw polygons; non-convex shapes must be decomposed

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from grid.field import Config
from geometry.footprint import CarParams, Footprint, footprint

logger = logging.getLogger(__name__)

# projections closer than this are treated as touching
CONTACT_TOL = 1e-12
AREA_TOL = 1e-14


class GeometryInputError(ValueError):
    """degenerate, non-convex or malformed polygon."""


PolygonLike = Union[np.ndarray, Sequence[Sequence[float]], Footprint]


def _as_vertices(shape: PolygonLike) -> np.ndarray:
    if isinstance(shape, Footprint):
        return shape.corners
    vertices = np.asarray(shape, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise GeometryInputError(f"Polygon must be an (n, 2) vertex array, got shape {vertices.shape}")
    return vertices


# polygon helpers

def polygon_area(vertices: np.ndarray) -> float:
    """signed shoelace area; positive for counterclockwise order."""
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def is_convex(vertices: np.ndarray) -> bool:
    edges = np.roll(vertices, -1, axis=0) - vertices
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    return bool(np.all(cross >= -AREA_TOL) or np.all(cross <= AREA_TOL))


def normalize_polygon(vertices: PolygonLike) -> Tuple[np.ndarray, bool]:
    """validate a convex polygon and return a ccw copy plus whether it was flipped."""
    v = _as_vertices(vertices).copy()
    if len(v) < 3:
        raise GeometryInputError(f"Polygon needs at least 3 vertices, got {len(v)}")
    area = polygon_area(v)
    if abs(area) <= AREA_TOL:
        raise GeometryInputError("Polygon has zero area")
    if not is_convex(v):
        raise GeometryInputError("Polygon is not convex; decompose it into convex parts")
    if area < 0:
        return v[::-1].copy(), True
    return v, False


@dataclass
class ObstacleSet:
    polygons: List[np.ndarray] = field(default_factory=list)
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        checked = []
        for idx, poly in enumerate(self.polygons):
            v, flipped = normalize_polygon(poly)
            if flipped:
                raise GeometryInputError(f"Obstacle {idx} is clockwise; ObstacleSet expects ccw polygons")
            checked.append(v)
        self.polygons = checked
        if not self.names:
            self.names = [f"obstacle_{i}" for i in range(len(self.polygons))]

    def __len__(self) -> int:
        return len(self.polygons)

    def __iter__(self):
        return iter(self.polygons)


# separating axis test

def edge_normals(vertices: np.ndarray) -> np.ndarray:
    edges = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.linalg.norm(edges, axis=1)
    # a zero-width car (d = 0) has coincident corners; those edges give no axis
    keep = lengths > 0
    edges = edges[keep] / lengths[keep, None]
    return np.column_stack([edges[:, 1], -edges[:, 0]])


def convex_overlap(rect: PolygonLike, poly: PolygonLike) -> bool:
    """true iff the two closed convex shapes intersect (touching included)."""
    a = _as_vertices(rect)
    b = _as_vertices(poly)
    if abs(polygon_area(b)) <= AREA_TOL:
        raise GeometryInputError("Obstacle polygon has zero area")

    axes = np.vstack([edge_normals(a), edge_normals(b)])
    proj_a = a @ axes.T
    proj_b = b @ axes.T
    separated = (proj_a.max(axis=0) < proj_b.min(axis=0) - CONTACT_TOL) | \
                (proj_b.max(axis=0) < proj_a.min(axis=0) - CONTACT_TOL)
    return not bool(np.any(separated))


def is_admissible(params: CarParams, obstacles: ObstacleSet, q: Config) -> bool:
    if len(obstacles) == 0:
        return True
    rect = footprint(params, q)
    return not any(convex_overlap(rect, poly) for poly in obstacles)
