# tests for footprint.py and collision.py
# covers corner placement, polygon validation and the closed-set separating-axis test

import math

import pytest
import numpy as np

from grid.field import Config
from geometry.footprint import CarParams, corner_offsets, footprint
from geometry.collision import (
    GeometryInputError, ObstacleSet, convex_overlap, is_admissible, is_convex,
    normalize_polygon, polygon_area,
)
from conftest import DEFAULT_CAR, rect


@pytest.fixture
def narrow_slot():
    """two blocks leaving a 0.1-wide vertical slot around x = 0"""
    return ObstacleSet(polygons=[rect(-0.6, -0.05, -0.4, -0.1), rect(0.05, 0.6, -0.4, -0.1)])


class TestCarParams:

    def test_turning_radius(self):
        assert DEFAULT_CAR.turning_radius == pytest.approx(0.25)

    @pytest.mark.parametrize("R,d,W", [(0.0, 0.07, 4.0), (0.04, -0.1, 4.0), (0.04, 0.07, 0.0)])
    def test_rejects_bad_values(self, R, d, W):
        with pytest.raises(ValueError):
            CarParams(R, d, W)

    def test_point_mass_limit_allowed(self):
        assert CarParams(0.04, 0.0, 4.0).d == 0.0


class TestFootprint:

    def test_axis_aligned_corners(self):
        corners = footprint(DEFAULT_CAR, Config(0.0, 0.0, 0.0)).corners
        expected = np.array([[-0.07, -0.04], [0.07, -0.04], [0.07, 0.04], [-0.07, 0.04]])
        np.testing.assert_allclose(corners, expected, atol=1e-15)

    def test_counterclockwise(self):
        corners = footprint(DEFAULT_CAR, Config(0.3, -0.2, 1.0)).corners
        assert polygon_area(corners) == pytest.approx(4 * DEFAULT_CAR.R * DEFAULT_CAR.d)

    def test_center(self):
        fp = footprint(DEFAULT_CAR, Config(0.3, -0.2, 2.0))
        assert fp.center == pytest.approx((0.3, -0.2))

    def test_quarter_turn_swaps_extents(self):
        offsets = corner_offsets(DEFAULT_CAR, math.pi / 2)
        assert np.max(offsets[:, 0]) == pytest.approx(DEFAULT_CAR.R)
        assert np.max(offsets[:, 1]) == pytest.approx(DEFAULT_CAR.d)


class TestPolygons:

    def test_area_sign(self):
        square = rect(0.0, 1.0, 0.0, 1.0)
        assert polygon_area(square) == pytest.approx(1.0)
        assert polygon_area(square[::-1]) == pytest.approx(-1.0)

    def test_clockwise_is_flipped(self):
        v, flipped = normalize_polygon(rect(0.0, 1.0, 0.0, 1.0)[::-1])
        assert flipped
        assert polygon_area(v) > 0

    def test_non_convex_rejected(self):
        arrow = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 1.0], [0.0, 1.0]])
        assert not is_convex(arrow)
        with pytest.raises(GeometryInputError):
            normalize_polygon(arrow)

    def test_degenerate_rejected(self):
        with pytest.raises(GeometryInputError):
            normalize_polygon([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])

    def test_too_few_vertices(self):
        with pytest.raises(GeometryInputError):
            normalize_polygon([[0.0, 0.0], [1.0, 0.0]])

    def test_obstacle_set_rejects_clockwise(self):
        with pytest.raises(GeometryInputError):
            ObstacleSet(polygons=[rect(0.0, 1.0, 0.0, 1.0)[::-1]])

    def test_obstacle_set_default_names(self):
        obstacles = ObstacleSet(polygons=[rect(0.0, 1.0, 0.0, 1.0)])
        assert obstacles.names == ["obstacle_0"]
        assert len(obstacles) == 1


class TestConvexOverlap:

    def test_shared_edge_counts_as_overlap(self):
        fp = footprint(DEFAULT_CAR, Config(0.0, 0.0, 0.0))
        assert convex_overlap(fp, rect(0.07, 0.2, -1.0, 1.0))

    def test_small_gap_is_clear(self):
        fp = footprint(DEFAULT_CAR, Config(0.0, 0.0, 0.0))
        assert not convex_overlap(fp, rect(0.0701, 0.2, -1.0, 1.0))

    def test_rotated_car_reaches_corner(self):
        # at 45 degrees the front-right corner sits at ((d + R), (d - R)) / sqrt(2) ~ (0.0778, 0.0212)
        fp = footprint(DEFAULT_CAR, Config(0.0, 0.0, math.pi / 4))
        assert convex_overlap(fp, rect(0.075, 0.2, 0.0, 0.05))
        assert not convex_overlap(fp, rect(0.08, 0.2, 0.0, 0.05))

    def test_containment_counts(self):
        fp = footprint(DEFAULT_CAR, Config(0.0, 0.0, 0.0))
        assert convex_overlap(fp, rect(-0.01, 0.01, -0.01, 0.01))

    def test_triangle(self):
        tri = np.array([[0.1, -0.1], [0.3, 0.0], [0.1, 0.1]])
        assert not convex_overlap(footprint(DEFAULT_CAR, Config(0.0, 0.0, 0.0)), tri)
        assert convex_overlap(footprint(DEFAULT_CAR, Config(0.05, 0.0, 0.0)), tri)


class TestIsAdmissible:

    def test_no_obstacles(self):
        assert is_admissible(DEFAULT_CAR, ObstacleSet(), Config(0.0, 0.0, 0.0))

    def test_centred_in_slot_facing_up(self, narrow_slot):
        assert is_admissible(DEFAULT_CAR, narrow_slot, Config(0.0, -0.2, math.pi / 2))

    def test_lateral_shift_collides(self, narrow_slot):
        assert not is_admissible(DEFAULT_CAR, narrow_slot, Config(0.02, -0.2, math.pi / 2))

    def test_sideways_in_slot_collides(self, narrow_slot):
        assert not is_admissible(DEFAULT_CAR, narrow_slot, Config(0.0, -0.2, 0.0))

    def test_symmetry_under_pi_rotation(self, narrow_slot):
        q = Config(0.01, -0.2, math.pi / 2)
        q_flipped = Config(0.01, -0.2, 3 * math.pi / 2)
        assert is_admissible(DEFAULT_CAR, narrow_slot, q) == is_admissible(DEFAULT_CAR, narrow_slot, q_flipped)

    def test_obstacle_covering_domain(self):
        everything = ObstacleSet(polygons=[rect(-1.0, 1.0, -1.0, 1.0)])
        assert not is_admissible(DEFAULT_CAR, everything, Config(0.3, 0.3, 1.0))


def random_configs(rng, n, low=-0.5, high=0.5):
    return [Config(float(x), float(y), float(t)) for x, y, t in
            zip(rng.uniform(low, high, n), rng.uniform(low, high, n), rng.uniform(0.0, 2 * math.pi, n))]


def moved(poly, phi, shift):
    rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    return poly @ rot.T + np.asarray(shift)


class TestInvariances:

    @pytest.fixture
    def shapes(self):
        return [
            rect(-0.05, 0.05, -0.3, -0.1),
            rect(0.1, 0.4, 0.1, 0.15),
            np.array([[-0.3, 0.2], [-0.1, 0.25], [-0.25, 0.4]]),
        ]

    def test_role_swap(self, shapes):
        rng = np.random.default_rng(11)
        for q in random_configs(rng, 200):
            fp = footprint(DEFAULT_CAR, q).corners
            for poly in shapes:
                assert convex_overlap(fp, poly) == convex_overlap(poly, fp)

    def test_rigid_motion(self, shapes):
        rng = np.random.default_rng(12)
        phi, shift = 0.7, (0.3, -0.2)
        obstacles = ObstacleSet(polygons=shapes)
        moved_obstacles = ObstacleSet(polygons=[moved(p, phi, shift) for p in shapes])
        for q in random_configs(rng, 200):
            x, y = moved(np.array([[q.x, q.y]]), phi, shift)[0]
            q_moved = Config(float(x), float(y), q.theta + phi)
            assert is_admissible(DEFAULT_CAR, obstacles, q) == is_admissible(DEFAULT_CAR, moved_obstacles, q_moved)

    @pytest.mark.parametrize("smaller", [CarParams(0.03, 0.07, 4.0), CarParams(0.04, 0.05, 4.0),
                                         CarParams(0.02, 0.0, 4.0)])
    def test_smaller_car_stays_admissible(self, shapes, smaller):
        rng = np.random.default_rng(13)
        obstacles = ObstacleSet(polygons=shapes)
        admissible_big = 0
        for q in random_configs(rng, 300):
            if is_admissible(DEFAULT_CAR, obstacles, q):
                admissible_big += 1
                assert is_admissible(smaller, obstacles, q)
        assert admissible_big > 0

    def test_blocked_configs_grow_with_car(self, narrow_slot):
        rng = np.random.default_rng(14)
        bigger = CarParams(0.05, 0.09, 4.0)
        for q in random_configs(rng, 300, low=-0.3, high=0.0):
            if not is_admissible(DEFAULT_CAR, narrow_slot, q):
                assert not is_admissible(bigger, narrow_slot, q)
