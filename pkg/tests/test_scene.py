# tests for scene.py
# covers the bundled scenes, angle expressions, validation errors with line numbers
# and clockwise polygon repair

import math
import logging
from textwrap import dedent

import pytest
import numpy as np

from grid.field import Config
from geometry.collision import polygon_area
from scenario.scene import SceneLoadError, load_scene, parse_angle, parse_scene, resolve_scene_path
from conftest import make_scene, rect

BASE = dedent("""\
    name: tiny
    domain: {x_min: -1.0, x_max: 1.0, y_min: -1.0, y_max: 1.0}
    car: {R: 0.04, d: 0.07, W: 4.0}
    goal: {x: 0.5, y: 0.5, theta: 0}
""")


class TestParseAngle:

    @pytest.mark.parametrize("text,expected", [
        ("1.5", 1.5),
        ("pi", math.pi),
        ("-pi/2", -math.pi / 2),
        ("0.5*pi", 0.5 * math.pi),
        ("3pi/4", 0.75 * math.pi),
        ("0.75 * pi", 0.75 * math.pi),
    ])
    def test_accepted_forms(self, text, expected):
        assert parse_angle(text) == pytest.approx(expected)

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_angle("north")


class TestParseScene:

    def test_minimal_scene(self):
        scene = parse_scene(BASE)
        assert scene.name == "tiny"
        assert scene.bounds == (-1.0, 1.0, -1.0, 1.0)
        assert scene.car.W == 4.0
        assert scene.goal == Config(0.5, 0.5, 0.0)
        assert len(scene.obstacles) == 0
        assert scene.starts == {}

    def test_starts_and_angle_expressions(self):
        text = BASE + "starts:\n  back: {x: -0.5, y: 0.5, theta: pi}\n"
        scene = parse_scene(text)
        assert scene.starts["back"].theta == pytest.approx(math.pi)

    def test_missing_car_reports_field(self):
        text = BASE.replace("car: {R: 0.04, d: 0.07, W: 4.0}\n", "")
        with pytest.raises(SceneLoadError) as exc:
            parse_scene(text)
        assert exc.value.field_path == "car"

    def test_missing_nested_field_reports_line(self):
        text = BASE.replace("R: 0.04, ", "")
        with pytest.raises(SceneLoadError) as exc:
            parse_scene(text)
        assert exc.value.field_path == "car.R"
        assert exc.value.line == 3
        assert ":3 [car.R]" in str(exc.value)

    def test_bad_number(self):
        with pytest.raises(SceneLoadError):
            parse_scene(BASE.replace("W: 4.0", "W: fast"))

    def test_nonpositive_car_parameter(self):
        with pytest.raises(SceneLoadError):
            parse_scene(BASE.replace("W: 4.0", "W: 0"))

    def test_empty_domain(self):
        with pytest.raises(SceneLoadError):
            parse_scene(BASE.replace("x_max: 1.0", "x_max: -1.0"))

    def test_goal_outside_domain(self):
        with pytest.raises(SceneLoadError) as exc:
            parse_scene(BASE.replace("goal: {x: 0.5", "goal: {x: 1.5"))
        assert exc.value.field_path == "goal"

    def test_inadmissible_goal(self):
        text = BASE + "obstacles:\n  - vertices: [[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6]]\n"
        with pytest.raises(SceneLoadError) as exc:
            parse_scene(text)
        assert "inadmissible" in str(exc.value)

    def test_inadmissible_start(self):
        text = (BASE
                + "obstacles:\n  - vertices: [[-0.6, 0.4], [-0.4, 0.4], [-0.4, 0.6], [-0.6, 0.6]]\n"
                + "starts:\n  stuck: {x: -0.5, y: 0.5, theta: 0}\n")
        with pytest.raises(SceneLoadError) as exc:
            parse_scene(text)
        assert exc.value.field_path == "starts.stuck"

    def test_non_convex_obstacle(self):
        text = BASE + "obstacles:\n  - vertices: [[0, 0], [0.2, 0], [0.1, 0.05], [0.2, 0.1], [0, 0.1]]\n"
        with pytest.raises(SceneLoadError) as exc:
            parse_scene(text)
        assert exc.value.field_path == "obstacles[0].vertices"

    def test_clockwise_obstacle_reversed_with_warning(self, caplog):
        text = BASE + "obstacles:\n  - name: box\n    vertices: [[-0.6, -0.6], [-0.6, -0.4], [-0.4, -0.4], [-0.4, -0.6]]\n"
        with caplog.at_level(logging.WARNING):
            scene = parse_scene(text)
        assert polygon_area(scene.obstacles.polygons[0]) > 0
        assert scene.obstacles.names == ["box"]
        assert "clockwise" in caplog.text

    def test_invalid_yaml(self):
        with pytest.raises(SceneLoadError):
            parse_scene(BASE + "obstacles: [[\n")

    def test_not_a_mapping(self):
        with pytest.raises(SceneLoadError):
            parse_scene("- 1\n- 2\n")


class TestScene:

    def test_with_car(self):
        scene = make_scene().with_car(d=0.0)
        assert scene.car.d == 0.0
        assert scene.car.R == 0.04

    def test_with_goal(self):
        scene = make_scene().with_goal(Config(0.5, 0.5, math.pi))
        assert scene.goal.theta == pytest.approx(math.pi)
        assert scene.car == make_scene().car

    def test_obstacle_digest_changes_with_obstacles(self):
        a = make_scene(obstacles=[rect(0.0, 0.1, 0.0, 0.1)])
        b = make_scene(obstacles=[rect(0.0, 0.1, 0.0, 0.2)])
        assert a.obstacle_digest() != b.obstacle_digest()
        assert a.obstacle_digest() == make_scene(obstacles=[rect(0.0, 0.1, 0.0, 0.1)]).obstacle_digest()


class TestBundledScenes:

    @pytest.mark.parametrize("name", ["paper_free", "paper_threepaths_obs", "parallel_park", "narrow_spot"])
    def test_bundled_scene_loads(self, name):
        scene = load_scene(name)
        assert scene.name == name
        assert scene.source is not None

    def test_resolve_by_name(self):
        assert resolve_scene_path("paper_free").name == "paper_free.scene"

    def test_resolve_missing(self):
        with pytest.raises(FileNotFoundError):
            resolve_scene_path("no_such_scene")

    def test_load_from_path(self, tmp_path):
        path = tmp_path / "mine.scene"
        path.write_text(BASE)
        scene = load_scene(path)
        assert scene.source == path

    def test_paper_free_starts(self):
        scene = load_scene("paper_free")
        assert scene.goal == Config(0.5, 0.5, 0.0)
        assert scene.starts["parallel_park"] == Config(0.64, 0.62, 0.0)
        assert scene.starts["pink"].theta == pytest.approx(0.75 * math.pi)

    def test_narrow_spot_goal_fits_slot(self):
        scene = load_scene("narrow_spot")
        assert scene.goal.theta == pytest.approx(math.pi / 2)
        assert len(scene.obstacles) == 4
        xs = np.concatenate([p[:, 0] for p in scene.obstacles])
        assert xs.min() == pytest.approx(-0.6)
