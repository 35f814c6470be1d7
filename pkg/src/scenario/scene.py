# scene files: domain bounds, car parameters, convex obstacles, goal and named starts
# format is yaml text (see docs/file_formats.md); parsed with a line-tracking safe loader
# so every diagnostic can name the offending line and field path

import re
import math
import hashlib
import logging
from pathlib import Path
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple, Union

import yaml

import sys
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "configs"))
import config

from grid.field import Config
from geometry.footprint import CarParams
from geometry.collision import GeometryInputError, ObstacleSet, is_admissible, normalize_polygon

logger = logging.getLogger(__name__)

SCENE_SUFFIX = ".scene"
_LINE_KEY = "__line__"
_PI_EXPR = re.compile(
    r"^\s*(?P<sign>-?)\s*(?:(?P<coef>\d+(?:\.\d*)?|\.\d+)\s*\*?\s*)?pi\s*(?:/\s*(?P<div>\d+(?:\.\d*)?))?\s*$"
)


class SceneLoadError(ValueError):
    """malformed or inadmissible scene file; carries path, line and field path."""

    def __init__(self, message: str, path: Optional[Path] = None,
                 line: Optional[int] = None, field_path: str = ""):
        self.path = path
        self.line = line
        self.field_path = field_path
        location = str(path) if path else "<scene>"
        if line is not None:
            location += f":{line}"
        if field_path:
            location += f" [{field_path}]"
        super().__init__(f"{location}: {message}")


@dataclass(frozen=True)
class Scene:
    name: str
    bounds: Tuple[float, float, float, float]  # (a, b, c, dlim)
    car: CarParams
    obstacles: ObstacleSet
    goal: Config
    starts: Dict[str, Config] = field(default_factory=dict)
    description: str = ""
    source: Optional[Path] = None

    def with_car(self, **changes) -> "Scene":
        """copy with some car parameters replaced (e.g. d=0 for the point-mass limit)."""
        return replace(self, car=replace(self.car, **changes))

    def with_goal(self, goal: Config) -> "Scene":
        return replace(self, goal=goal)

    def contains(self, x: float, y: float) -> bool:
        a, b, c, dlim = self.bounds
        return a <= x <= b and c <= y <= dlim

    def obstacle_digest(self) -> bytes:
        """sha256 over the normalized obstacle vertices; ties a saved field to its obstacles."""
        h = hashlib.sha256()
        for poly in self.obstacles:
            h.update(len(poly).to_bytes(4, "little"))
            h.update(poly.astype("<f8").tobytes())
        return h.digest()


# yaml loading with line numbers

class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    mapping = yaml.SafeLoader.construct_mapping(loader, node, deep=True)
    mapping[_LINE_KEY] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


class _SceneParser:
    """walks the raw yaml tree, converting and validating each field."""

    def __init__(self, path: Optional[Path]):
        self.path = path

    def fail(self, message: str, node: Any = None, field_path: str = "") -> SceneLoadError:
        line = node.get(_LINE_KEY) if isinstance(node, dict) else None
        return SceneLoadError(message, self.path, line, field_path)

    def require(self, node: dict, key: str, parent_path: str) -> Any:
        if not isinstance(node, dict) or key not in node:
            raise self.fail(f"missing required field '{key}'", node, _join(parent_path, key))
        return node[key]

    def number(self, node: dict, key: str, parent_path: str) -> float:
        value = self.require(node, key, parent_path)
        try:
            return float(value)
        except (TypeError, ValueError):
            raise self.fail(f"expected a number, got {value!r}", node, _join(parent_path, key))

    def angle(self, node: dict, key: str, parent_path: str) -> float:
        value = self.require(node, key, parent_path)
        if isinstance(value, (int, float)):
            return float(value)
        try:
            return parse_angle(str(value))
        except ValueError:
            raise self.fail(f"expected an angle (number or 'k*pi/n'), got {value!r}",
                            node, _join(parent_path, key))

    def config(self, node: Any, field_path: str) -> Config:
        if not isinstance(node, dict):
            raise SceneLoadError("expected a mapping with x, y, theta", self.path, None, field_path)
        return Config(
            self.number(node, "x", field_path),
            self.number(node, "y", field_path),
            self.angle(node, "theta", field_path),
        )

    def bounds(self, root: dict) -> Tuple[float, float, float, float]:
        domain = self.require(root, "domain", "")
        a = self.number(domain, "x_min", "domain")
        b = self.number(domain, "x_max", "domain")
        c = self.number(domain, "y_min", "domain")
        dlim = self.number(domain, "y_max", "domain")
        if not (b > a and dlim > c):
            raise self.fail("domain must satisfy x_min < x_max and y_min < y_max", domain, "domain")
        return (a, b, c, dlim)

    def car(self, root: dict) -> CarParams:
        node = self.require(root, "car", "")
        try:
            return CarParams(
                R=self.number(node, "R", "car"),
                d=self.number(node, "d", "car"),
                W=self.number(node, "W", "car"),
            )
        except SceneLoadError:
            raise
        except ValueError as e:
            raise self.fail(str(e), node, "car")

    def obstacles(self, root: dict) -> ObstacleSet:
        raw = root.get("obstacles") or []
        if not isinstance(raw, list):
            raise self.fail("'obstacles' must be a list", root, "obstacles")

        polygons, names = [], []
        for idx, item in enumerate(raw):
            item_path = f"obstacles[{idx}]"
            vertices = self.require(item, "vertices", item_path)
            name = str(item.get("name", f"obstacle_{idx}"))
            try:
                poly, flipped = normalize_polygon(vertices)
            except (GeometryInputError, ValueError, TypeError) as e:
                raise self.fail(str(e), item, f"{item_path}.vertices")
            if flipped:
                logger.warning(f"{self.path or '<scene>'}: {item_path} ('{name}') is clockwise; "
                               f"reversed to counterclockwise")
            polygons.append(poly)
            names.append(name)
        return ObstacleSet(polygons=polygons, names=names)

    def parse(self, root: Any) -> Scene:
        if not isinstance(root, dict):
            raise SceneLoadError("scene file must be a yaml mapping", self.path)

        bounds = self.bounds(root)
        car = self.car(root)
        obstacles = self.obstacles(root)
        goal_node = self.require(root, "goal", "")
        goal = self.config(goal_node, "goal")

        starts_raw = root.get("starts") or {}
        if not isinstance(starts_raw, dict):
            raise self.fail("'starts' must be a mapping of name -> configuration", root, "starts")
        starts = {
            str(name): self.config(node, f"starts.{name}")
            for name, node in starts_raw.items() if name != _LINE_KEY
        }

        scene = Scene(
            name=str(root.get("name", self.path.stem if self.path else "scene")),
            bounds=bounds,
            car=car,
            obstacles=obstacles,
            goal=goal,
            starts=starts,
            description=str(root.get("description", "")).strip(),
            source=self.path,
        )
        self.validate(scene, root)
        return scene

    def validate(self, scene: Scene, root: dict):
        checks = [("goal", scene.goal, root.get("goal"))]
        starts_raw = root.get("starts") or {}
        checks += [(f"starts.{name}", q, starts_raw.get(name)) for name, q in scene.starts.items()]

        for field_path, q, node in checks:
            if not scene.contains(q.x, q.y):
                raise self.fail(f"configuration ({q.x}, {q.y}) lies outside the domain", node, field_path)
            if not is_admissible(scene.car, scene.obstacles, q):
                raise self.fail("configuration is inadmissible (car footprint hits an obstacle)",
                                node, field_path)


def _join(parent: str, key: str) -> str:
    return f"{parent}.{key}" if parent else key


def parse_angle(text: str) -> float:
    """parse '1.57', 'pi', '-pi/2', '0.5*pi', '3pi/4'."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text)
    if not m:
        raise ValueError(f"Cannot parse angle {text!r}")
    value = math.pi * float(m.group("coef") or 1.0) / float(m.group("div") or 1.0)
    return -value if m.group("sign") else value


def resolve_scene_path(name_or_path: Union[str, Path]) -> Path:
    """accept a file path or the name of a bundled scene."""
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = config.settings.SCENES_DIR / (path.name if path.suffix else f"{path.name}{SCENE_SUFFIX}")
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"Scene not found: {name_or_path} (also looked in {config.settings.SCENES_DIR})")


def parse_scene(text: str, path: Optional[Path] = None) -> Scene:
    try:
        root = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise SceneLoadError(f"invalid yaml: {e}", path, line)
    return _SceneParser(path).parse(root)


def load_scene(path: Union[str, Path]) -> Scene:
    resolved = resolve_scene_path(path)
    scene = parse_scene(resolved.read_text(encoding="utf-8"), resolved)
    logger.info(f"Loaded scene '{scene.name}' from {resolved}: "
                f"{len(scene.obstacles)} obstacles, {len(scene.starts)} named starts")
    return scene
