# shared fixtures for the entire test suite
# keeps individual test files short by centralising scene / grid / field setup

import sys
from pathlib import Path

import pytest
import numpy as np

# make src/ and configs/ importable without installing
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).parent.parent / "configs"))
sys.path.insert(0, str(Path(__file__).parent.parent))

import config  # noqa: E402

from grid.field import Config, Field3, GridSpec  # noqa: E402
from geometry.footprint import CarParams  # noqa: E402
from geometry.collision import ObstacleSet  # noqa: E402
from scenario.scene import Scene  # noqa: E402
from solver.hjb_solver import SolveResult, SolverParams, solve  # noqa: E402

DEFAULT_CAR = CarParams(R=0.04, d=0.07, W=4.0)
DEFAULT_GOAL = Config(0.5, 0.5, 0.0)
UNIT_BOUNDS = (-1.0, 1.0, -1.0, 1.0)


def rect(x0, x1, y0, y1):
    """counterclockwise axis-aligned rectangle"""
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def make_scene(obstacles=None, goal=DEFAULT_GOAL, car=DEFAULT_CAR, bounds=UNIT_BOUNDS, starts=None, name="test"):
    polys = list(obstacles or [])
    return Scene(
        name=name,
        bounds=bounds,
        car=car,
        obstacles=ObstacleSet(polygons=polys, names=[f"obs_{i}" for i in range(len(polys))]),
        goal=goal,
        starts=dict(starts or {}),
    )


def make_result(scene, u_data, v_opt=None, w_opt=None, spec=None, goal_node=None):
    """hand-built SolveResult around an arbitrary field (no sweeping)"""
    spec = spec or GridSpec(*scene.bounds, *(n - 1 for n in u_data.shape[:2]), u_data.shape[2])
    shape = spec.shape
    return SolveResult(
        u=Field3(spec, np.array(u_data, dtype=np.float64)),
        v_opt=np.zeros(shape, dtype=np.int8) if v_opt is None else np.array(v_opt, dtype=np.int8),
        w_opt=np.zeros(shape, dtype=np.int8) if w_opt is None else np.array(w_opt, dtype=np.int8),
        outer_iterations=1,
        final_residual=0.0,
        converged=True,
        goal=scene.goal,
        goal_node=goal_node or (0, 0, 0),
        car=scene.car,
        params=SolverParams(),
        residual_history=[0.0],
    )


# scenes and grids

@pytest.fixture
def free_scene():
    return make_scene()


@pytest.fixture
def small_spec():
    """24 x 24 x 16 grid on [-1, 1]^2; the goal (1/2, 1/2, 0) is node (18, 18, 0)"""
    return GridSpec(*UNIT_BOUNDS, 24, 24, 16)


@pytest.fixture(scope="session")
def small_free_result():
    """obstacle-free scene solved on the 24 x 24 x 16 grid (shared, read-only)"""
    spec = GridSpec(*UNIT_BOUNDS, 24, 24, 16)
    return solve(make_scene(), spec, SolverParams(eps=1e-7, max_outer=500))


@pytest.fixture
def tmp_settings(tmp_path, monkeypatch):
    """point every output directory of config.settings at tmp_path"""
    s = config.settings
    monkeypatch.setattr(s, "OUTPUT_DIR", tmp_path / "outputs")
    monkeypatch.setattr(s, "REPORTS_DIR", tmp_path / "reports")
    return s
