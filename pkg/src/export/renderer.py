# svg drawings of a scene: domain, obstacles, goal, trajectory and car footprints
# footprints come from geometry.footprint so the picture is the tested geometry
# output is deterministic: fixed svg hash salt and no date metadata

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Polygon, Rectangle

from grid.field import INF_THRESHOLD, Config, Field3, grid_axes, nearest_node
from geometry.footprint import footprint
from scenario.scene import Scene
from trajectory.tracer import Trajectory, waypoint_indices

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "carplan"
CONTOUR_LEVELS = 20


def _draw_car(ax, scene: Scene, q: Config, **style):
    corners = footprint(scene.car, q).corners
    ax.add_patch(Polygon(corners, closed=True, fill=False, **style))
    # heading tick from the centre to the front edge
    front = corners[1:3].mean(axis=0)
    ax.plot([q.x, front[0]], [q.y, front[1]], color=style.get("edgecolor", "black"), linewidth=0.8)


def render_scene(scene: Scene, path: Union[str, Path], trajectory: Optional[Trajectory] = None,
                 field: Optional[Field3] = None, theta: Optional[float] = None,
                 waypoints: Optional[Sequence[int]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    a, b, c, dlim = scene.bounds

    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6 * (dlim - c) / (b - a)))
        ax.add_patch(Rectangle((a, c), b - a, dlim - c, fill=False, edgecolor="black", linewidth=1.2))

        if field is not None and theta is not None:
            xs, ys, _ = grid_axes(field.spec)
            _, _, k = nearest_node(field.spec, Config(field.spec.a, field.spec.c, theta))
            values = np.ma.masked_where(field.data[:, :, k] >= INF_THRESHOLD, field.data[:, :, k])
            if values.count() > 0:
                contours = ax.contour(xs, ys, values.T, levels=CONTOUR_LEVELS, linewidths=0.6, cmap="viridis")
                ax.clabel(contours, fontsize=6, fmt="%.2f")

        for poly in scene.obstacles:
            ax.add_patch(Polygon(poly, closed=True, facecolor="0.6", edgecolor="0.2"))

        _draw_car(ax, scene, scene.goal, edgecolor="tab:green", linestyle="--", linewidth=1.0)

        if trajectory is not None and trajectory.samples:
            pts = np.array([[s.config.x, s.config.y] for s in trajectory.samples])
            ax.plot(pts[:, 0], pts[:, 1], color="tab:red", linewidth=1.0)
            indices = waypoint_indices(trajectory) if waypoints is None else list(waypoints)
            for idx in indices:
                _draw_car(ax, scene, trajectory.samples[idx].config, edgecolor="tab:blue", linewidth=0.8)

        ax.set_xlim(a, b)
        ax.set_ylim(c, dlim)
        ax.set_aspect("equal")
        ax.set_title(scene.name)
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
        plt.close(fig)

    logger.info(f"Rendered {path}")
    return path
