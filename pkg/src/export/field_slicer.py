# slicing utilities over a solved value field
# theta slices (contour input), level-band point clouds (isosurface input) and lane profiles
# every slice is a pandas dataframe with fixed column order

from typing import Dict, List, Optional
from dataclasses import dataclass

import numpy as np
import pandas as pd

from grid.field import INF_THRESHOLD, Config, Field3, grid_axes, nearest_node

SLICE_COLUMNS = ["x", "y", "theta", "u"]


@dataclass
class SliceStats:
    name: str
    count: int
    percentage: float
    numeric_stats: Dict[str, float]


class FieldSlicer:

    def __init__(self, u: Field3):
        self.u = u
        self.spec = u.spec
        self.xs, self.ys, self.ts = grid_axes(u.spec)
        self.total_count = u.spec.size

    # slices

    def theta_slice(self, theta: float) -> pd.DataFrame:
        """u(., ., theta_k) at the grid heading nearest to theta; unreached nodes carry NaN."""
        _, _, k = nearest_node(self.spec, Config(self.spec.a, self.spec.c, theta))
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        values = self.u.data[:, :, k]
        return pd.DataFrame({
            "x": X.ravel(),
            "y": Y.ravel(),
            "theta": np.full(X.size, self.ts[k]),
            "u": np.where(values < INF_THRESHOLD, values, np.nan).ravel(),
        }, columns=SLICE_COLUMNS)

    def slice_by_level_band(self, level_min: Optional[float] = None,
                            level_max: Optional[float] = None) -> pd.DataFrame:
        """(x, y, theta, u) for every reached node with level_min <= u <= level_max."""
        data = self.u.data
        keep = data < INF_THRESHOLD
        if level_min is not None:
            keep &= data >= level_min
        if level_max is not None:
            keep &= data <= level_max
        i, j, k = np.nonzero(keep)
        return pd.DataFrame({
            "x": self.xs[i],
            "y": self.ys[j],
            "theta": self.ts[k],
            "u": data[i, j, k],
        }, columns=SLICE_COLUMNS)

    def lane_profile(self, y: float, theta: float) -> pd.DataFrame:
        """u along the grid row nearest to (y, theta)."""
        _, j, k = nearest_node(self.spec, Config(self.spec.a, y, theta))
        values = self.u.data[:, j, k]
        return pd.DataFrame({
            "x": self.xs,
            "y": np.full(len(self.xs), self.ys[j]),
            "theta": np.full(len(self.xs), self.ts[k]),
            "u": np.where(values < INF_THRESHOLD, values, np.nan),
        }, columns=SLICE_COLUMNS)

    def slice_by_theta_range(self, thetas: List[float]) -> Dict[str, pd.DataFrame]:
        return {f"{theta:.6g}": self.theta_slice(theta) for theta in thetas}

    # per-slice counts and u statistics

    def compute_slice_stats(self, slice_df: pd.DataFrame, slice_name: str) -> SliceStats:
        reached = slice_df["u"].dropna()
        count = len(reached)
        percentage = (count / len(slice_df) * 100) if len(slice_df) > 0 else 0

        numeric_stats = {}
        if count > 0:
            numeric_stats = {
                "u_min": float(reached.min()),
                "u_max": float(reached.max()),
                "u_mean": float(reached.mean()),
                "u_median": float(reached.median()),
            }
        return SliceStats(name=slice_name, count=count, percentage=percentage,
                          numeric_stats=numeric_stats)

    def summary(self, slices: Dict[str, pd.DataFrame]) -> pd.DataFrame:
        """one row of reach counts and u statistics per named slice."""
        rows = []
        for name, df in slices.items():
            stats = self.compute_slice_stats(df, name)
            rows.append({"slice": stats.name, "reached": stats.count,
                         "reached_pct": stats.percentage, **stats.numeric_stats})
        return pd.DataFrame(rows)
