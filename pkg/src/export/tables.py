# csv tables for trajectories and field slices
# header row, fixed column order, '.' decimal point regardless of locale

import logging
from pathlib import Path
from typing import Union

import pandas as pd

from grid.field import Config
from solver.coefficients import ControlPair
from trajectory.tracer import Trajectory, TrajectorySample, count_kinks

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["t", "x", "y", "theta", "v", "w"]
# written in place of unreached (NaN) values
UNREACHED = "inf"


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """one row per sample; the terminal sample has no applied control and is written as 0, 0."""
    rows = [
        {
            "t": s.t,
            "x": s.config.x,
            "y": s.config.y,
            "theta": s.config.theta,
            "v": s.control.v if s.control is not None else 0,
            "w": s.control.w if s.control is not None else 0,
        }
        for s in traj.samples
    ]
    df = pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)
    return df.astype({"v": "int64", "w": "int64"})


def write_table(df: pd.DataFrame, path: Union[str, Path], float_format: str = "%.10g") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=float_format, na_rep=UNREACHED, lineterminator="\n")
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def read_trajectory(path: Union[str, Path]) -> Trajectory:
    """inverse of trajectory_frame + write_table; rows with v = w = 0 carry no control."""
    df = pd.read_csv(path)
    missing = [c for c in TRAJECTORY_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: trajectory table is missing columns {missing}")

    samples = []
    for row in df.itertuples(index=False):
        v, w = int(row.v), int(row.w)
        control = ControlPair(v, w) if (v, w) != (0, 0) else None
        samples.append(TrajectorySample(float(row.t), Config(row.x, row.y, row.theta), control))
    traj = Trajectory(samples=samples, duration=samples[-1].t if samples else 0.0)
    traj.kink_count = count_kinks(traj)
    return traj
