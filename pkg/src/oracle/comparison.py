# solver-vs-oracle comparison report
# statistics over mutually finite nodes plus reachability agreement away from walls
# generates json reports the same way for every run (checks list + metrics + thresholds)

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional
from datetime import datetime, timezone

import numpy as np
import pandas as pd

from grid.field import INF_THRESHOLD, Field3

logger = logging.getLogger(__name__)

THRESHOLDS = {
    "max_median_abs_diff": 0.35,
    "max_reachability_mismatch_away_from_walls": 0,
}


def near_walls(walls: np.ndarray) -> np.ndarray:
    """walls dilated by one node in every direction (theta periodic)."""
    padded = np.pad(walls, ((1, 1), (1, 1), (0, 0)), mode="edge")
    out = np.zeros_like(walls)
    n_i, n_j, _ = walls.shape
    for di in (0, 1, 2):
        for dj in (0, 1, 2):
            block = padded[di:di + n_i, dj:dj + n_j, :]
            out |= block | np.roll(block, 1, axis=2) | np.roll(block, -1, axis=2)
    return out


def compare_fields(solver_u: Field3, oracle_u: Field3, walls: Optional[np.ndarray] = None,
                   thresholds: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
    if solver_u.spec != oracle_u.spec:
        raise ValueError(f"Cannot compare fields on different grids: {solver_u.spec} vs {oracle_u.spec}")
    thresholds = {**THRESHOLDS, **(thresholds or {})}
    spec = solver_u.spec

    s_fin = solver_u.data < INF_THRESHOLD
    o_fin = oracle_u.data < INF_THRESHOLD
    both = s_fin & o_fin
    diff = pd.Series(np.abs(solver_u.data[both] - oracle_u.data[both]))

    mismatch = s_fin ^ o_fin
    if walls is None:
        walls = np.zeros(spec.shape, dtype=bool)
        walls[[0, -1], :, :] = True
        walls[:, [0, -1], :] = True
    away = mismatch & ~near_walls(walls)

    metrics = {
        "mutually_finite": int(both.sum()),
        "solver_only_reachable": int((s_fin & ~o_fin).sum()),
        "oracle_only_reachable": int((o_fin & ~s_fin).sum()),
        "reachability_mismatch_away_from_walls": int(away.sum()),
    }
    if len(diff):
        metrics.update({
            "max_abs_diff": float(diff.max()),
            "mean_abs_diff": float(diff.mean()),
            "median_abs_diff": float(diff.median()),
            "p90_abs_diff": float(diff.quantile(0.90)),
            "p99_abs_diff": float(diff.quantile(0.99)),
        })
    else:
        metrics.update({k: None for k in ("max_abs_diff", "mean_abs_diff", "median_abs_diff",
                                          "p90_abs_diff", "p99_abs_diff")})

    median = metrics["median_abs_diff"]
    checks = [
        {
            "name": "median_abs_diff",
            "passed": median is not None and median <= thresholds["max_median_abs_diff"],
            "expected": f"<= {thresholds['max_median_abs_diff']}",
            "actual": None if median is None else round(median, 6),
            "message": f"Median |solver - oracle| over {metrics['mutually_finite']} nodes",
        },
        {
            "name": "reachability_away_from_walls",
            "passed": metrics["reachability_mismatch_away_from_walls"]
                      <= thresholds["max_reachability_mismatch_away_from_walls"],
            "expected": f"<= {thresholds['max_reachability_mismatch_away_from_walls']}",
            "actual": metrics["reachability_mismatch_away_from_walls"],
            "message": "Nodes reachable in exactly one of the two fields, more than one cell from any wall",
        },
    ]

    all_passed = all(c["passed"] for c in checks)
    report = {
        "status": "pass" if all_passed else "fail",
        "grid": {"I": spec.I, "J": spec.J, "K": spec.K},
        "metrics": metrics,
        "checks": checks,
        "thresholds": thresholds,
        "compared_at": datetime.now(timezone.utc).isoformat(),
    }

    passed_count = len([c for c in checks if c["passed"]])
    logger.info(f"Oracle comparison {'PASSED' if all_passed else 'FAILED'}: "
                f"{passed_count}/{len(checks)} checks, median |diff| {median}")
    return report


def save_report(report: Dict[str, Any], path: Path) -> Path:
    """save comparison report as json"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(report, f, indent=2, default=str)
    logger.info(f"Comparison report saved to {path}")
    return path
