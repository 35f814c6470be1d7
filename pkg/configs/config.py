# central configuration for carplan
# loads env vars and provides paths + numeric defaults used everywhere

import os
from pathlib import Path
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()


@dataclass
class Settings:
    # paths
    PROJECT_ROOT: Path = Path(__file__).parent.parent
    CONFIGS_DIR: Path = PROJECT_ROOT / "configs"
    SCENES_DIR: Path = PROJECT_ROOT / "configs" / "scenes"
    OUTPUT_DIR: Path = Path(os.getenv("OUTPUT_DIR", str(PROJECT_ROOT / "outputs")))
    REPORTS_DIR: Path = PROJECT_ROOT / "reports"

    # sweeping solver
    GRID_SIZE: int = int(os.getenv("GRID_SIZE", "100"))
    SOLVER_EPS: float = float(os.getenv("SOLVER_EPS", "1e-6"))
    SOLVER_MAX_OUTER: int = int(os.getenv("SOLVER_MAX_OUTER", "500"))
    # travel times above this are sentinel leakage, finalized to INF after the sweep loop
    SOLVER_REACH_CEILING: float = float(os.getenv("SOLVER_REACH_CEILING", "1e6"))
    GOAL_OFFGRID_WARN: float = float(os.getenv("GOAL_OFFGRID_WARN", "1e-6"))

    # admissibility mask
    MASK_STRICT_CONTAINMENT: bool = os.getenv("MASK_STRICT_CONTAINMENT", "false").lower() == "true"

    # trajectory tracing; dt and tolerances are expressed in grid cells
    TRACE_MAX_TIME_FACTOR: float = float(os.getenv("TRACE_MAX_TIME_FACTOR", "1.5"))
    TRACE_DEAD_BAND_FRACTION: float = float(os.getenv("TRACE_DEAD_BAND_FRACTION", "1e-3"))
    TRACE_DT_FRACTION: float = float(os.getenv("TRACE_DT_FRACTION", "0.25"))
    TRACE_GOAL_TOL_CELLS: float = float(os.getenv("TRACE_GOAL_TOL_CELLS", "2"))
    TRACE_THETA_TOL_CELLS: float = float(os.getenv("TRACE_THETA_TOL_CELLS", "2"))
    # hold a chattering control component at 0 instead of flipping it every step
    TRACE_SLIDING: bool = os.getenv("TRACE_SLIDING", "true").lower() == "true"

    # dijkstra oracle
    ORACLE_STEP_COUNT: int = int(os.getenv("ORACLE_STEP_COUNT", "1"))
    # median absolute gap allowed between solver and oracle, see DESIGN.md
    ORACLE_MEDIAN_TOLERANCE: float = float(os.getenv("ORACLE_MEDIAN_TOLERANCE", "0.35"))
    ORACLE_MAX_NODES: int = int(os.getenv("ORACLE_MAX_NODES", "1000000"))

    # table output
    CSV_FLOAT_FORMAT: str = os.getenv("CSV_FLOAT_FORMAT", "%.10g")

    def ensure_directories(self):
        dirs = [
            self.OUTPUT_DIR,
            self.REPORTS_DIR / "oracle",
        ]
        for d in dirs:
            d.mkdir(parents=True, exist_ok=True)


settings = Settings()
