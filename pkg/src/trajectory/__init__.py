from .tracer import Trajectory, TraceParams, Tracer, TrajectoryError, control_law, count_kinks
