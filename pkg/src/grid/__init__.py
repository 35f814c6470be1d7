from .field import (
    INF,
    Config,
    GridSpec,
    Field3,
    DomainError,
    GradientUndefinedError,
    node_to_config,
    nearest_node,
    trilinear_sample,
    central_gradient,
)

__all__ = [
    "INF",
    "Config",
    "GridSpec",
    "Field3",
    "DomainError",
    "GradientUndefinedError",
    "node_to_config",
    "nearest_node",
    "trilinear_sample",
    "central_gradient",
]
