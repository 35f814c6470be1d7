# uniform discretization of configuration space omega x [0, 2pi)
# theta axis holds K unique nodes with wraparound indexing (node K == node 0)
# data arrays are shaped (I+1, J+1, K) in C order:
#   flat index = (i * (J+1) + j) * K + k
# also hosts trilinear sampling and central differences used by solver + tracer

import math
import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# finite stand-in for +inf; anything >= INF_THRESHOLD counts as infinite
INF = 1.0e10
INF_THRESHOLD = INF / 2.0

# relative slack when testing domain membership (round-off at the walls)
DOMAIN_TOL = 1e-9


class DomainError(ValueError):
    """configuration lies outside the spatial domain (or too close to its edge)."""


class GradientUndefinedError(ValueError):
    """a central difference touched an INF sample."""


def is_infinite(value: float) -> bool:
    return value >= INF_THRESHOLD


def normalize_angle(theta: float) -> float:
    """wrap an angle into [0, 2pi)."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative number can land exactly on 2pi after the shift
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


def theta_distance(a: float, b: float) -> float:
    """periodic heading error in [0, pi]."""
    diff = abs(normalize_angle(a) - normalize_angle(b))
    return min(diff, TWO_PI - diff)


@dataclass(frozen=True)
class Config:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.theta)

    @classmethod
    def parse(cls, text: str) -> "Config":
        """parse the cli form "x,y,theta"."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"Expected 'x,y,theta', got {text!r}")
        x, y, theta = (float(p) for p in parts)
        return cls(x, y, theta)


@dataclass(frozen=True)
class GridSpec:
    a: float
    b: float
    c: float
    dlim: float
    I: int
    J: int
    K: int

    def __post_init__(self):
        for name in ("I", "J", "K"):
            if int(getattr(self, name)) < 4:
                raise ValueError(f"GridSpec.{name} must be >= 4, got {getattr(self, name)}")
        if not (self.b > self.a and self.dlim > self.c):
            raise ValueError(
                f"Empty domain [{self.a}, {self.b}] x [{self.c}, {self.dlim}]"
            )

    # derived spacings

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.I

    @property
    def dy(self) -> float:
        return (self.dlim - self.c) / self.J

    @property
    def dtheta(self) -> float:
        return TWO_PI / self.K

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.I + 1, self.J + 1, self.K)

    @property
    def size(self) -> int:
        return (self.I + 1) * (self.J + 1) * self.K

    def contains(self, x: float, y: float) -> bool:
        tol_x = DOMAIN_TOL * (self.b - self.a)
        tol_y = DOMAIN_TOL * (self.dlim - self.c)
        return (self.a - tol_x <= x <= self.b + tol_x) and (self.c - tol_y <= y <= self.dlim + tol_y)

    def is_boundary(self, i: int, j: int) -> bool:
        return i in (0, self.I) or j in (0, self.J)

    def flat_index(self, i: int, j: int, k: int) -> int:
        return (i * (self.J + 1) + j) * self.K + k

    def unflat_index(self, flat: int) -> Tuple[int, int, int]:
        ij, k = divmod(flat, self.K)
        i, j = divmod(ij, self.J + 1)
        return (i, j, k)

    @classmethod
    def parse(cls, text: str, bounds: Tuple[float, float, float, float]) -> "GridSpec":
        """build a spec from the cli grid syntax "I" or "I,J,K"."""
        parts = [p.strip() for p in str(text).split(",") if p.strip()]
        if len(parts) == 1:
            n = int(parts[0])
            counts = (n, n, n)
        elif len(parts) == 3:
            counts = tuple(int(p) for p in parts)
        else:
            raise ValueError(f"Grid must be 'I' or 'I,J,K', got {text!r}")
        a, b, c, dlim = bounds
        return cls(a, b, c, dlim, *counts)


@dataclass
class Field3:
    """one scalar per grid node; INF marks blocked / unreached nodes."""
    spec: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != self.spec.shape:
            raise ValueError(f"Field data shape {self.data.shape} != grid shape {self.spec.shape}")

    @classmethod
    def full(cls, spec: GridSpec, value: float) -> "Field3":
        return cls(spec, np.full(spec.shape, float(value), dtype=np.float64))

    @classmethod
    def from_function(cls, spec: GridSpec, fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]) -> "Field3":
        """evaluate fn(x, y, theta) on broadcast node coordinates."""
        xs, ys, ts = grid_axes(spec)
        X, Y, T = np.meshgrid(xs, ys, ts, indexing="ij")
        return cls(spec, np.broadcast_to(fn(X, Y, T), spec.shape).astype(np.float64))

    def __getitem__(self, node: Tuple[int, int, int]) -> float:
        i, j, k = node
        return float(self.data[i, j, k % self.spec.K])

    def finite_mask(self) -> np.ndarray:
        return self.data < INF_THRESHOLD


def grid_axes(spec: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = spec.a + np.arange(spec.I + 1) * spec.dx
    ys = spec.c + np.arange(spec.J + 1) * spec.dy
    ts = np.arange(spec.K) * spec.dtheta
    return xs, ys, ts


# node <-> configuration

def node_to_config(spec: GridSpec, i: int, j: int, k: int) -> Config:
    if not (0 <= i <= spec.I and 0 <= j <= spec.J and 0 <= k < spec.K):
        raise IndexError(f"Node ({i}, {j}, {k}) outside grid {spec.shape}")
    return Config(spec.a + i * spec.dx, spec.c + j * spec.dy, k * spec.dtheta)


def _nearest_index(fraction: float) -> int:
    # round half toward the lower index
    return int(math.ceil(fraction - 0.5))


def nearest_node(spec: GridSpec, q: Config) -> Tuple[int, int, int]:
    if not spec.contains(q.x, q.y):
        raise DomainError(f"Configuration ({q.x}, {q.y}) outside domain "
                          f"[{spec.a}, {spec.b}] x [{spec.c}, {spec.dlim}]")
    i = min(max(_nearest_index((q.x - spec.a) / spec.dx), 0), spec.I)
    j = min(max(_nearest_index((q.y - spec.c) / spec.dy), 0), spec.J)
    k = _nearest_index(q.theta / spec.dtheta) % spec.K
    return (i, j, k)


# interpolation

def _cell(offset: float, spacing: float, count: int) -> Tuple[int, float]:
    """lower node index and fractional weight along one spatial axis."""
    s = offset / spacing
    lo = min(max(int(math.floor(s)), 0), count - 1)
    return lo, min(max(s - lo, 0.0), 1.0)


def trilinear_sample(f: Field3, q: Config) -> float:
    spec = f.spec
    if not spec.contains(q.x, q.y):
        raise DomainError(f"Cannot sample outside the domain at ({q.x}, {q.y})")

    i0, tx = _cell(q.x - spec.a, spec.dx, spec.I)
    j0, ty = _cell(q.y - spec.c, spec.dy, spec.J)
    s = q.theta / spec.dtheta
    k_floor = int(math.floor(s))
    tk = s - k_floor
    k0 = k_floor % spec.K
    k1 = (k0 + 1) % spec.K

    corners = f.data[np.ix_((i0, i0 + 1), (j0, j0 + 1), (k0, k1))]
    if np.any(corners >= INF_THRESHOLD):
        return INF

    wx = np.array([1.0 - tx, tx])
    wy = np.array([1.0 - ty, ty])
    wk = np.array([1.0 - tk, tk])
    return float(np.einsum("i,j,k,ijk->", wx, wy, wk, corners))


def central_gradient(f: Field3, q: Config) -> Tuple[float, float, float]:
    spec = f.spec
    h_x, h_y, h_t = spec.dx, spec.dy, spec.dtheta
    if not (spec.contains(q.x - h_x, q.y - h_y) and spec.contains(q.x + h_x, q.y + h_y)):
        raise DomainError(f"Central difference at ({q.x}, {q.y}) needs one cell of margin")

    samples = (
        trilinear_sample(f, Config(q.x + h_x, q.y, q.theta)),
        trilinear_sample(f, Config(q.x - h_x, q.y, q.theta)),
        trilinear_sample(f, Config(q.x, q.y + h_y, q.theta)),
        trilinear_sample(f, Config(q.x, q.y - h_y, q.theta)),
        trilinear_sample(f, Config(q.x, q.y, q.theta + h_t)),
        trilinear_sample(f, Config(q.x, q.y, q.theta - h_t)),
    )
    if any(is_infinite(s) for s in samples):
        raise GradientUndefinedError(f"INF sample near ({q.x}, {q.y}, {q.theta})")

    return (
        (samples[0] - samples[1]) / (2.0 * h_x),
        (samples[2] - samples[3]) / (2.0 * h_y),
        (samples[4] - samples[5]) / (2.0 * h_t),
    )
