# binary container (.cpf) for a solved value field + recorded controls
# layout (little-endian, no alignment padding, no timestamps; see docs/file_formats.md):
#   header (HEADER_FORMAT, 188 bytes)
#   residual history   float64 x n_history
#   u                  float64 x (I+1)(J+1)K, C order
#   v_opt, w_opt       int8    x (I+1)(J+1)K each, C order
#   blocked            bit-packed (numpy packbits, big bit order) x ceil((I+1)(J+1)K / 8)

import struct
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from grid.field import INF, Config, Field3, GridSpec
from geometry.footprint import CarParams
from scenario.scene import Scene
from geometry.mask import AdmissibilityMask
from solver.hjb_solver import SolveResult, SolverParams

logger = logging.getLogger(__name__)

MAGIC = b"CARPLAN\x00"
VERSION = 2
FIELD_SUFFIX = ".cpf"

# header flags
FLAG_STRICT_CONTAINMENT = 0x1

# magic, version, flags, I, J, K, a, b, c, dlim, R, d, W, goal xyz, goal node ijk,
# INF sentinel, eps, outer_iterations, max_outer, final_residual, converged, pad, n_history,
# sha256 of the obstacle vertices
HEADER_FORMAT = "<8sHH3I4d3d3d3i2d2Id?3xI32s"
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)


class FieldFormatError(ValueError):
    """file is not a readable value-field container."""


class FieldCompatibilityError(ValueError):
    """saved field was solved for a different grid, car, goal or domain."""


def save_result(result: SolveResult, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    spec = result.spec
    history = np.asarray(result.residual_history, dtype="<f8")
    flags = FLAG_STRICT_CONTAINMENT if result.params.strict_containment else 0
    blocked = result.mask.blocked if result.mask is not None else np.zeros(spec.shape, dtype=bool)

    header = struct.pack(
        HEADER_FORMAT,
        MAGIC, VERSION, flags,
        spec.I, spec.J, spec.K,
        spec.a, spec.b, spec.c, spec.dlim,
        result.car.R, result.car.d, result.car.W,
        result.goal.x, result.goal.y, result.goal.theta,
        *(int(n) for n in result.goal_node),
        INF, result.params.eps,
        result.outer_iterations, result.params.max_outer,
        result.final_residual, bool(result.converged),
        len(history), result.obstacle_digest.ljust(32, b"\0")[:32],
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(history.tobytes())
        f.write(np.ascontiguousarray(result.u.data, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(result.v_opt, dtype=np.int8).tobytes())
        f.write(np.ascontiguousarray(result.w_opt, dtype=np.int8).tobytes())
        f.write(np.packbits(np.ascontiguousarray(blocked, dtype=bool)).tobytes())

    logger.info(f"Saved value field to {path} ({path.stat().st_size:,} bytes)")
    return path


def load_result(path: Union[str, Path]) -> SolveResult:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Value field not found: {path}")
    raw = path.read_bytes()
    if len(raw) < HEADER_SIZE:
        raise FieldFormatError(f"{path}: truncated header ({len(raw)} bytes)")

    (magic, version, flags, I, J, K, a, b, c, dlim, R, d, W, gx, gy, gt,
     gi, gj, gk, inf, eps, outer, max_outer, residual, converged, n_history, digest) = \
        struct.unpack_from(HEADER_FORMAT, raw, 0)

    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}, not a value-field container")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported container version {version} (expected {VERSION})")
    if inf != INF:
        raise FieldFormatError(f"{path}: INF sentinel {inf} differs from this build's {INF}")

    try:
        spec = GridSpec(a, b, c, dlim, I, J, K)
        car = CarParams(R, d, W)
    except ValueError as e:
        raise FieldFormatError(f"{path}: corrupt header: {e}")

    n = spec.size
    packed = (n + 7) // 8
    expected = HEADER_SIZE + 8 * n_history + 8 * n + 2 * n + packed
    if len(raw) != expected:
        raise FieldFormatError(f"{path}: size {len(raw)} bytes, expected {expected} for grid {spec.shape}")

    offset = HEADER_SIZE
    history = np.frombuffer(raw, dtype="<f8", count=n_history, offset=offset)
    offset += 8 * n_history
    u = np.frombuffer(raw, dtype="<f8", count=n, offset=offset).reshape(spec.shape)
    offset += 8 * n
    v_opt = np.frombuffer(raw, dtype=np.int8, count=n, offset=offset).reshape(spec.shape)
    offset += n
    w_opt = np.frombuffer(raw, dtype=np.int8, count=n, offset=offset).reshape(spec.shape)
    offset += n
    blocked = np.unpackbits(np.frombuffer(raw, dtype=np.uint8, count=packed, offset=offset), count=n)

    result = SolveResult(
        u=Field3(spec, u.astype(np.float64)),
        v_opt=v_opt.copy(),
        w_opt=w_opt.copy(),
        outer_iterations=int(outer),
        final_residual=float(residual),
        converged=bool(converged),
        goal=Config(gx, gy, gt),
        goal_node=(int(gi), int(gj), int(gk)),
        car=car,
        params=SolverParams(eps=eps, max_outer=int(max_outer),
                            strict_containment=bool(flags & FLAG_STRICT_CONTAINMENT)),
        residual_history=[float(r) for r in history],
        mask=AdmissibilityMask(spec, blocked.astype(bool).reshape(spec.shape)),
        obstacle_digest=b"" if digest == bytes(32) else digest,
    )
    logger.info(f"Loaded value field from {path}: grid {spec.I}x{spec.J}x{spec.K}, "
                f"{result.outer_iterations} iterations, converged={result.converged}")
    return result


def check_compatible(result: SolveResult, scene: Scene, spec: Optional[GridSpec] = None,
                     strict_containment: Optional[bool] = None):
    """raise FieldCompatibilityError unless the field was solved for this scene (and grid, and mask rule)."""
    problems = []
    saved = result.spec
    if (saved.a, saved.b, saved.c, saved.dlim) != tuple(scene.bounds):
        problems.append(f"domain {(saved.a, saved.b, saved.c, saved.dlim)} != scene {tuple(scene.bounds)}")
    if result.car != scene.car:
        problems.append(f"car {result.car.to_dict()} != scene {scene.car.to_dict()}")
    if result.obstacle_digest and result.obstacle_digest != scene.obstacle_digest():
        problems.append("obstacles differ from the scene")
    if result.goal != scene.goal:
        problems.append(f"goal {result.goal.as_tuple()} != scene {scene.goal.as_tuple()}")
    if spec is not None and (spec.I, spec.J, spec.K) != (saved.I, saved.J, saved.K):
        problems.append(f"grid {(saved.I, saved.J, saved.K)} != requested {(spec.I, spec.J, spec.K)}")
    if strict_containment is not None and result.params.strict_containment != strict_containment:
        problems.append(f"strict containment {result.params.strict_containment} != requested {strict_containment}")
    if problems:
        raise FieldCompatibilityError("Saved field does not match: " + "; ".join(problems))
