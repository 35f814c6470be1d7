# compiled inner loops for the gauss-seidel sweep (numba)
# walls = blocked nodes + spatial boundary nodes; a control that references a wall is unavailable
# unreached nodes carry the INF sentinel and enter the weighted average as a large number

import numpy as np
from numba import njit

from grid.field import INF


@njit(cache=True)
def local_update_kernel(u, walls, i, j, k, c, x_weight, x_offset, y_weight, y_offset,
                        t_weight, t_offset):
    """upwind value at node (i, j, k) for control index c."""
    K = u.shape[2]
    num = 1.0
    den = 0.0

    wx = x_weight[k, c]
    if wx > 0.0:
        ii = i + x_offset[k, c]
        if walls[ii, j, k]:
            return INF
        num += wx * u[ii, j, k]
        den += wx

    wy = y_weight[k, c]
    if wy > 0.0:
        jj = j + y_offset[k, c]
        if walls[i, jj, k]:
            return INF
        num += wy * u[i, jj, k]
        den += wy

    wt = t_weight[c]
    if wt > 0.0:
        kk = (k + t_offset[c]) % K
        if walls[i, j, kk]:
            return INF
        num += wt * u[i, j, kk]
        den += wt

    if den <= 0.0:
        return INF
    value = num / den
    if value >= INF:
        return INF
    return value


@njit(cache=True)
def sweep_kernel(u, v_opt, w_opt, walls, x_weight, x_offset, y_weight, y_offset,
                 t_weight, t_offset, control_v, control_w, di, dj, dk, ceiling):
    """one in-place pass over interior nodes; returns the largest decrease (clipped at ceiling)."""
    n_i, n_j, K = u.shape
    n_controls = control_v.shape[0]
    max_change = 0.0

    for ii in range(n_i - 2):
        i = 1 + ii if di > 0 else n_i - 2 - ii
        for jj in range(n_j - 2):
            j = 1 + jj if dj > 0 else n_j - 2 - jj
            for kk in range(K):
                k = kk if dk > 0 else K - 1 - kk
                if walls[i, j, k]:
                    continue

                old = u[i, j, k]
                best = old
                best_c = -1
                for c in range(n_controls):
                    cand = local_update_kernel(u, walls, i, j, k, c, x_weight, x_offset,
                                               y_weight, y_offset, t_weight, t_offset)
                    if cand < best:
                        best = cand
                        best_c = c

                if best_c >= 0:
                    u[i, j, k] = best
                    v_opt[i, j, k] = control_v[best_c]
                    w_opt[i, j, k] = control_w[best_c]
                    change = min(old, ceiling) - min(best, ceiling)
                    if change > max_change:
                        max_change = change

    return max_change


def kernel_arrays(coeffs):
    """contiguous typed arrays the kernels expect, from a CoeffTable."""
    return (
        np.ascontiguousarray(coeffs.x_weight, dtype=np.float64),
        np.ascontiguousarray(coeffs.a, dtype=np.int64),
        np.ascontiguousarray(coeffs.y_weight, dtype=np.float64),
        np.ascontiguousarray(coeffs.b, dtype=np.int64),
        np.ascontiguousarray(coeffs.theta_weight, dtype=np.float64),
        np.ascontiguousarray(coeffs.theta_offset, dtype=np.int64),
    )
