"""Pure numpy versions of the compiled kernels, same signatures."""
import math

import numpy as np


def exact_quotient_max(num, dist, alpha, approx):
    """Largest num / dist**alpha, re-evaluated with libm pow on the entries
    whose vectorized value is within 1e-12 of the maximum, so the result
    is bit-identical to a scalar loop."""
    if approx.size == 0 or approx.max() == 0.0:
        return 0.0
    top = approx >= approx.max() * (1.0 - 1e-12)
    return max(n / math.pow(d, alpha) for n, d in zip(num[top].tolist(), dist[top].tolist()))


def panel_cumsum(f, idx, W):
    f = np.ascontiguousarray(f, dtype=float)
    panels = np.einsum("kij,ij->ki", f[:, idx], W)
    out = np.zeros_like(f)
    np.cumsum(panels, axis=1, out=out[:, 1:])
    return out


def holder_window(u, x, y, dpow, alpha, window):
    u = np.asarray(u, dtype=float)
    nx, ny = u.shape
    best = 0.0
    for di in range(0, window + 1):
        if di >= nx:
            break
        for dj in range(-window if di > 0 else 1, window + 1):
            if abs(dj) >= ny:
                continue
            ia, ib = slice(0, nx - di), slice(di, nx)
            if dj >= 0:
                ja, jb = slice(0, ny - dj), slice(dj, ny)
            else:
                ja, jb = slice(-dj, ny), slice(0, ny + dj)
            dx = x[ib][:, None] - x[ia][:, None]
            dy = y[jb][None, :] - y[ja][None, :]
            dist = np.sqrt(dx * dx + dy * dy)
            w = np.minimum(dpow[ia, ja], dpow[ib, jb])
            num = w * np.abs(u[ib, jb] - u[ia, ja])
            val = num / dist ** alpha
            if val.size and val.max() >= best * (1.0 - 1e-12):
                best = max(best, exact_quotient_max(num, dist, alpha, val))
    return best
