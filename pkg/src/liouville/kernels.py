"""Backend selection for the hot kernels.

The compiled extension is used when it imports; setting
``LIOUVILLE_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("LIOUVILLE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"


def _c(a, dtype=np.float64):
    return np.ascontiguousarray(a, dtype=dtype)


def panel_cumsum(f, idx, W):
    """Cumulative integrals of each row of ``f`` from panel weights
    (a 1D ``f`` gives a 1D result)."""
    f = _c(f)
    out = _active.panel_cumsum(np.atleast_2d(f), _c(idx, np.int64), _c(W))
    return out[0] if f.ndim == 1 else out


def holder_window(u, x, y, dpow, alpha, window):
    """Windowed weighted Hölder quotient maximum over a 2D node array."""
    return _active.holder_window(_c(u), _c(x), _c(y), _c(dpow),
                                 float(alpha), int(window))
