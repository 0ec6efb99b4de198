"""The compiled kernels and their numpy fallback agree."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liouville import _kernels_py as py
from liouville import kernels
from liouville.radial3d import RadialGrid

compiled = kernels.compiled_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")


def test_panel_cumsum_integrates_polynomials_exactly():
    g = RadialGrid(R=3.0, n=200)
    r = g.r
    f = np.stack([r ** 2, r ** 3])
    cum = g.cumulative(f)
    assert np.allclose(cum[0], r ** 3 / 3, rtol=0, atol=1e-13)
    assert np.allclose(cum[1], r ** 4 / 4, rtol=0, atol=1e-12)
    assert g.cumulative(r ** 2).shape == r.shape


@needs_compiled
@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(8, 300))
def test_panel_cumsum_backends_agree(seed, n):
    rng = np.random.default_rng(seed)
    idx, W = RadialGrid(R=5.0, n=n).panels
    f = rng.normal(size=(3, n))
    a = compiled.panel_cumsum(f, idx.astype(np.int64), np.ascontiguousarray(W))
    b = py.panel_cumsum(f, idx, W)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


@needs_compiled
@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(2, 30), st.integers(1, 9),
       st.floats(0.05, 0.95), st.integers(1, 12))
def test_holder_window_backends_agree_exactly(seed, nx, ny, alpha, window):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(nx, ny))
    x = np.cumsum(rng.uniform(0.1, 1, nx))
    y = np.cumsum(rng.uniform(0.1, 1, ny))
    dpow = rng.uniform(0, 2, size=(nx, ny))
    args = (u, x, y, dpow, alpha, window)
    assert compiled.holder_window(*args) == py.holder_window(*args)
