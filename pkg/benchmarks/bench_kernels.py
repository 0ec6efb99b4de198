"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from liouville import _kernels_py, kernels
from liouville.radial3d import RadialGrid


def cases():
    grid = RadialGrid()
    idx, W = grid.panels
    rng = np.random.default_rng(0)
    f = np.ascontiguousarray(rng.normal(size=(3, grid.n)))
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    n, m = 201, 41
    u = np.ascontiguousarray(rng.normal(size=(n, m)).cumsum(0))
    x, y = np.linspace(-1, 1, n), np.linspace(0, 1, m)
    d = np.ones((n, m))
    return {
        "panel_cumsum 3x4000": (lambda b: b.panel_cumsum(f, idx, W)),
        "holder_window 201x41 w=32": (lambda b: b.holder_window(u, x, y, d, 0.5, 32)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        print("compiled backend unavailable; timing the numpy fallback only")
    backends = {"python": _kernels_py}
    if kernels.compiled_backend is not None:
        backends["compiled"] = kernels.compiled_backend
    print(f"{'kernel':28s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup")
    for name, fn in cases().items():
        times = {}
        results = {}
        for b, mod in backends.items():
            results[b] = fn(mod)
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        if len(results) == 2:
            assert np.allclose(results["python"], results["compiled"], rtol=1e-13, atol=1e-13)
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{name:28s} " + " ".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
              + f"   {speed:6.1f}x")


if __name__ == "__main__":
    main()
