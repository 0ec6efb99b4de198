# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: panel quadrature sums and the windowed Hölder scan."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, fmin, fmax

cnp.import_array()


def panel_cumsum(double[:, ::1] f, long[:, ::1] idx, double[:, ::1] W):
    """Cumulative panel integrals of each row of ``f`` (first column 0)."""
    cdef Py_ssize_t k = f.shape[0], n = f.shape[1], p, i, q
    cdef double acc, s
    out = np.empty((k, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    for p in range(k):
        acc = 0.0
        o[p, 0] = 0.0
        for i in range(n - 1):
            s = 0.0
            for q in range(4):
                s += f[p, idx[i, q]] * W[i, q]
            acc += s
            o[p, i + 1] = acc
    return out


def holder_window(double[:, ::1] u, double[::1] x, double[::1] y,
                  double[:, ::1] dpow, double alpha, Py_ssize_t window):
    """Max of min(d^p)·|u(a)−u(b)|/|a−b|^alpha over pairs within the window.

    dist^alpha >= max(|dx|^alpha, |dy|^alpha); with those powers tabulated
    per offset, the exact power is only evaluated for pairs whose bound
    can beat the running maximum.
    """
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j, di, dj, i2, j2, jlo, w1 = window + 1
    cdef double best = 0.0, dx, dy, dist, num, w, lb
    px_arr = np.zeros((nx, w1))
    py_arr = np.zeros((ny, 2 * window + 1))
    cdef double[:, ::1] px = px_arr
    cdef double[:, ::1] py = py_arr
    for i in range(nx):
        for di in range(1, w1):
            if i + di < nx:
                px[i, di] = pow(fabs(x[i + di] - x[i]), alpha)
    for j in range(ny):
        for dj in range(-window, w1):
            if 0 <= j + dj < ny and dj != 0:
                py[j, dj + window] = pow(fabs(y[j + dj] - y[j]), alpha)
    for i in range(nx):
        for j in range(ny):
            for di in range(0, w1):
                i2 = i + di
                if i2 >= nx:
                    break
                jlo = -window if di > 0 else 1
                for dj in range(jlo, w1):
                    j2 = j + dj
                    if j2 < 0 or j2 >= ny:
                        continue
                    w = fmin(dpow[i, j], dpow[i2, j2])
                    num = w * fabs(u[i2, j2] - u[i, j])
                    lb = fmax(px[i, di], py[j, dj + window])
                    if num <= best * lb:
                        continue
                    dx = x[i2] - x[i]
                    dy = y[j2] - y[j]
                    dist = sqrt(dx * dx + dy * dy)
                    num = num / pow(dist, alpha)
                    if num > best:
                        best = num
    return best
