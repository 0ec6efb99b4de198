"""Checks on radial profiles: Green-formula Laplacian, Pohozaev identity,
volume, the scaling family and the biharmonic residual."""
import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline, make_interp_spline

from ..errors import DomainError
from .fixed_point import _moments
from .grid import RadialGrid, RadialProfile, gaussian_tail_moment, tail_slope

# 7-point, 4th-order accurate fourth derivative
_D4 = np.array([-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6])


def laplacian_radial_green(u, epsilon):
    """Delta u(r) = -(1/r) int_0^r s^2 g ds - int_r^inf s g ds, g = e^{-eps s^2 + u}."""
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    r = u.r
    A, B, _ = _moments(u.values, u.grid, float(epsilon), (1, 2))
    out = np.empty_like(r)
    out[1:] = -A[2][1:] / r[1:] - B[1][1:]
    out[0] = -B[1][0]
    return RadialProfile(out, u.grid, epsilon)


def laplacian_fd(u):
    """Three-point nonuniform stencil for u'' + (2/r) u' (u'(0) = 0 at the origin)."""
    r, v = u.r, u.values
    h0, h1 = np.diff(r)[:-1], np.diff(r)[1:]
    d2 = 2.0 * (h0 * v[2:] - (h0 + h1) * v[1:-1] + h1 * v[:-2]) / (h0 * h1 * (h0 + h1))
    d1 = (h0 ** 2 * v[2:] + (h1 ** 2 - h0 ** 2) * v[1:-1] - h1 ** 2 * v[:-2]) / (h0 * h1 * (h0 + h1))
    out = np.full_like(v, np.nan)
    out[1:-1] = d2 + 2.0 * d1 / r[1:-1]
    out[0] = 6.0 * (v[1] - v[0]) / r[1] ** 2        # 3 u''(0), u ~ u0 + c r^2
    return RadialProfile(np.nan_to_num(out, nan=out[-2]), u.grid, u.epsilon)


def pohozaev_residual(u, epsilon):
    """int (u + 6 - 4 eps r^2) e^{-eps r^2 + u} r^2 dr divided by
    int e^{-eps r^2 + u} r^2 dr, both with the linear-extension tail."""
    r, v = u.r, u.values
    eps = float(epsilon)
    g = np.exp(-eps * r * r + v)
    num, den = u.grid.integrate(np.stack([(v + 6.0 - 4.0 * eps * r * r) * g * r * r,
                                          g * r * r]))
    R, uR, beta = r[-1], v[-1], tail_slope(v, r)
    tnum = gaussian_tail_moment(2, R, eps, uR, beta,
                                extra=lambda s, z: uR + beta * z + 6.0 - 4.0 * eps * s * s)
    tden = gaussian_tail_moment(2, R, eps, uR, beta)
    return float((num + tnum) / (den + tden))


def far_field_fit(v, r, start_fraction=0.9):
    """Least-squares fit of a + b r + c/r (the decaying radial biharmonic
    far field) over r >= start_fraction * R; returns (a, b, c)."""
    m = r >= start_fraction * r[-1]
    X = np.stack([np.ones(m.sum()), r[m], 1.0 / r[m]], axis=1)
    return np.linalg.lstsq(X, v[m], rcond=None)[0]


def _volume_tail(v, r):
    """int_R^inf s^2 e^u with u continued by the far-field fit shifted to
    match u(R). A flat far field is treated as data on the ball (no tail)."""
    a, b, c = far_field_fit(v, r)
    R = r[-1]
    slope = b - c / R ** 2
    if abs(slope) <= 1e-12:
        return 0.0          # flat far field: data on the ball only
    if slope > 0:
        return np.inf
    return gaussian_tail_moment(
        2, R, 0.0, v[-1], slope,
        extra=lambda s, z: np.exp(c / s - c / R + c * z / R ** 2))


def volume(u):
    """4 pi int_0^inf r^2 e^u dr: panel quadrature plus the far-field tail
    (infinite if the profile does not decay)."""
    r, v = u.r, u.values
    return float(4.0 * np.pi * (u.grid.integrate(r * r * np.exp(v)) + _volume_tail(v, r)))


def volume_simpson(u):
    """Composite Simpson on the nodes, same tail closure."""
    r, v = u.r, u.values
    return float(4.0 * np.pi * (simpson(r * r * np.exp(v), x=r) + _volume_tail(v, r)))


def volume_mapped_trapezoid(u):
    """Trapezoid in the uniform grading variable xi (r = R xi^p), same tail.

    The mapped integrand vanishes to high order at xi = 0, so the
    trapezoid rule has no leading endpoint correction there.
    """
    grid, v = u.grid, u.values
    xi = np.arange(grid.n) / (grid.n - 1)
    drdxi = grid.rmax * grid.power * xi ** (grid.power - 1)
    f = u.r ** 2 * np.exp(v) * drdxi
    return float(4.0 * np.pi * (np.trapezoid(f, xi) + _volume_tail(v, u.r)))


def linear_tail_fit(u, start_fraction=0.9):
    """Least-squares line a + b r over the outer part of the grid."""
    r, v = u.r, u.values
    m = r >= start_fraction * r[-1]
    b, a = np.polyfit(r[m], v[m], 1)
    return a, b


def rescale_solution(u1, mu, grid=None):
    """u_mu(r) = u1(mu r) + 4 log mu sampled on ``grid`` (default: u1's grid).

    Points with mu r beyond the last node use the far-field fit
    a + b s + c/s of the outer tenth of u1 (linear decay with its 1/s
    correction).
    """
    if mu <= 0:
        raise DomainError("mu must be positive")
    grid = u1.grid if grid is None else grid
    if mu == 1.0 and grid.same_as(u1.grid):
        return RadialProfile(u1.values.copy(), grid, u1.epsilon)
    s = mu * grid.r
    spline = CubicSpline(u1.r, u1.values, bc_type=((1, 0.0), "not-a-knot"))
    a, b, c = far_field_fit(u1.values, u1.r)
    inside = s <= u1.r[-1]
    far = a + b * s + c / np.maximum(s, u1.r[-1])
    vals = np.where(inside, spline(np.minimum(s, u1.r[-1])), far)
    return RadialProfile(vals + 4.0 * np.log(mu), grid, u1.epsilon)


def _uniform_samples(u, H, rmax):
    m = int(np.floor(rmax / H + 1e-9))
    s = np.arange(m + 4) * H
    if s[-1] > u.r[-1]:
        raise DomainError("biharmonic stencil needs samples beyond the grid")
    return m, s


def bilaplacian(u, rmax=None, H=0.05):
    """Delta^2 u on a uniform grid 0, H, ..., <= rmax.

    Uses Delta^2 u = (r u)''''/r for r > 0 (quintic spline of r u, odd
    extension, 7-point stencil) and 5 u''''(0) at the origin.
    """
    rmax = 0.5 * u.grid.rmax if rmax is None else rmax
    m, s = _uniform_samples(u, H, rmax)
    v = make_interp_spline(u.r, u.values * u.r, k=5)(s)
    ext = np.concatenate([-v[:0:-1], v])
    off = v.size - 1
    win = np.lib.stride_tricks.sliding_window_view(ext, 7)
    d4 = win[off - 3:off - 3 + m + 1] @ _D4 / H ** 4
    w = make_interp_spline(u.r, u.values, k=5)(s[:4])
    w_even = np.concatenate([w[:0:-1], w])
    out = np.empty(m + 1)
    out[1:] = d4[1:] / s[1:m + 1]
    out[0] = 5.0 * (w_even @ _D4) / H ** 4
    return s[:m + 1], out


def biharmonic_residual(u, rmax=None, H=0.05, epsilon=0.0, return_profile=False):
    """sup over [0, rmax] of |Delta^2 u - e^{-eps r^2} e^u| (default rmax = R/2,
    eps = 0: the unregularized equation)."""
    s, b4 = bilaplacian(u, rmax, H)
    uu = CubicSpline(u.r, u.values, bc_type=((1, 0.0), "not-a-knot"))(s)
    res = np.abs(b4 - np.exp(uu - epsilon * s * s))
    if return_profile:
        return float(res.max()), s, res
    return float(res.max())


def default_grid():
    return RadialGrid()
