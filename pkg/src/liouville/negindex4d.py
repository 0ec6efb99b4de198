"""Negative directions of the 4D linearization around the x4-independent
solution: bump test function, the x-only eigenpair and the per-mode
sign test f(t)."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal, solve_banded

from ._threads import ordered_map
from .errors import ContractError, DomainError, SolverError, TruncationError
from .radial3d.diagnostics import far_field_fit, rescale_solution
from .radial3d.grid import RadialGrid, RadialProfile, gaussian_tail_moment

_GL_X, _GL_W = np.polynomial.legendre.leggauss(200)


class Bump:
    """v(r) = (1/A) int_r^inf f, f(s) = exp(-1/(s-1)^2 - 1/(s-2)^2) on (1, 2)."""

    lo, hi = 1.0, 2.0

    def __init__(self):
        self.A = quad(self.f, self.lo, self.hi, epsabs=0, epsrel=1e-13, limit=200)[0]

    @staticmethod
    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        m = (s > 1.0) & (s < 2.0)
        sm = s[m]
        out[m] = np.exp(-1.0 / (sm - 1.0) ** 2 - 1.0 / (sm - 2.0) ** 2)
        return out if out.ndim else float(out)

    @classmethod
    def fprime(cls, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        m = (s > 1.0) & (s < 2.0)
        sm = s[m]
        out[m] = cls.f(sm) * (2.0 / (sm - 1.0) ** 3 + 2.0 / (sm - 2.0) ** 3)
        return out

    def value(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.where(r <= self.lo, 1.0, 0.0)
        for i in np.nonzero((r > self.lo) & (r < self.hi))[0]:
            out[i] = quad(self.f, r[i], self.hi, epsabs=0, epsrel=1e-12)[0] / self.A
        return np.minimum(out, 1.0)      # quadrature roundoff near r = 1

    def laplacian(self, r):
        """v'' + (2/r) v' with v' = -f/A."""
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0, r, 1.0)
        return (-self.fprime(r) - 2.0 * self.f(r) / safe) / self.A

    def laplacian_squared_integral(self):
        """4 pi int (Delta v)^2 r^2 dr over the support."""
        s = 0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * _GL_X
        return float(4.0 * np.pi * 0.5 * (self.hi - self.lo)
                     * np.sum(_GL_W * self.laplacian(s) ** 2 * s * s))


def bump_test_function(grid):
    """Sample the radial bump (1 on [0,1], 0 beyond 2) on ``grid``."""
    if grid.rmax < 3.0:
        raise ContractError("bump test function needs R >= 3")
    bump = Bump()
    prof = RadialProfile(bump.value(grid.r), grid, 0.0)
    prof.meta["bump"] = bump
    return prof


def _exp_weighted_integral(u_mu, weight):
    """4 pi int_0^inf e^{u_mu} weight(r) r^2 dr; beyond the grid u_mu is
    continued by its far-field fit."""
    r, v = u_mu.r, u_mu.values
    inner = u_mu.grid.integrate(np.exp(v) * weight(r) * r * r)
    a, b, c = far_field_fit(v, r)
    R = r[-1]
    slope = b - c / R ** 2
    tail = gaussian_tail_moment(
        2, R, 0.0, v[-1], slope,
        extra=lambda s, z: np.exp(c / s - c / R + c * z / R ** 2) * weight(s))
    return float(4.0 * np.pi * (inner + tail))


def quadratic_form_x_only(v, u_mu):
    """4 pi int [(Delta v)^2 - e^{u_mu} v^2] r^2 dr for the bump profile ``v``.

    Returns (form, laplacian_term, exponential_term).
    """
    bump = v.meta.get("bump")
    if bump is None:
        raise ContractError("quadratic form expects a profile from bump_test_function")
    lap = bump.laplacian_squared_integral()
    spline = CubicSpline(v.r, v.values, bc_type=((1, 0.0), "not-a-knot"))

    def vsq(s):
        s = np.asarray(s, dtype=float)
        out = np.where(s <= bump.lo, 1.0, 0.0)
        mid = (s > bump.lo) & (s < bump.hi)
        out = np.where(mid, spline(np.clip(s, bump.lo, bump.hi)), out)
        return out * out

    ex = _exp_weighted_integral(u_mu, vsq)
    return lap - ex, lap, ex


@dataclass
class MuSearch:
    mu_star: float
    form: float
    history: list = field(default_factory=list)


def find_mu_star(u1, v=None, mu_cap=2.0 ** 20):
    """Double mu from 1 until the x-only form of the bump is negative.

    Each u_mu is evaluated on u1's grid scaled by 1/mu, so its values are
    exact samples of u1 shifted by 4 log mu.
    """
    v = bump_test_function(RadialGrid(R=4.0, n=4000)) if v is None else v
    mu, hist = 1.0, []
    while mu <= mu_cap:
        u_mu = rescale_solution(u1, mu, grid=u1.grid.scaled(1.0 / mu))
        form = quadratic_form_x_only(v, u_mu)[0]
        hist.append((mu, form))
        if form < 0:
            return MuSearch(mu, form, hist)
        mu *= 2.0
    raise TruncationError("no negative form value up to the mu cap", last_sample=hist[-1])


class RadialBiLaplacian:
    """Discrete Delta_rad on q = r w at interior nodes (q = 0 at 0 and R).

    With lumped masses m_i the symmetric form is K = M^{-1/2} S M^{-1/2}
    in p = M^{1/2} q; the bi-Laplacian is K @ K (composition of two
    radial Laplacians).
    """

    def __init__(self, grid):
        r = grid.r
        h = np.diff(r)
        self.grid = grid
        self.m = 0.5 * (h[:-1] + h[1:])
        sq = np.sqrt(self.m)
        self.diag = -(1.0 / h[:-1] + 1.0 / h[1:]) / self.m
        self.off = (1.0 / h[1:-1]) / (sq[:-1] * sq[1:])
        self.K = sp.diags([self.off, self.diag, self.off], [-1, 0, 1], format="csc")

    @property
    def r(self):
        return self.grid.r[1:-1]

    def to_p(self, w):
        return np.sqrt(self.m) * self.r * w[1:-1]

    def to_w(self, p):
        q = p / np.sqrt(self.m)
        r = self.grid.r
        w = np.empty(r.size)
        w[1:-1] = q / self.r
        w[-1] = 0.0
        # even in r: w ~ w0 + w2 r^2 through the first two interior nodes
        r1, r2 = r[1], r[2]
        w[0] = (w[1] * r2 ** 2 - w[2] * r1 ** 2) / (r2 ** 2 - r1 ** 2)
        return w

    def shifted_solve(self, rhs, t, times=1):
        """Solve (K - t)^times x = rhs with a banded tridiagonal solver."""
        ab = np.zeros((3, self.diag.size))
        ab[0, 1:] = self.off
        ab[1] = self.diag - t
        ab[2, :-1] = self.off
        x = rhs
        for _ in range(times):
            x = solve_banded((1, 1), ab, x, check_finite=False)
        return x

    def eigenvalues(self):
        return eigh_tridiagonal(self.diag, self.off, eigvals_only=True)


@dataclass
class EigenPair:
    nu0: float
    v0: RadialProfile
    backward_error: float
    relative_residual: float


def _exp_nodes(u_mu):
    return np.exp(u_mu.values[1:-1])


def eigen_grid(u_mu):
    """Uniform grid with the extent and node count of ``u_mu``'s grid.

    The graded grids used for the fixed point put nodes very close to the
    origin, which makes the discrete bi-Laplacian needlessly ill
    conditioned; a uniform grid is used for the eigenproblem instead.
    """
    g = u_mu.grid
    return RadialGrid(g.R, g.n, 1.0, g.scale)


def on_grid(u_mu, grid):
    """u_mu resampled onto ``grid`` (no-op when the grids agree)."""
    if grid.same_as(u_mu.grid):
        return u_mu
    return rescale_solution(u_mu, 1.0, grid=grid)


def v0_eigenpair(u_mu, grid=None, refine_steps=3):
    """Lowest eigenpair of w -> Delta^2 w - e^{u_mu} w (radial, truncated at R).

    Solved on ``grid`` (default :func:`eigen_grid`) with u_mu resampled.
    Shift-invert Lanczos below the spectrum, then Rayleigh-quotient
    refinement. ``backward_error`` is ||A p - nu p|| / ((||A||_1 + |nu|) ||p||).
    The returned v0 is positive near the origin with ||v0|| = 1 in the
    measure 4 pi r^2 dr.
    """
    grid = eigen_grid(u_mu) if grid is None else grid
    u_mu = on_grid(u_mu, grid)
    op = RadialBiLaplacian(grid)
    E = _exp_nodes(u_mu)
    A = (op.K @ op.K - sp.diags(E)).tocsc()
    sigma = -1.1 * float(E.max())
    try:
        val, vec = spla.eigsh(A, k=1, sigma=sigma, which="LM", tol=1e-14,
                               v0=np.ones(A.shape[0]))
    except Exception as exc:  # ARPACK failures
        raise SolverError(f"eigen solve failed: {exc}") from exc
    nu, p = float(val[0]), vec[:, 0]
    eye = sp.identity(A.shape[0], format="csc")
    for _ in range(refine_steps):
        try:
            p = spla.splu((A - nu * eye).tocsc()).solve(p)
        except RuntimeError:
            break
        p /= np.linalg.norm(p)
        nu = float(p @ (A @ p))
    resid = np.linalg.norm(A @ p - nu * p)
    norm_a = float(abs(A).sum(axis=0).max())
    backward = resid / ((norm_a + abs(nu)) * np.linalg.norm(p))
    if p[np.argmax(np.abs(p))] < 0:
        p = -p
    p = p / np.sqrt(4.0 * np.pi * (p @ p))
    v0 = RadialProfile(op.to_w(p), u_mu.grid, 0.0)
    return EigenPair(nu, v0, float(backward), float(resid / (abs(nu) * np.linalg.norm(p) or 1)))


def f_of_t(t, v0, u_mu, _op=None):
    """f(t) = ||v0||^2 - <e^{u_mu} v0, (Delta - t)^{-2} v0> in the measure 4 pi r^2 dr."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    u_mu = on_grid(u_mu, v0.grid)
    op = RadialBiLaplacian(u_mu.grid) if _op is None else _op
    p = op.to_p(v0.values)
    try:
        w = op.shifted_solve(p, float(t), times=2)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"shifted solve failed at t={t}: {exc}") from exc
    return float(4.0 * np.pi * (p @ p - p @ (_exp_nodes(u_mu) * w)))


def solve_norm(t, v0, u_mu, _op=None):
    """||(Delta - t)^{-2} v0|| (discrete, radial measure)."""
    u_mu = on_grid(u_mu, v0.grid)
    op = RadialBiLaplacian(u_mu.grid) if _op is None else _op
    w = op.shifted_solve(op.to_p(v0.values), float(t), times=2)
    return float(np.sqrt(4.0 * np.pi * (w @ w)))


def norm_squared(v0):
    op = RadialBiLaplacian(v0.grid)
    p = op.to_p(v0.values)
    return float(4.0 * np.pi * (p @ p))


def decayed_t(v0, u_mu, factor=100.0, t0=None):
    """Smallest t on a doubling ladder where the solve norm has dropped by
    ``factor`` relative to t = 0."""
    u_mu = on_grid(u_mu, v0.grid)
    op = RadialBiLaplacian(u_mu.grid)
    base = solve_norm(0.0, v0, u_mu, op)
    t = t0 if t0 is not None else 1.0 / u_mu.grid.rmax ** 2
    for _ in range(200):
        if solve_norm(t, v0, u_mu, op) <= base / factor:
            return t
        t *= 2.0
    raise TruncationError("solve norm did not decay")


@dataclass
class NegativeIndexReport:
    lam: float
    mu_scaling: float
    nu0: float
    counts: int
    f_samples: list = field(default_factory=list)


def mode_shifts(lam, kmax):
    """t_k = (2 pi k / lam)^2 for k = 0..kmax."""
    k = np.arange(kmax + 1)
    return (2.0 * np.pi * k / lam) ** 2


def count_negative(lam, kmax, v0, u_mu, mu_scaling=np.nan, nu0=np.nan):
    """Number of k in 0..kmax with f((2 pi k/lam)^2) < 0."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    u_mu = on_grid(u_mu, v0.grid)
    op = RadialBiLaplacian(u_mu.grid)
    ts = mode_shifts(lam, kmax)
    fs = ordered_map(lambda t: f_of_t(t, v0, u_mu, op), ts)
    samples = list(zip(ts.tolist(), fs))
    if fs[-1] <= 0:
        raise TruncationError(f"f is not positive at kmax={kmax}", last_sample=samples[-1])
    count = int(sum(1 for f in fs if f < 0))
    return NegativeIndexReport(float(lam), float(mu_scaling), float(nu0), count, samples)


def sign_change_t(v0, u_mu, rtol=1e-10):
    """Bisection for the first t > 0 with f(t) = 0 (f(0) must be negative)."""
    u_mu = on_grid(u_mu, v0.grid)
    op = RadialBiLaplacian(u_mu.grid)
    lo, hi = 0.0, 1.0 / u_mu.grid.rmax ** 2
    if f_of_t(0.0, v0, u_mu, op) >= 0:
        raise DomainError("f(0) is not negative")
    while f_of_t(hi, v0, u_mu, op) < 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if f_of_t(mid, v0, u_mu, op) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def kmax_for(lam, t_crit, margin=1.2):
    """Smallest kmax whose shift exceeds margin * t_crit."""
    return int(np.ceil(margin * lam * np.sqrt(t_crit) / (2.0 * np.pi))) + 1


def two_mode_bruteforce(w, u_mu, lam, modes=(1, 2), n4=32):
    """Bilinear form B(phi_i, phi_j), phi_k = w(r) cos(2 pi k x4/lam), by
    tensor quadrature on a (r, x4) grid with a spectral x4 derivative.

    Returns the 2x2 matrix from brute force and from the per-mode formula.
    """
    u_mu = on_grid(u_mu, w.grid)
    op = RadialBiLaplacian(u_mu.grid)
    m, r = op.m, op.r
    q = r * w.values[1:-1]
    # Delta_rad w = (1/r) (M^{-1} S q)
    h = np.diff(u_mu.grid.r)
    Sq = np.zeros_like(q)
    Sq += -(1.0 / h[:-1] + 1.0 / h[1:]) * q
    Sq[1:] += q[:-1] / h[1:-1]
    Sq[:-1] += q[1:] / h[1:-1]
    lap_w = (Sq / m) / r
    x4 = np.arange(n4) * lam / n4
    kvec = 2.0 * np.pi * np.fft.rfftfreq(n4, d=lam / n4)
    E = np.exp(u_mu.values[1:-1])
    weight_r = 4.0 * np.pi * m * r * r
    phis, laps = [], []
    for k in modes:
        c = np.cos(2.0 * np.pi * k * x4 / lam)
        c_xx = np.fft.irfft(-(kvec ** 2) * np.fft.rfft(c), n=n4)
        phis.append(np.outer(w.values[1:-1], c))
        laps.append(np.outer(lap_w, c) + np.outer(w.values[1:-1], c_xx))
    brute = np.zeros((len(modes), len(modes)))
    formula = np.zeros_like(brute)
    for a in range(len(modes)):
        for b in range(len(modes)):
            integrand = laps[a] * laps[b] - E[:, None] * phis[a] * phis[b]
            brute[a, b] = np.sum(weight_r[:, None] * integrand) * lam / n4
            if a == b:
                tk = (2.0 * np.pi * modes[a] / lam) ** 2
                fac = lam if modes[a] == 0 else lam / 2.0
                formula[a, b] = fac * np.sum(weight_r * ((lap_w - tk * w.values[1:-1]) ** 2
                                                         - E * w.values[1:-1] ** 2))
    return brute, formula
