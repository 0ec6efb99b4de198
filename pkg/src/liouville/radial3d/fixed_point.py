"""The regularized fixed-point map T_eps, its damped Picard iteration and
the continuation eps -> 0."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError, DomainError
from .grid import RadialGrid, RadialProfile, gaussian_tail_moment, tail_slope


def _moments(u, grid, eps, powers):
    """Running integrals A_m(r) = int_0^r s^m g and complements
    B_m(r) = int_r^inf s^m g with g = exp(-eps s^2 + u).

    The part beyond R uses the linear extension of u with the last slope.
    Returns dicts A, B and the tail values.
    """
    r = grid.r
    g = np.exp(-eps * r * r + u)
    rows = np.stack([r ** m * g for m in powers])
    cum = grid.cumulative(rows)
    beta = tail_slope(u, r)
    A, B, tails = {}, {}, {}
    for k, m in enumerate(powers):
        t = gaussian_tail_moment(m, r[-1], eps, u[-1], beta)
        if not np.isfinite(t):
            raise DomainError("profile does not decay at the truncation radius; "
                              "the tail integral diverges")
        tails[m] = t
        A[m] = cum[k]
        B[m] = cum[k, -1] - cum[k] + t
    return A, B, tails


def _apply_kernel(u, grid, eps):
    r = grid.r
    A, B, _ = _moments(u, grid, eps, (1, 2, 3, 4))
    out = np.empty_like(r)
    ri = r[1:]
    out[1:] = (-(3.0 * ri ** 2 * A[2][1:] + A[4][1:]) / (6.0 * ri)
               - (ri ** 2 * B[1][1:] + 3.0 * B[3][1:]) / 6.0)
    out[0] = -0.5 * B[3][0]
    return out


def apply_T_eps(u, epsilon):
    """Apply T_eps to a profile.

    T_eps u(r) = -(1/6r) int_0^r s^2 (3r^2 + s^2) g ds
                 - (1/6) int_r^inf s (r^2 + 3 s^2) g ds,   g = e^{-eps s^2 + u}.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    return RadialProfile(_apply_kernel(u.values, u.grid, float(epsilon)), u.grid, epsilon)


def integral_equation_residual(u, epsilon=0.0, rmax=None):
    """sup over r <= rmax of |u - T_eps u|; epsilon = 0 is the
    unregularized equation (needs a decaying profile)."""
    rmax = u.grid.rmax if rmax is None else rmax
    res = np.abs(u.values - _apply_kernel(u.values, u.grid, float(epsilon)))
    return float(res[u.r <= rmax].max())


def tail_bound(u, epsilon):
    """Bound on the part of int_R^inf s^3 g beyond R using e^{u(s)} <= e^{u(R)}
    (profiles are decreasing). Infinite when epsilon = 0."""
    if epsilon <= 0:
        return np.inf
    R = u.grid.rmax
    return gaussian_tail_moment(3, R, epsilon, u.values[-1], 0.0)


@dataclass
class PicardReport:
    iterations: int
    residual_history: list
    damping: float
    epsilon: float = 0.0

    @property
    def residual(self):
        return self.residual_history[-1]


def picard_solve(epsilon, grid=None, tol=1e-11, max_iter=20000, init=None,
                 stall_ratio=0.97, stall_steps=10, min_damping=1.0 / 16):
    """Damped Picard iteration u <- u + w (T_eps u - u).

    The damping w starts at 1 and is halved (floor ``min_damping``)
    whenever the residual fails to decrease, or after ``stall_steps``
    consecutive steps whose contraction ratio exceeds ``stall_ratio``.
    epsilon = 0 is accepted for warm starts close to the limit profile.
    """
    if epsilon < 0 or epsilon > 1:
        raise DomainError("epsilon must lie in [0, 1]")
    if tol <= 0:
        raise DomainError("tol must be positive")
    grid = grid if grid is not None else (init.grid if init is not None else RadialGrid())
    u = np.zeros(grid.n) if init is None else np.array(init.values, dtype=float)
    omega, slow, hist = 1.0, 0, []
    for it in range(max_iter + 1):
        Tu = _apply_kernel(u, grid, float(epsilon))
        res = float(np.max(np.abs(u - Tu)))
        hist.append(res)
        if not np.isfinite(res):
            break
        if res <= tol:
            return (RadialProfile(u, grid, epsilon),
                    PicardReport(it, hist, omega, epsilon))
        if len(hist) > 1:
            if res >= hist[-2]:
                omega, slow = max(omega / 2, min_damping), 0
            elif res > stall_ratio * hist[-2]:
                slow += 1
                if slow >= stall_steps:
                    omega, slow = max(omega / 2, min_damping), 0
            else:
                slow = 0
        u = u + omega * (Tu - u)
    raise ConvergenceError(f"Picard iteration at eps={epsilon:g} did not reach {tol:g}",
                           last_residual=hist[-1])


def default_schedule(eps_max=1.0, eps_min=2.0 ** -17, ratio=0.5):
    out, e = [], float(eps_max)
    while e >= eps_min * (1 - 1e-12):
        out.append(e)
        e *= ratio
    return out


@dataclass
class EpsContinuation:
    profiles: list
    reports: list
    limit: RadialProfile
    order: float
    measured_order: float = np.nan
    differences: list = field(default_factory=list)


def continue_eps_to_zero(schedule=None, grid=None, tol=1e-11, max_iter=20000,
                         compare_rmax=10.0):
    """Picard solves along a decreasing schedule, each warm-started from the
    previous stage, then a Richardson limit in eps.

    The order p of the eps-dependence is measured from the last three
    stages and used in u_lim = u_c + (u_c - u_b) / ((e_b/e_c)^p - 1).
    """
    schedule = default_schedule() if schedule is None else [float(e) for e in schedule]
    if len(schedule) < 2 or any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("schedule must be strictly decreasing with >= 2 entries")
    if schedule[-1] > 1e-3:
        raise DomainError("schedule must reach eps <= 1e-3")
    grid = grid if grid is not None else RadialGrid()
    profiles, reports, init = [], [], None
    for k, eps in enumerate(schedule):
        try:
            prof, rep = picard_solve(eps, grid, tol, max_iter, init=init)
        except ConvergenceError as exc:
            raise ConvergenceError(f"stage {k} (eps={eps:g}): {exc}",
                                   last_residual=exc.last_residual, stage=k) from exc
        profiles.append(prof)
        reports.append(rep)
        init = prof
    mask = grid.r <= compare_rmax
    diffs = [float(np.max(np.abs(a.values[mask] - b.values[mask])))
             for a, b in zip(profiles, profiles[1:])]
    measured = np.nan
    if len(profiles) >= 3:
        ea, eb, ec = schedule[-3:]
        d1, d2 = diffs[-2], diffs[-1]
        if d1 > 0 and d2 > 0:
            # d ~ C (e^p - e'^p); for a fixed ratio q = eb/ea = ec/eb, d1/d2 = (ea/eb)^p
            measured = float(np.log(d1 / d2) / np.log(ea / eb))
    # an implausible measured order (pre-asymptotic stages) falls back to 1
    order = measured if 0.25 <= measured <= 4.0 else 1.0
    ub, uc = profiles[-2].values, profiles[-1].values
    q = (schedule[-2] / schedule[-1]) ** order
    limit = RadialProfile(uc + (uc - ub) / (q - 1.0), grid, 0.0)
    return EpsContinuation(profiles, reports, limit, order, measured, diffs)
