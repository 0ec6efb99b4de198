"""Graded radial grids, sampled profiles and the quadrature they share."""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .. import kernels
from ..errors import ContractError, DomainError

_GL3_X, _GL3_W = np.polynomial.legendre.leggauss(3)
_LAG_X, _LAG_W = np.polynomial.laguerre.laggauss(60)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes r_i = R (i/(n-1))^power, denser near the origin."""

    R: float = 40.0
    n: int = 4000
    power: float = 1.5
    scale: float = 1.0   # nodes are multiplied by scale (used for u_mu grids)

    def __post_init__(self):
        if self.n < 8:
            raise ContractError("radial grid needs at least 8 nodes")
        if self.R <= 0 or self.scale <= 0:
            raise DomainError("radius and scale must be positive")

    @cached_property
    def r(self):
        xi = np.arange(self.n) / (self.n - 1)
        return self.scale * self.R * xi ** self.power

    @property
    def rmax(self):
        return self.scale * self.R

    def scaled(self, factor):
        """Same node pattern with every radius multiplied by ``factor``."""
        return RadialGrid(self.R, self.n, self.power, self.scale * factor)

    def same_as(self, other):
        return (self.R, self.n, self.power, self.scale) == (
            other.R, other.n, other.power, other.scale)

    @cached_property
    def panels(self):
        """Cubic Lagrange panel weights: integral over [r_i, r_i+1] of the
        interpolant through four neighbouring nodes is sum_k f[idx[i,k]] W[i,k]."""
        r = self.r
        n = r.size
        j0 = np.clip(np.arange(n - 1) - 1, 0, n - 4)
        idx = j0[:, None] + np.arange(4)[None, :]
        nodes = r[idx]                                   # (n-1, 4)
        a, b = r[:-1], r[1:]
        t = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _GL3_X[None, :]
        W = np.zeros((n - 1, 4))
        for k in range(4):
            L = np.ones_like(t)
            for m in range(4):
                if m != k:
                    L *= (t - nodes[:, m:m + 1]) / (nodes[:, k:k + 1] - nodes[:, m:m + 1])
            W[:, k] = 0.5 * (b - a) * (L @ _GL3_W)
        return idx, W

    def cumulative(self, f):
        """Running integrals int_0^{r_i} f for each row of ``f``."""
        idx, W = self.panels
        return kernels.panel_cumsum(f, idx, W)

    def integrate(self, f):
        return self.cumulative(f)[..., -1]


@dataclass(eq=False)
class RadialProfile:
    """Radial function sampled on a RadialGrid, tagged with its ε."""

    values: np.ndarray
    grid: RadialGrid
    epsilon: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ContractError("profile length does not match its grid")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("profile has non-finite entries")

    @property
    def r(self):
        return self.grid.r

    def copy(self, values=None, epsilon=None):
        return RadialProfile(self.values.copy() if values is None else values,
                             self.grid, self.epsilon if epsilon is None else epsilon)


def tail_slope(u, r):
    """Slope of the linear extension used beyond the last node."""
    return (u[-1] - u[-2]) / (r[-1] - r[-2])


def gaussian_tail_moment(m, R, eps, uR, beta, extra=None):
    """int_R^inf s^m exp(-eps s^2 + uR + beta (s-R)) ds (times ``extra(s)``
    if given) by Gauss-Laguerre in the decay variable."""
    kappa = 2.0 * eps * R - beta
    if kappa <= 0:
        return np.inf
    z = _LAG_X / kappa
    s = R + z
    vals = np.exp(-eps * z ** 2) * s ** m
    if extra is not None:
        vals = vals * extra(s, z)
    return np.exp(uR - eps * R * R) / kappa * float(np.sum(_LAG_W * vals))


def check_same_grid(a, b):
    if not a.grid.same_as(b.grid):
        raise ContractError("profiles live on different grids")
