"""Truncated strip grids, sampled fields and the finite-difference operators
for Delta u + e^{u0}(e^u - 1) around u0 = log(2 sech^2 x).

Fields are stored on the full grid [-X, X] x [0, lambda]. Solvers work on
the even-in-x half grid x >= 0 (mirror condition at x = 0), which keeps
iterates exactly even and removes the odd translation mode.
"""
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ..errors import ContractError, DomainError

X_BOUNDARY = ("neumann", "dirichlet")


@dataclass(frozen=True)
class StripGrid:
    """Uniform grid on [-X, X] x [0, lam]; mirrored ghost rows in y.

    ``x_bc`` is the closure for the perturbation at x = +-X: homogeneous
    Neumann (default) or homogeneous Dirichlet.
    """

    lam: float
    X: float = 20.0
    nx: int = 2001
    ny: int = 41
    x_bc: str = "neumann"

    def __post_init__(self):
        if self.lam <= 0 or self.X <= 0:
            raise DomainError("strip width and truncation must be positive")
        if self.nx < 3 or self.ny < 3:
            raise ContractError("need at least 3 nodes per direction")
        if self.nx % 2 == 0:
            raise ContractError("nx must be odd so that x = 0 is a node")
        if self.x_bc not in X_BOUNDARY:
            raise ContractError(f"x_bc must be one of {X_BOUNDARY}")

    @property
    def hx(self):
        return 2.0 * self.X / (self.nx - 1)

    @property
    def hy(self):
        return self.lam / (self.ny - 1)

    @cached_property
    def x(self):
        return np.linspace(-self.X, self.X, self.nx)

    @cached_property
    def y(self):
        return np.linspace(0.0, self.lam, self.ny)

    @property
    def center(self):
        return (self.nx - 1) // 2

    @property
    def x_half(self):
        return self.x[self.center:]

    def with_lambda(self, lam):
        return replace(self, lam=float(lam))

    def matches(self, other):
        return (self.nx, self.ny, self.x_bc) == (other.nx, other.ny, other.x_bc) and \
            np.isclose(self.X, other.X, rtol=0, atol=1e-14) and \
            np.isclose(self.lam, other.lam, rtol=0, atol=1e-14)

    # -- half-grid bookkeeping ------------------------------------------
    @property
    def n_half(self):
        """Number of unknown x columns on the half grid."""
        m = self.center + 1
        return m if self.x_bc == "neumann" else m - 1

    @property
    def n_unknowns(self):
        return self.n_half * self.ny

    @cached_property
    def weights_x(self):
        """Half-grid x weights reproducing the full-grid trapezoid rule
        for even functions."""
        w = np.full(self.n_half, 2.0 * self.hx)
        w[0] = self.hx
        if self.x_bc == "neumann":
            w[-1] = self.hx
        return w

    @cached_property
    def weights_y(self):
        w = np.full(self.ny, self.hy)
        w[0] = w[-1] = 0.5 * self.hy
        return w

    @cached_property
    def weights(self):
        return np.outer(self.weights_x, self.weights_y).ravel()


def trivial_solution_2d(x, scale=1.0):
    """log(2 c^2 sech^2(c x)); c = 1 is the trivial solution u0."""
    cx = np.abs(np.asarray(x, dtype=float) * scale)
    # log sech(t) = -t - log((1 + e^{-2t}) / 2), stable for large t
    log_sech = -cx - np.log1p(np.exp(-2.0 * cx)) + np.log(2.0)
    out = np.log(2.0 * scale * scale) + 2.0 * log_sech
    return float(out) if out.ndim == 0 else out


def base_exponential(x, scale=1.0):
    """e^{u0} = 2 c^2 sech^2(c x)."""
    return 2.0 * scale ** 2 / np.cosh(scale * np.asarray(x, dtype=float)) ** 2


@dataclass(eq=False)
class StripField:
    """Perturbation w on the full grid; the solution is base + w with
    base = log(2 c^2 sech^2(c x)), c = ``base_scale``."""

    values: np.ndarray
    grid: StripGrid
    base_scale: float = 1.0
    symmetric: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ContractError("field shape does not match its grid")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("field has non-finite entries")

    @property
    def half(self):
        return self.values[self.grid.center:]

    def full_solution(self):
        return trivial_solution_2d(self.grid.x, self.base_scale)[:, None] + self.values

    def unknowns(self):
        return self.half[: self.grid.n_half].ravel()

    @classmethod
    def from_unknowns(cls, vec, grid, base_scale=1.0, **kw):
        half = np.zeros((grid.center + 1, grid.ny))
        half[: grid.n_half] = np.asarray(vec).reshape(grid.n_half, grid.ny)
        full = np.concatenate([half[:0:-1], half], axis=0)
        return cls(full, grid, base_scale, symmetric=True, **kw)

    def inner(self, other):
        """Discrete L^2 product on the strip (trapezoid in x and y)."""
        g = self.grid
        wx = np.full(g.nx, g.hx)
        wx[0] = wx[-1] = 0.5 * g.hx
        return float(np.sum(wx[:, None] * g.weights_y[None, :] * self.values * other.values))

    def norm(self):
        return np.sqrt(self.inner(self))


def zero_field(grid):
    return StripField(np.zeros((grid.nx, grid.ny)), grid, symmetric=True)


# -- operators -----------------------------------------------------------

def neumann_second_difference(n, h):
    """Second difference with mirrored ghosts at both ends."""
    main = np.full(n, -2.0)
    lo = np.ones(n - 1)
    up = np.ones(n - 1)
    up[0] = 2.0
    lo[-1] = 2.0
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr") / h ** 2


def half_x_second_difference(grid):
    """d^2/dx^2 on the half-grid unknowns: mirror at x = 0, closure at X."""
    n, h = grid.n_half, grid.hx
    main = np.full(n, -2.0)
    lo = np.ones(n - 1)
    up = np.ones(n - 1)
    up[0] = 2.0
    if grid.x_bc == "neumann":
        lo[-1] = 2.0
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr") / h ** 2


def unit_y_second_difference(ny):
    """d^2/dy^2 on the unit-width strip (Neumann mirror)."""
    return neumann_second_difference(ny, 1.0 / (ny - 1))


class HalfOperators:
    """Sparse pieces of the rescaled map on the half grid.

    F(lam, w) = Dxx w + lam^{-2} Dyy_unit w + e^{u0} (e^w - 1)
    with its linearization L = Dxx + lam^{-2} Dyy_unit + e^{u0}.
    """

    def __init__(self, grid, base_scale=1.0):
        self.grid = grid
        nx, ny = grid.n_half, grid.ny
        self.Dxx = sp.kron(half_x_second_difference(grid), sp.identity(ny), format="csr")
        self.Dyy = sp.kron(sp.identity(nx), unit_y_second_difference(ny), format="csr")
        xh = grid.x_half[: grid.n_half]
        self.E0 = np.repeat(base_exponential(xh, base_scale), ny)

    def laplacian(self, lam):
        return (self.Dxx + self.Dyy / lam ** 2).tocsr()

    def residual(self, lam, w):
        return self.Dxx @ w + (self.Dyy @ w) / lam ** 2 + self.E0 * np.expm1(w)

    def jacobian(self, lam, w):
        return (self.laplacian(lam) + sp.diags(self.E0 * np.exp(w))).tocsc()

    def linearization(self, lam):
        return (self.laplacian(lam) + sp.diags(self.E0)).tocsr()

    def d_lambda(self, lam, w):
        """Partial derivative of F in lam: -2 lam^{-3} Dyy_unit w."""
        return -2.0 * (self.Dyy @ w) / lam ** 3


def residual_2d(grid, u):
    """Centered-difference Delta u + e^{base}(e^u - 1) on the full grid.

    Ghost rows mirror the field in y; at x = +-X the mirror is used with
    the Neumann closure and the residual is zero (boundary data) with the
    Dirichlet closure. Works for any field, even or not.
    """
    if not grid.matches(u.grid):
        raise ContractError("field lives on a different grid")
    v = u.values
    hx, hy = grid.hx, grid.hy
    ext = np.pad(v, ((1, 1), (1, 1)), mode="reflect")
    lap = ((ext[2:, 1:-1] - 2.0 * v + ext[:-2, 1:-1]) / hx ** 2
           + (ext[1:-1, 2:] - 2.0 * v + ext[1:-1, :-2]) / hy ** 2)
    res = lap + base_exponential(grid.x, u.base_scale)[:, None] * np.expm1(v)
    if grid.x_bc == "dirichlet":
        res[0] = 0.0
        res[-1] = 0.0
    return StripField(res, grid, u.base_scale, symmetric=u.symmetric)


def sup_norm(f):
    return float(np.max(np.abs(f.values)))
