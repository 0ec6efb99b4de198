"""Local bifurcation analysis, Newton solves and arclength continuation of
the branch leaving u0 at a kernel width, plus the exact-period rescaling
and reflection tools."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import (ContinuationStall, ContractError, ConvergenceError,
                      DegeneracyError, DomainError, SolverError)
from .grid import (HalfOperators, StripField, StripGrid, base_exponential,
                   residual_2d, sup_norm)
from .spectrum import x_levels, y_symbols

DEGENERACY_TOL = 1e-4


@dataclass
class BifurcationDiagnostics:
    lambda_star: float
    u_star: StripField
    psi: StripField
    lambda1: float
    u2: StripField
    lambda2: float
    mode: int = 1
    lambda2_without_u2: float = np.nan
    kernel_residual: float = np.nan
    u2_residual: float = np.nan
    grid: StripGrid = None


def _discrete_kernel_width(grid, j, kappa0):
    """Width where kappa0 equals the discrete Neumann y-symbol of mode j."""
    n = grid.ny - 1
    s_unit = 4.0 * n ** 2 * np.sin(np.pi * j / (2.0 * n)) ** 2
    return float(np.sqrt(s_unit / kappa0))


def _winner(grid, vec):
    return grid.weights * vec


def bifurcation_diagnostics(lambda_star, grid=None, tol=1e-3):
    """Kernel, first and second branch coefficients at a kernel width.

    The width is refined to the discrete value lambda_h at which the
    grid's L has an exact kernel, sech-like phi(x) cos(pi j y/lambda_h).
    lambda1 and lambda2 follow the Lyapunov–Schmidt expansion with
    F_uu[v,w] = e^{u0} v w, F_uuu = e^{u0} v w z and
    F_lambda,u[v] = -(2/lambda^3) d^2 v/dy^2 (unit-width variables).
    """
    grid = StripGrid(lambda_star) if grid is None else grid
    kappa, phi = x_levels(grid, 8)
    k0 = float(kappa[0])
    j = int(round(lambda_star * np.sqrt(k0) / np.pi))
    if j < 1:
        raise ContractError("no kernel width near the requested lambda")
    lam_h = _discrete_kernel_width(grid, j, k0)
    if abs(lam_h - lambda_star) > tol:
        raise ContractError(f"lambda*={lambda_star:g} is not within {tol:g} of the "
                            f"grid's kernel width {lam_h:.8g}")
    g = grid.with_lambda(lam_h)
    # per-mode spectrum of the discrete L at lam_h decides simplicity
    s = y_symbols(g)
    near = [(i, jj) for i, kk in enumerate(kappa) for jj, sj in enumerate(s)
            if abs(kk - sj) < DEGENERACY_TOL]
    if len(near) != 1:
        raise DegeneracyError(f"kernel at lambda={lam_h:.8g} has dimension {len(near)}")
    ops = HalfOperators(g)
    L = ops.linearization(lam_h)
    W = g.weights
    ymode = np.cos(np.pi * j * g.y / lam_h)
    u_star = np.outer(phi[: g.n_half, 0], ymode).ravel()
    psi = u_star.copy()
    kernel_res = float(np.linalg.norm(L @ u_star) / np.linalg.norm(u_star))
    E0 = ops.E0

    def ip(a, b):
        return float(W @ (a * b))

    Mu = ops.d_lambda(lam_h, u_star)     # F_lambda,u[u*]
    denom = ip(psi, Mu)
    lambda1 = -0.5 * ip(psi, E0 * u_star ** 2) / denom
    rhs = -0.5 * E0 * u_star ** 2
    u2 = _bordered_solve(L, psi, W * u_star, rhs)
    r2 = L @ u2 - rhs
    r2 = r2 - ip(r2, psi) / ip(psi, psi) * psi
    cubic = ip(psi, E0 * u_star ** 3) / 6.0
    lambda2 = -(ip(psi, E0 * u_star * u2) + cubic) / denom
    mk = lambda v: StripField.from_unknowns(v, g)
    return BifurcationDiagnostics(lam_h, mk(u_star), mk(psi), lambda1, mk(u2), lambda2,
                                  mode=j, lambda2_without_u2=-cubic / denom,
                                  kernel_residual=kernel_res,
                                  u2_residual=float(np.max(np.abs(r2))), grid=g)


def _bordered_solve(L, col, row, rhs):
    """Solve L x + m col = rhs, row . x = 0 and return x."""
    n = L.shape[0]
    A = sp.bmat([[L, sp.csc_matrix(col[:, None])],
                 [sp.csr_matrix(row[None, :]), None]], format="csc")
    try:
        sol = spla.splu(A).solve(np.append(rhs, 0.0))
    except RuntimeError as exc:
        raise SolverError(f"bordered solve failed: {exc}") from exc
    return sol[:n]


@dataclass
class NewtonHistory:
    residuals: list = field(default_factory=list)


def newton_solve(lam, grid, init=None, tol=1e-10, max_iter=30, history=None,
                 max_backtrack=8):
    """Newton iteration for F(lam, w) = 0 on the even half grid.

    Steps are halved (at most ``max_backtrack`` times) until ||F||_2
    decreases. Returns the converged StripField; ``history`` (if given)
    collects the sup-norm residuals. Raises ConvergenceError after ``max_iter``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    g = grid.with_lambda(lam)
    ops = HalfOperators(g)
    w = np.zeros(g.n_unknowns) if init is None else _as_unknowns(init, g)
    hist = history if history is not None else NewtonHistory()
    last = np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_iter + 1):
            F = ops.residual(lam, w)
            last = float(np.max(np.abs(F)))
            hist.residuals.append(last)
            if not np.isfinite(last):
                break
            if last <= tol:
                out = StripField.from_unknowns(w, g)
                out.meta["newton_residuals"] = list(hist.residuals)
                return out
            try:
                step = spla.splu(ops.jacobian(lam, w)).solve(F)
            except RuntimeError:
                break
            # backtrack on ||F||_2; the full step is tried first, so the
            # final iterations are plain Newton
            f0 = float(np.linalg.norm(F))
            for _ in range(max_backtrack + 1):
                trial = w - step
                if np.linalg.norm(ops.residual(lam, trial)) < f0:
                    break
                step = 0.5 * step
            w = trial
    raise ConvergenceError(f"Newton at lambda={lam:g} did not converge", last_residual=last)


def _as_unknowns(f, grid):
    if isinstance(f, StripField):
        if (f.grid.nx, f.grid.ny) != (grid.nx, grid.ny):
            raise ContractError("initial field has the wrong shape")
        return f.unknowns()
    return np.asarray(f, dtype=float).ravel()


@dataclass
class BranchPoint:
    lam: float
    t: float
    field: StripField
    newton_residual: float


@dataclass
class Branch:
    points: list
    fit: tuple                      # (lambda_star_fit, lambda2_fit)
    cubic_coefficient: float = np.nan
    diagnostics: BifurcationDiagnostics = None

    @property
    def lambdas(self):
        return np.array([p.lam for p in self.points])

    @property
    def amplitudes(self):
        return np.array([p.t for p in self.points])


def fit_branch(ts, lams, tmax=0.2):
    """Least squares lam = c0 + c2 t^2 + c3 t^3 over t <= tmax (t > 0)."""
    ts, lams = np.asarray(ts), np.asarray(lams)
    m = (ts > 0) & (ts <= tmax)
    if m.sum() < 3:
        m = ts > 0
    A = np.stack([np.ones(m.sum()), ts[m] ** 2, ts[m] ** 3], axis=1)
    c0, c2, c3 = np.linalg.lstsq(A, lams[m], rcond=None)[0]
    return float(c0), float(c2), float(c3)


def continue_branch(diag, n_steps=20, ds=0.01, tol=1e-10, max_halvings=5,
                    max_newton=12, fit_tmax=0.2):
    """Pseudo-arclength continuation from (lambda*, 0) with tangent (0, u*).

    The arclength uses the inner product <a, b>/||u*||^2 on the state, so
    steps are measured in the amplitude t = <w, u*>/||u*||^2.
    """
    if ds <= 0:
        raise DomainError("ds must be positive")
    g = diag.grid
    ops = HalfOperators(g)
    W = g.weights
    us = diag.u_star.unknowns()
    nrm2 = float(W @ us ** 2)

    def sip(a, b):
        return float(W @ (a * b)) / nrm2

    lam, w = diag.lambda_star, np.zeros(g.n_unknowns)
    tw, tl = us.copy(), 0.0                      # tangent, unit length
    points = []
    h = ds
    while len(points) < n_steps:
        for attempt in range(max_halvings + 1):
            wp, lp = w + h * tw, lam + h * tl
            ok, wn, ln, res = _corrector(ops, wp, lp, w, lam, tw, tl, h, sip, W, nrm2,
                                         tol, max_newton)
            if ok:
                break
            h *= 0.5
        else:
            raise ContinuationStall(f"step {len(points)} rejected after "
                                    f"{max_halvings} halvings", last_residual=res)
        # new tangent: J z + F_lam * zl = 0, orthogonal-ish continuation of old
        tw, tl = _tangent(ops, wn, ln, tw, tl, sip, W, nrm2)
        w, lam = wn, ln
        t = sip(w, us)
        field_ = StripField.from_unknowns(w, g.with_lambda(lam))
        points.append(BranchPoint(float(lam), t, field_, res))
        h = min(ds, 2.0 * h)
    ts = [p.t for p in points]
    ls = [p.lam for p in points]
    c0, c2, c3 = fit_branch([0.0] + ts, [diag.lambda_star] + ls, fit_tmax)
    return Branch(points, (c0, c2), c3, diag)


def _corrector(ops, w, lam, w0, lam0, tw, tl, h, sip, W, nrm2, tol, max_newton):
    res = np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_newton):
            F = ops.residual(lam, w)
            res = float(np.max(np.abs(F)))
            N = sip(w - w0, tw) + (lam - lam0) * tl - h
            if not np.isfinite(res):
                return False, w, lam, res
            if res <= tol and abs(N) <= 1e-13:
                return True, w, lam, res
            J = ops.jacobian(lam, w)
            Fl = ops.d_lambda(lam, w)
            A = sp.bmat([[J, sp.csc_matrix(Fl[:, None])],
                         [sp.csr_matrix((W * tw / nrm2)[None, :]), sp.csr_matrix([[tl]])]],
                        format="csc")
            try:
                d = spla.splu(A).solve(-np.append(F, N))
            except RuntimeError:
                return False, w, lam, res
            w = w + d[:-1]
            lam = lam + d[-1]
    F = ops.residual(lam, w)
    res = float(np.max(np.abs(F)))
    return res <= tol, w, lam, res


def _tangent(ops, w, lam, tw0, tl0, sip, W, nrm2):
    J = ops.jacobian(lam, w)
    Fl = ops.d_lambda(lam, w)
    A = sp.bmat([[J, sp.csc_matrix(Fl[:, None])],
                 [sp.csr_matrix((W * tw0 / nrm2)[None, :]), sp.csr_matrix([[tl0]])]],
                format="csc")
    rhs = np.zeros(A.shape[0])
    rhs[-1] = 1.0
    z = spla.splu(A).solve(rhs)
    zw, zl = z[:-1], z[-1]
    nz = np.sqrt(sip(zw, zw) + zl * zl)
    return zw / nz, zl / nz


# -- exact period, reflection and the stencil oracle -------------------------

def rescale_to_exact_period(u, epsilon):
    """Map a solution on width (1+eps) pi k to one on width pi k.

    v(x, y) = u((1+eps) x, (1+eps) y) + 2 log(1+eps) solves the same
    equation; on the grid with every spacing divided by (1+eps) its nodal
    values are those of u plus the constant. The trivial part becomes
    log(2 c^2 sech^2(c x)) with c multiplied by (1+eps), so the stored
    perturbation is unchanged.
    """
    if epsilon <= -1:
        raise DomainError("epsilon must exceed -1")
    g = u.grid
    f = 1.0 + epsilon
    lam = g.lam / f
    k = round(lam / np.pi)
    if k >= 1 and abs(lam - k * np.pi) <= 1e-12 * lam:
        lam = k * np.pi          # remove the rounding of the division
    ng = StripGrid(lam, g.X / f, g.nx, g.ny, g.x_bc)
    return StripField(u.values.copy(), ng, u.base_scale * f, u.symmetric,
                      meta={"epsilon": float(epsilon), "constant_shift": 2.0 * np.log(f)})


def period_epsilon(lam, k):
    """epsilon with (1 + epsilon) pi k = lam."""
    return lam / (np.pi * k) - 1.0


_D1_FORWARD = np.array([-49.0 / 20, 6.0, -15.0 / 2, 20.0 / 3, -15.0 / 4, 6.0 / 5, -1.0 / 6])


def neumann_defect(u):
    """Largest |du/dy| at y = 0 and y = lam from seven-point one-sided
    differences. For a field even about the edges the error of this
    formula starts at O(h^7)."""
    v, hy = u.values, u.grid.hy
    d0 = v[:, :7] @ _D1_FORWARD / hy
    d1 = v[:, :-8:-1] @ _D1_FORWARD / hy
    return float(max(np.max(np.abs(d0)), np.max(np.abs(d1))))


def extend_by_reflection(u, copies=2, neumann_tol=1e-6):
    """Reflect the field across y = lam repeatedly to width copies*lam.

    Raises ContractError if the edge derivative exceeds ``neumann_tol``
    (None skips the check).
    """
    if copies < 1:
        raise DomainError("copies must be >= 1")
    if neumann_tol is not None and u.grid.ny >= 7 and neumann_defect(u) > neumann_tol:
        raise ContractError("field violates the Neumann condition in y")
    v = u.values
    blocks = [v]
    for c in range(1, copies):
        blocks.append((v[:, ::-1] if c % 2 else v)[:, 1:])
    g = u.grid
    ng = StripGrid(copies * g.lam, g.X, g.nx, copies * (g.ny - 1) + 1, g.x_bc)
    return StripField(np.concatenate(blocks, axis=1), ng, u.base_scale, u.symmetric)


def seam_residuals(u_ext, copies):
    """(max residual on seam rows, max residual elsewhere) after extension."""
    res = np.abs(residual_2d(u_ext.grid, u_ext).values)
    step = (u_ext.grid.ny - 1) // copies
    seams = [c * step for c in range(1, copies)]
    mask = np.zeros(u_ext.grid.ny, bool)
    mask[seams] = True
    return float(res[:, mask].max()), float(res[:, ~mask].max())


def classified_solution(x, y):
    """log(32 / (4 + r^2)^2): a radial finite-volume solution of
    Delta u + e^u = 0 in the plane."""
    return np.log(32.0 / (4.0 + x * x + y * y) ** 2)


def stencil_residual(h):
    """sup over interior nodes of |Delta_h u + e^u| for the classified
    solution on [-1, 1]^2 with spacing h."""
    n = int(round(2.0 / h)) + 1
    s = np.linspace(-1.0, 1.0, n)
    hh = s[1] - s[0]
    X, Y = np.meshgrid(s, s, indexing="ij")
    u = classified_solution(X, Y)
    lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / hh ** 2
    return float(np.max(np.abs(lap + np.exp(u[1:-1, 1:-1]))))


def validate_stencil_order(h=0.05):
    """Observed order log2(res(h)/res(h/2)) of the five-point stencil.

    Returns (order, res_h, res_h2)."""
    if h <= 0:
        raise DomainError("h must be positive")
    r1, r2 = stencil_residual(h), stencil_residual(h / 2.0)
    return float(np.log2(r1 / r2)), r1, r2
