"""Spectrum of the linearization L = Delta + 2 sech^2 x on the strip,
the 1D Pöschl–Teller ground state and detection of the widths where L
has a kernel."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal

from ..errors import ContractError, SolverError
from .grid import (HalfOperators, StripField, StripGrid, base_exponential,
                   half_x_second_difference)

DENSE_LIMIT = 20000


@dataclass
class Profile1D:
    x: np.ndarray
    values: np.ndarray


def poschl_teller_levels(X, h, k=2):
    """Lowest ``k`` eigenpairs of -d^2/dx^2 - 2 sech^2 x on [-X, X],
    homogeneous Dirichlet, centered differences."""
    n = int(round(2.0 * X / h)) - 1
    x = -X + h * np.arange(1, n + 1)
    d = 2.0 / h ** 2 - 2.0 / np.cosh(x) ** 2
    e = np.full(n - 1, -1.0 / h ** 2)
    try:
        vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"tridiagonal eigen solve failed: {exc}") from exc
    return x, vals, vecs


def poschl_teller_ground(X=20.0, h=0.01):
    """Ground state of the Pöschl–Teller operator with Dirichlet truncation.

    Returns (eigenvalue, Profile1D) with the profile positive and of unit
    discrete L^2 norm.
    """
    if X < 10 or h > 0.05:
        raise ContractError("need X >= 10 and h <= 0.05")
    x, vals, vecs = poschl_teller_levels(X, h, 1)
    phi = vecs[:, 0]
    phi = phi * np.sign(phi[np.argmax(np.abs(phi))]) / np.sqrt(h * phi @ phi)
    return float(vals[0]), Profile1D(x, phi)


def pt_dense_matrix(X, h):
    """The same Dirichlet matrix assembled densely (for brute-force checks)."""
    n = int(round(2.0 * X / h)) - 1
    x = -X + h * np.arange(1, n + 1)
    A = np.diag(2.0 / h ** 2 - 2.0 / np.cosh(x) ** 2)
    A += np.diag(np.full(n - 1, -1.0 / h ** 2), 1) + np.diag(np.full(n - 1, -1.0 / h ** 2), -1)
    return A


# -- per-mode machinery ----------------------------------------------------

def x_levels(grid, count=None):
    """Eigenpairs of d^2/dx^2 + 2 sech^2 x on the even half grid.

    Returns (kappa descending, phi columns) with phi normalized to
    phi(0) = 1 in the original (unweighted) variables.
    """
    D = half_x_second_difference(grid).toarray()
    wx = grid.weights_x
    xh = grid.x_half[: grid.n_half]
    s = np.sqrt(wx)
    # symmetric under the weights: W^{1/2} D W^{-1/2}
    Dsym = s[:, None] * D / s[None, :]
    d = np.diag(Dsym) + base_exponential(xh)
    e = np.diag(Dsym, 1)
    n = d.size
    count = n if count is None else min(count, n)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(n - count, n - 1))
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    phi = vecs / s[:, None]
    phi = phi / phi[0]
    return vals, phi


def y_symbols(grid):
    """Eigenvalues s_j >= 0 of -d^2/dy^2 (discrete Neumann) for cos(pi j y/lam)."""
    j = np.arange(grid.ny)
    return 4.0 / grid.hy ** 2 * np.sin(np.pi * j / (2.0 * (grid.ny - 1))) ** 2


def y_mode(grid, j):
    return np.cos(np.pi * j * grid.y / grid.lam)


def product_field(grid, phi_half, j):
    """Even field phi(x) cos(pi j y/lam) from a half-grid profile."""
    half = np.zeros(grid.center + 1)
    half[: phi_half.size] = phi_half
    full = np.concatenate([half[:0:-1], half])
    return StripField(np.outer(full, y_mode(grid, j)), grid, symmetric=True)


def bound_state_kappa(grid):
    """Discrete bound eigenvalue of d^2/dx^2 + 2 sech^2 x (close to 1)."""
    return float(x_levels(grid, 1)[0][0])


@dataclass
class SpectrumReport:
    """Eigenpairs nearest zero; ``pairs`` holds (eigenvalue, label, field)."""

    pairs: list
    method: str
    residuals: list = field(default_factory=list)
    full2d: "SpectrumReport" = None
    bound_gap: float = np.nan

    @property
    def eigenvalues(self):
        return [p[0] for p in self.pairs]

    def bound_modes(self):
        return [p for p in self.pairs if p[1] != "2D" and p[1][1] == 0]


def _symmetrized_linearization(grid):
    ops = HalfOperators(grid)
    L = ops.linearization(grid.lam)
    s = np.sqrt(grid.weights)
    return (sp.diags(s) @ L @ sp.diags(1.0 / s)).tocsc(), L, s


def full_spectrum(grid, n, shift=1e-8):
    """n eigenvalues of the 2D discrete L nearest 0 (even-in-x subspace)."""
    A, L, s = _symmetrized_linearization(grid)
    A = 0.5 * (A + A.T)
    N = A.shape[0]
    try:
        if N <= DENSE_LIMIT:
            vals, vecs = np.linalg.eigh(A.toarray())
            idx = np.argsort(np.abs(vals))[:n]
            vals, vecs = vals[idx], vecs[:, idx]
        else:
            vals, vecs = spla.eigsh(A, k=n, sigma=shift, which="LM", tol=1e-13,
                                     v0=np.ones(N))
    except Exception as exc:
        raise SolverError(f"2D eigen solve failed: {exc}") from exc
    order = np.argsort(np.abs(vals))
    pairs, res = [], []
    for i in order:
        v = vecs[:, i] / s
        r = L @ v - vals[i] * v
        res.append(float(np.linalg.norm(r * s) / np.linalg.norm(v * s)))
        pairs.append((float(vals[i]), "2D", StripField.from_unknowns(v, grid)))
    return SpectrumReport(pairs, "full-2D", res)


def per_mode_spectrum(grid, n, x_count=8):
    """n eigenvalues nearest 0 from separation of variables:
    kappa_i - s_j, labels (i, j) with i the x level (0 = bound state)."""
    kappa, phi = x_levels(grid, x_count)
    s = y_symbols(grid)
    cand = [(abs(k - sj), i, j, k - sj) for i, k in enumerate(kappa) for j, sj in enumerate(s)]
    cand.sort()
    ops = HalfOperators(grid)
    L = ops.linearization(grid.lam)
    w = grid.weights
    pairs, res = [], []
    for _, i, j, val in cand[:n]:
        f = product_field(grid, phi[:, i], j)
        v = f.unknowns()
        r = L @ v - val * v
        res.append(float(np.sqrt(w @ r ** 2) / np.sqrt(w @ v ** 2)))
        pairs.append((float(val), (i, j), f))
    return SpectrumReport(pairs, "per-mode", res)


def linearized_spectrum(lam, grid=None, n=6):
    """Eigenvalues of L nearest 0 by separation of variables and by the
    full 2D discretization; ``bound_gap`` is the largest distance from a
    per-mode bound-state eigenvalue to the nearest 2D eigenvalue."""
    grid = StripGrid(lam) if grid is None else grid.with_lambda(lam)
    per = per_mode_spectrum(grid, n)
    full = full_spectrum(grid, n)
    full_vals = np.array(full.eigenvalues)
    gaps = [float(np.min(np.abs(full_vals - p[0]))) for p in per.bound_modes()]
    per.full2d = full
    per.bound_gap = max(gaps) if gaps else 0.0
    return per


def detect_bifurcations(lambda_lo, lambda_hi, step=0.05, template=None, tol=1e-6):
    """Widths where a bound-mode eigenvalue kappa0 - (pi j/lam)^2 of L
    changes sign, located on a scan with ``step`` and refined by bisection.

    kappa0 is the discrete bound eigenvalue on the template's x grid; the
    y dependence uses the exact cosine symbol.
    """
    if not (0 < lambda_lo < lambda_hi):
        raise ValueError("need 0 < lambda_lo < lambda_hi")
    template = StripGrid(1.0) if template is None else template
    k0 = bound_state_kappa(template)
    lams = np.append(np.arange(lambda_lo, lambda_hi, step), lambda_hi)
    jmax = int(np.ceil(lambda_hi * np.sqrt(k0) / np.pi)) + 1
    found = []
    for j in range(1, jmax + 1):
        g = k0 - (np.pi * j / lams) ** 2
        for a in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
            lo, hi = lams[a], lams[a + 1]
            glo = k0 - (np.pi * j / lo) ** 2
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                gm = k0 - (np.pi * j / mid) ** 2
                if np.sign(gm) == np.sign(glo):
                    lo, glo = mid, gm
                else:
                    hi = mid
            found.append(0.5 * (lo + hi))
    return sorted(found)
