"""Weighted sup and Hölder diagnostics, decay classification and the
coefficient transform L -> L~ with L~(w u) = w L u."""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._kernels_py import exact_quotient_max
from .errors import ContractError, DomainError

HOLDER_WINDOW = 32

# <x>-exponents of the norm components; keys are component names
SPACE_EXPONENTS = {
    "X2": {"u": -0.5, "lap": 1.5},
    "Y2": {"f": 1.5},
    "X4": {"u": 0.5, "lap": 2.5, "bilap": 4.5},
    "Y4": {"f": 4.5},
}
# derivative order k of the |.|_{k, alpha} norm of each component
SPACE_ORDERS = {
    "X2": {"u": 2, "lap": 0},
    "Y2": {"f": 0},
    "X4": {"u": 4, "lap": 2, "bilap": 0},
    "Y4": {"f": 0},
}


@dataclass(frozen=True)
class WeightSpec:
    """<x>^p weight, Hölder exponent alpha and boundary-distance power k
    (the seminorm weight is d_{x,y}^{k + alpha}, d = distance to the
    boundary of the sampled box; ``interior=False`` uses d = 1)."""

    p: float = 0.0
    holder_alpha: float = 0.5
    k: int = 0
    interior: bool = True

    def __post_init__(self):
        if not 0.0 < self.holder_alpha < 1.0:
            raise DomainError("holder_alpha must lie in (0, 1)")
        if self.k < 0 or int(self.k) != self.k:
            raise DomainError("k must be a nonnegative integer")


def japanese_bracket(x):
    """<x> = sqrt(1 + x^2)."""
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def _sampled(field_):
    """(values 2D, x nodes, y nodes) for strip fields, radial profiles,
    (values, x) / (values, x, y) tuples or bare 1D arrays."""
    if hasattr(field_, "grid") and hasattr(field_.grid, "ny"):
        return np.asarray(field_.values, float), field_.grid.x, field_.grid.y
    if hasattr(field_, "r"):
        return np.asarray(field_.values, float)[:, None], field_.r, np.zeros(1)
    if isinstance(field_, tuple):
        v = np.asarray(field_[0], float)
        x = np.asarray(field_[1], float)
        y = np.asarray(field_[2], float) if len(field_) > 2 else np.zeros(1)
        return (v if v.ndim == 2 else v[:, None]), x, y
    v = np.asarray(field_, float)
    return (v if v.ndim == 2 else v[:, None]), np.arange(v.shape[0], dtype=float), \
        np.arange(v.shape[1] if v.ndim == 2 else 1, dtype=float)


def weighted_sup_norm(field_, p):
    """max over the nodes of <x>^p |u|; x is the first coordinate (or r)."""
    v, x, _ = _sampled(field_)
    return float(np.max(japanese_bracket(x)[:, None] ** p * np.abs(v)))


def _distance_power(x, y, spec):
    if not spec.interior:
        return np.ones((x.size, y.size))
    dx = np.minimum(x - x[0], x[-1] - x)
    if y.size > 1:
        dy = np.minimum(y - y[0], y[-1] - y)
        d = np.minimum(dx[:, None], dy[None, :])
    else:
        d = dx[:, None]
    return np.maximum(d, 0.0) ** (spec.k + spec.holder_alpha)


def _weighted_values(field_, spec):
    v, x, y = _sampled(field_)
    return japanese_bracket(x)[:, None] ** spec.p * v, x, y


def weighted_holder_seminorm(field_, spec, window=HOLDER_WINDOW):
    """max of d_{x,y}^{k+alpha} |v(P) - v(Q)| / |P - Q|^alpha over node
    pairs at most ``window`` nodes apart in each index, v = <x>^p u and
    d_{x,y} = min(d_P, d_Q)."""
    v, x, y = _weighted_values(field_, spec)
    if v.size < 2:
        raise ContractError("need at least 2 nodes")
    dpow = _distance_power(x, y, spec)
    return kernels.holder_window(v, x, y, dpow, spec.holder_alpha, window)


def holder_seminorm_all_pairs(field_, spec):
    """Exhaustive version of weighted_holder_seminorm (O(N^2) memory)."""
    v, x, y = _weighted_values(field_, spec)
    dpow = _distance_power(x, y, spec).ravel()
    X, Y = np.meshgrid(x, y, indexing="ij")
    P = np.stack([X.ravel(), Y.ravel()], axis=1)
    vv = v.ravel()
    dist = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(dist, np.inf)
    num = np.minimum(dpow[:, None], dpow[None, :]) * np.abs(vv[:, None] - vv[None, :])
    return float(exact_quotient_max(num, dist, spec.holder_alpha,
                                    num / dist ** spec.holder_alpha))


# -- decay classification --------------------------------------------------

@dataclass
class DecayFit:
    kind: str
    rate: float
    intercept: float
    residuals: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.kind, self.rate))


def _profile_nodes(profile):
    if hasattr(profile, "r"):
        return np.asarray(profile.r, float), np.asarray(profile.values, float)
    if hasattr(profile, "x"):
        return np.asarray(profile.x, float), np.asarray(profile.values, float)
    r, u = profile
    return np.asarray(r, float), np.asarray(u, float)


def decay_fit(profile, r_min=2.0, r_max=None):
    """Classify the behaviour of u on r >= r_min as
    linear (u = a + b r, rate b), power (log|u| = a + b log r, rate b) or
    exponential (|u| = a e^{-b r}, rate b), by the smallest relative
    least-squares residual in u."""
    r, u = _profile_nodes(profile)
    m = r >= r_min
    if r_max is not None:
        m &= r <= r_max
    r, u = r[m], u[m]
    if r.size < 8:
        raise ContractError("decay_fit needs at least 8 nodes with r >= r_min")
    scale = max(float(np.sqrt(np.mean(u * u))), 1e-300)
    fits = {}
    b, a = np.polyfit(r, u, 1)
    fits["linear"] = (float(b), float(a), u - (a + b * r))
    same_sign = np.all(u > 0) or np.all(u < 0)
    if same_sign:
        s = np.sign(u[0])
        lu = np.log(np.abs(u))
        bp, ap = np.polyfit(np.log(r), lu, 1)
        fits["power"] = (float(bp), float(ap), u - s * np.exp(ap) * r ** bp)
        be, ae = np.polyfit(r, lu, 1)
        fits["exponential"] = (float(-be), float(ae), u - s * np.exp(ae + be * r))
    res = {k: float(np.sqrt(np.mean(v[2] ** 2)) / scale) for k, v in fits.items()}
    kind = min(res, key=res.get)
    rate, intercept, _ = fits[kind]
    return DecayFit(kind, rate, intercept, res)


# -- weighted operator transform -------------------------------------------

@dataclass
class OperatorCoefficients:
    """L u = a^{ij} D_ij u + b^i D_i u + c u on a node array.

    a has shape (d, d, *nodes), b (d, *nodes), c nodes."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, float)
        self.b = np.asarray(self.b, float)
        self.c = np.asarray(self.c, float)
        d = self.a.shape[0]
        if self.a.shape[:2] != (d, d) or self.b.shape[0] != d:
            raise ContractError("coefficient shapes are inconsistent")
        if not np.allclose(self.a, np.swapaxes(self.a, 0, 1), rtol=0, atol=1e-14):
            raise ContractError("a must be symmetric")

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def ellipticity(self):
        """Smallest eigenvalue of a over all nodes."""
        A = np.moveaxis(self.a, (0, 1), (-2, -1)).reshape(-1, self.dim, self.dim)
        return float(np.linalg.eigvalsh(A)[:, 0].min())

    def apply(self, u, grad_u, hess_u):
        """L u from nodal values, gradient (d, ...) and Hessian (d, d, ...)."""
        return (np.einsum("ij...,ij...->...", self.a, hess_u)
                + np.einsum("i...,i...->...", self.b, grad_u) + self.c * u)


def finite_difference_derivatives(f, spacing):
    """Second-order gradient and Hessian of a node array via np.gradient."""
    spacing = np.atleast_1d(spacing)
    d = f.ndim
    g = np.gradient(f, *spacing, edge_order=2)
    g = np.stack(g if d > 1 else [g])
    H = np.empty((d, d) + f.shape)
    for i in range(d):
        gi = np.gradient(g[i], *spacing, edge_order=2)
        H[i] = np.stack(gi if d > 1 else [gi])
    return g, 0.5 * (H + np.swapaxes(H, 0, 1))


def transform_weighted_operator(coeffs, w, grad_w=None, hess_w=None, spacing=None):
    """Coefficients of L~ with L~(w u) = w L u:
    a~ = a, b~ = b - 2 a grad log w,
    c~ = 2 a(grad log w, grad log w) - a:D^2 w / w - b . grad log w + c.

    Derivatives of w default to finite differences on ``spacing``.
    """
    w = np.asarray(w, float)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DomainError("the weight must be positive")
    if grad_w is None or hess_w is None:
        if spacing is None:
            raise ContractError("spacing is needed for finite-difference derivatives")
        gw, hw = finite_difference_derivatives(w, spacing)
        grad_w = gw if grad_w is None else grad_w
        hess_w = hw if hess_w is None else hess_w
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    gl = np.asarray(grad_w, float) / w
    a_gl = np.einsum("ij...,j...->i...", a, gl)
    b_new = b - 2.0 * a_gl
    c_new = (2.0 * np.einsum("i...,i...->...", a_gl, gl)
             - np.einsum("ij...,ij...->...", a, np.asarray(hess_w, float)) / w
             - np.einsum("i...,i...->...", b, gl) + c)
    return OperatorCoefficients(a.copy(), b_new, c_new)


# -- membership proxies ----------------------------------------------------

@dataclass
class ComponentProxy:
    name: str
    exponent: float
    order: int
    full: float
    inner: float

    @property
    def growth(self):
        if self.inner == 0.0:
            return 0.0 if self.full == 0.0 else np.inf
        return self.full / self.inner - 1.0


@dataclass
class MembershipReport:
    space: str
    components: list
    inner_fraction: float
    growth_tol: float

    def stable(self, comp):
        return np.isfinite(comp.full) and comp.growth <= self.growth_tol

    @property
    def passed(self):
        return all(self.stable(c) for c in self.components)

    def to_text(self):
        lines = [f"space: {self.space}", f"inner_fraction: {self.inner_fraction:.17g}",
                 f"growth_tol: {self.growth_tol:.17g}"]
        for c in self.components:
            verdict = "stable under truncation growth" if self.stable(c) \
                else "grows under truncation growth"
            lines += [f"{c.name}.exponent: {c.exponent:.17g}",
                      f"{c.name}.order: {c.order}",
                      f"{c.name}.full: {c.full:.17g}",
                      f"{c.name}.inner: {c.inner:.17g}",
                      f"{c.name}.verdict: {verdict}"]
        lines.append(f"verdict: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def _derivatives_2d(v, x, y, order):
    """All partial derivatives of total order <= ``order`` (np.gradient)."""
    out = {0: [v]}
    for k in range(1, order + 1):
        nxt = [np.gradient(out[k - 1][0], x, axis=0, edge_order=2)]
        for f in out[k - 1]:
            if y.size > 1:
                nxt.append(np.gradient(f, y, axis=1, edge_order=2))
        out[k] = nxt
    return out


def _laplacian(v, x, y, radial):
    if radial:
        r = x
        d1 = np.gradient(v[:, 0], r, edge_order=2)
        d2 = np.gradient(d1, r, edge_order=2)
        lap = d2.copy()
        lap[1:] += 2.0 * d1[1:] / r[1:]
        lap[0] = 3.0 * d2[0]
        return lap[:, None]
    return (np.gradient(np.gradient(v, x, axis=0, edge_order=2), x, axis=0, edge_order=2)
            + np.gradient(np.gradient(v, y, axis=1, edge_order=2), y, axis=1, edge_order=2))


def _holder_norm_proxy(v, x, y, exponent, order, alpha, window):
    """sum of sup|D^beta (<x>^p u)|, |beta| <= order, plus the alpha
    seminorm of the top-order derivatives (uniform, not interior)."""
    wv = japanese_bracket(x)[:, None] ** exponent * v
    ders = _derivatives_2d(wv, x, y, order)
    total = sum(float(np.max(np.abs(f))) for k in ders for f in ders[k])
    ones = np.ones_like(wv)
    for f in ders[order]:
        total += kernels.holder_window(f, x, y, ones, alpha, window)
    return total


def membership_check(field_, space="X2", exponents=None, alpha=0.5,
                     inner_fraction=0.8, growth_tol=0.05, window=8):
    """Discrete proxies of the weighted norm components of ``space``
    (X2, Y2 on strips; X4, Y4 on radial profiles) on the full sampled
    window and on |x| <= inner_fraction * X. A component is reported
    stable when it grows by at most ``growth_tol`` (relative) between the
    two truncations."""
    if space not in SPACE_EXPONENTS:
        raise ContractError(f"space must be one of {sorted(SPACE_EXPONENTS)}")
    exps = dict(SPACE_EXPONENTS[space], **(exponents or {}))
    orders = SPACE_ORDERS[space]
    v, x, y = _sampled(field_)
    radial = hasattr(field_, "r")
    X = float(np.max(np.abs(x)))
    inner = np.abs(x) <= inner_fraction * X
    sources = {"u": v, "f": v}
    if "lap" in orders:
        sources["lap"] = _laplacian(v, x, y, radial)
    if "bilap" in orders:
        sources["bilap"] = _laplacian(sources["lap"], x, y, radial)
    comps = []
    for name in orders:
        src, p, k = sources[name], exps[name], orders[name]
        args = (p, k, alpha, window)
        full = _holder_norm_proxy(src, x, y, *args)
        part = _holder_norm_proxy(src[inner], x[inner], y, *args)
        comps.append(ComponentProxy(name, p, k, full, part))
    return MembershipReport(space, comps, inner_fraction, growth_tol)


# -- random smooth samples for the operator identity -----------------------

def _trig(rng, pts, terms=3, amp=1.0):
    """Random sum of cosines with value, gradient and Hessian at ``pts``
    (shape (d, ...))."""
    d = pts.shape[0]
    val = np.zeros(pts.shape[1:])
    grad = np.zeros(pts.shape)
    hess = np.zeros((d, d) + pts.shape[1:])
    for _ in range(terms):
        k = rng.uniform(-2.0, 2.0, d)
        A = amp * rng.uniform(-1.0, 1.0) / terms
        ph = np.tensordot(k, pts, 1) + rng.uniform(0, 2 * np.pi)
        c, s = np.cos(ph), np.sin(ph)
        val += A * c
        grad -= A * k[:, None, ...].reshape((d,) + (1,) * (pts.ndim - 1)) * s
        hess -= A * np.multiply.outer(np.outer(k, k), np.ones(pts.shape[1:])) * c
    return val, grad, hess


@dataclass
class OperatorSample:
    coeffs: OperatorCoefficients
    w: tuple       # (value, gradient, Hessian)
    u: tuple


def random_operator_sample(rng, dim=2, n=12):
    """Random uniformly elliptic (a, b, c), positive weight w = e^g and
    field u with exact derivatives on an n^dim box in [-1, 1]^dim."""
    axes = np.meshgrid(*[np.linspace(-1.0, 1.0, n)] * dim, indexing="ij")
    pts = np.stack(axes)
    shape = pts.shape[1:]
    a = np.zeros((dim, dim) + shape)
    for i in range(dim):
        a[i, i] = 2.0 + 0.5 * _trig(rng, pts)[0]
        for j in range(i + 1, dim):
            off = 0.3 / dim * _trig(rng, pts)[0]
            a[i, j] = a[j, i] = off
    b = np.stack([_trig(rng, pts, amp=2.0)[0] for _ in range(dim)])
    c = _trig(rng, pts, amp=2.0)[0]
    g, gg, hg = _trig(rng, pts)
    w = np.exp(g)
    grad_w = w * gg
    hess_w = w * (hg + np.einsum("i...,j...->ij...", gg, gg))
    return OperatorSample(OperatorCoefficients(a, b, c), (w, grad_w, hess_w), _trig(rng, pts))


def operator_identity_defect(sample):
    """sup |L~(w u) - w L u| with exact derivatives of w u."""
    w, gw, hw = sample.w
    u, gu, hu = sample.u
    wu = w * u
    g_wu = gw * u + w * gu
    h_wu = (hw * u + w * hu + np.einsum("i...,j...->ij...", gw, gu)
            + np.einsum("i...,j...->ij...", gu, gw))
    t = transform_weighted_operator(sample.coeffs, w, gw, hw)
    lhs = t.apply(wu, g_wu, h_wu)
    rhs = w * sample.coeffs.apply(u, gu, hu)
    return float(np.max(np.abs(lhs - rhs)))
