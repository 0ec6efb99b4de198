"""Gamma and degree-one Legendre functions of real order, and the
transcendental order equation with its pole-aware root scan."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
])
_SQRT_2PI = np.sqrt(2.0 * np.pi)

POLE_RADIUS = 1e-2


def _is_nonpos_int(x):
    return (x <= 0) & (x == np.round(x))


def _reduce(x):
    """x = n + r with n integer and |r| <= 1/2 (exact), plus (-1)^n."""
    x = np.asarray(x, dtype=float)
    n = np.round(x)
    return x - n, np.where(np.mod(n, 2.0) == 0.0, 1.0, -1.0)


def sinpi(x):
    """sin(pi x), accurate near the integers, with exact zeros there."""
    r, sign = _reduce(x)
    return sign * np.where(r == 0.0, 0.0, np.sin(np.pi * r))


def cospi(x):
    """cos(pi x), accurate near the half-integers, with exact zeros there."""
    r, sign = _reduce(x)
    return sign * np.where(np.abs(r) == 0.5, 0.0, np.cos(np.pi * r))


def _gamma_right(x):
    # valid for x >= 0.5
    z = x - 1.0
    s = np.full_like(z, _LANCZOS[0])
    for k in range(1, 9):
        s = s + _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    half = np.power(t, 0.5 * (z + 0.5))    # split the power to delay overflow
    return _SQRT_2PI * half * (half * np.exp(-t)) * s


def gamma(x):
    """Gamma function for real arguments away from the poles.

    Scalars give a float, arrays an array. Any nonpositive integer in
    the input raises :class:`DomainError`.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(_is_nonpos_int(xa)):
        bad = xa[_is_nonpos_int(xa)].ravel()[0]
        raise DomainError(f"gamma has a pole at {bad:g}", location=float(bad))
    left = xa < 0.5
    out = np.empty_like(xa)
    out[~left] = _gamma_right(xa[~left])
    if np.any(left):
        xl = xa[left]
        out[left] = np.pi / (sinpi(xl) * _gamma_right(1.0 - xl))
    return float(out) if out.ndim == 0 else out


def rgamma(x):
    """Reciprocal gamma, zero at the poles."""
    xa = np.asarray(x, dtype=float)
    pole = _is_nonpos_int(xa)
    safe = np.where(pole, 0.5, xa)
    out = np.where(pole, 0.0, 1.0 / np.asarray(gamma(safe)))
    return float(out) if out.ndim == 0 else out


def _check_y(y):
    ya = np.asarray(y, dtype=float)
    if np.any(np.abs(ya) >= 1.0):
        raise DomainError("Legendre argument must satisfy |y| < 1")
    return ya


def _check_order(mu):
    if mu < 0:
        raise DomainError("order must be nonnegative")


def legendre_p1(mu, y):
    """Ferrers function of the first kind, degree 1, real order ``mu`` >= 0.

    Closed form ((1+y)/(1-y))^(mu/2) (y - mu) / Gamma(2 - mu); the
    reciprocal gamma vanishes for integer mu > 1.
    """
    mu = float(mu)
    _check_order(mu)
    ya = _check_y(y)
    out = ((1.0 + ya) / (1.0 - ya)) ** (0.5 * mu) * (ya - mu) * rgamma(2.0 - mu)
    return float(out) if np.ndim(out) == 0 else out


def _q1_integer(m, y):
    """Integer-order Q via the derivative formula (Condon-Shortley sign)."""
    y = np.asarray(y, dtype=float)
    s = np.sqrt(1.0 - y * y)
    if m == 0:
        return 0.5 * y * np.log((1.0 + y) / (1.0 - y)) - 1.0
    if m == 1:
        return -s * (0.5 * np.log((1.0 + y) / (1.0 - y)) + y / (1.0 - y * y))
    # d^n of 2/(1-y^2)^2 with n = m - 2, from the partial fractions
    # (1/2)[(1-y)^-2 + (1+y)^-2 + (1-y)^-1 + (1+y)^-1]
    n = m - 2

    def poch(k):
        return float(np.prod(np.arange(k, k + n))) if n > 0 else 1.0

    deriv = 0.5 * (poch(2) * (1.0 - y) ** (-2 - n)
                   + (-1) ** n * poch(2) * (1.0 + y) ** (-2 - n)
                   + poch(1) * (1.0 - y) ** (-1 - n)
                   + (-1) ** n * poch(1) * (1.0 + y) ** (-1 - n))
    return (-1) ** m * s ** m * deriv


def legendre_q1(mu, y):
    """Ferrers function of the second kind, degree 1, real order ``mu`` >= 0.

    Non-integer orders use the connection formula through P with
    Gamma(2+mu)/Gamma(2-mu); integer orders use closed forms. Orders
    within 1e-7 of an integer (but not equal) are rejected because the
    connection formula cancels catastrophically there.
    """
    mu = float(mu)
    _check_order(mu)
    ya = _check_y(y)
    m = round(mu)
    if mu == m:
        out = _q1_integer(int(m), ya)
    else:
        if abs(mu - m) < 1e-7:
            raise DomainError(f"order {mu!r} too close to the singular order {m}",
                              location=float(m))
        ratio = gamma(2.0 + mu) * rgamma(2.0 - mu)
        pm = ((1.0 + ya) / (1.0 - ya)) ** (0.5 * mu) * (ya - mu) * rgamma(2.0 - mu)
        pneg = ((1.0 + ya) / (1.0 - ya)) ** (-0.5 * mu) * (ya + mu) * rgamma(2.0 + mu)
        out = np.pi / (2.0 * sinpi(mu)) * (cospi(mu) * pm - ratio * pneg)
    return float(out) if np.ndim(out) == 0 else out


def nearest_pole(mu):
    """Nearest integer, a pole of Gamma(1-mu) (mu >= 1) or of cot(pi mu)."""
    return float(np.round(mu))


def order_equation_lhs(mu, radius=POLE_RADIUS):
    """Left-hand side of the transcendental order equation

        -Gamma(1-mu) Gamma(mu) cos(pi mu) cot(pi mu)
            * [Gamma(mu) Gamma(1-mu) sin((1+mu) pi) + 2 pi].

    Vectorized; any input within ``radius`` of an integer raises
    DomainError carrying that integer.
    """
    mu_a = np.asarray(mu, dtype=float)
    if np.any(mu_a <= 0):
        raise DomainError("order must be positive")
    near = np.abs(mu_a - np.round(mu_a)) < radius
    if np.any(near):
        p = float(np.round(mu_a[near].ravel()[0]))
        raise DomainError(f"order within {radius:g} of the pole {p:g}", location=p)
    g1 = np.asarray(gamma(1.0 - mu_a))
    g0 = np.asarray(gamma(mu_a))
    c = np.cos(np.pi * mu_a)
    s = np.sin(np.pi * mu_a)
    out = -g1 * g0 * c * (c / s) * (g0 * g1 * np.sin((1.0 + mu_a) * np.pi) + 2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def order_equation_closed_form(mu):
    """Simplified form -pi^2 cot^2(pi mu) from the reflection identity."""
    mu_a = np.asarray(mu, dtype=float)
    c = np.cos(np.pi * mu_a)
    s = np.sin(np.pi * mu_a)
    out = -np.pi ** 2 * (c / s) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass
class ScanReport:
    range: tuple
    step: float
    excluded: list = field(default_factory=list)
    min_gap: float = np.inf
    samples: list = field(default_factory=list)
    max_closed_form_error: float = 0.0

    @property
    def argmin(self):
        gaps = [abs(g - np.pi ** 2) for _, g in self.samples]
        return self.samples[int(np.argmin(gaps))][0]


def scan_no_root(mu_lo, mu_hi, step, radius=POLE_RADIUS):
    """Sample the order equation on mu_lo, mu_lo+step, ... <= mu_hi.

    Samples within ``radius`` of an integer are skipped and the
    corresponding intervals listed in ``excluded``. ``min_gap`` is the
    minimum of |g - pi^2| over the kept samples.
    """
    if not (0 < mu_lo < mu_hi):
        raise DomainError("need 0 < mu_lo < mu_hi")
    if step <= 0:
        raise DomainError("step must be positive")
    n = int(np.floor((mu_hi - mu_lo) / step * (1 + 1e-12))) + 1
    mus = mu_lo + step * np.arange(n)
    keep = np.abs(mus - np.round(mus)) >= radius
    poles = np.arange(np.ceil(mu_lo - radius), np.floor(mu_hi + radius) + 1)
    excluded = [(float(p) + 0.0, radius) for p in poles
                if p - radius < mu_hi and p + radius > mu_lo]
    mk = mus[keep]
    g = np.asarray(order_equation_lhs(mk, radius)) if mk.size else np.array([])
    closed = np.asarray(order_equation_closed_form(mk)) if mk.size else np.array([])
    denom = np.maximum(np.abs(closed), np.finfo(float).tiny)
    rel = np.where(g == closed, 0.0, np.abs(g - closed) / denom)
    gaps = np.abs(g - np.pi ** 2)
    return ScanReport(
        range=(float(mu_lo), float(mu_hi)), step=float(step), excluded=excluded,
        min_gap=float(gaps.min()) if gaps.size else np.inf,
        samples=list(zip(mk.tolist(), g.tolist())),
        max_closed_form_error=float(rel.max()) if rel.size else 0.0,
    )
