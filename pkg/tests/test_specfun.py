import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liouville import specfun as sf
from liouville.errors import DomainError

# (mu, y, P_1^mu(y), Q_1^mu(y)) for Ferrers functions, computed once with
# mpmath at 30 digits (legenp/legenq, type=2) and frozen here
FERRERS = [
    (0.3, 0.2, -0.1169559829152021, -1.1388492501276912),
    (0.5, -0.7, -0.8776157097100533, 0.5469364263757109),
    (1.5, 0.9, -3.0806440050708113, 0.23371736520508804),
    (2.25, -0.3, 0.2592659104104307, 2.18053132593314),
    (3.7, 0.55, -12.34892019154492, 14.42627399936697),
    (1.0, 0.4, -0.916515138991168, -0.8247164386118334),
    (2.0, -0.6, 0.0, 3.125),
    (0.0, 0.8, 0.8, -0.1211101690655121),
]
GAMMA = [(0.1, 9.51350769866873), (2.5, 1.329340388179137), (7.3, 1271.4236336639087),
         (-1.5, 2.363271801207355), (-3.2, 0.689056412005979), (12.0, 39916800.0),
         (0.75, 1.2254167024651776)]


def test_gamma_trivial_values():
    assert sf.gamma(1.0) == pytest.approx(1.0, rel=1e-15)
    assert sf.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("x,val", GAMMA)
def test_gamma_against_frozen_oracle(x, val):
    assert sf.gamma(x) == pytest.approx(val, rel=1e-13)


def test_gamma_quarter_reflection():
    assert abs(sf.gamma(0.25) * sf.gamma(0.75) - math.pi * math.sqrt(2)) <= 1e-12 * math.pi


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_pole_raises(x):
    with pytest.raises(DomainError):
        sf.gamma(x)


def test_gamma_reflection_200_random():
    mus = np.random.default_rng(0).uniform(0.0, 1.0, 200)
    err = np.abs(sf.gamma(mus) * sf.gamma(1 - mus) * sf.sinpi(mus) / np.pi - 1)
    assert err.max() <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6))
def test_gamma_reflection_property(mu):
    # sinpi is exact near the integers, where math.sin(pi * mu) is not
    assert abs(sf.gamma(mu) * sf.gamma(1 - mu) * sf.sinpi(mu) / math.pi - 1) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 30.0))
def test_gamma_recurrence_property(x):
    assert sf.gamma(x + 1) == pytest.approx(x * sf.gamma(x), rel=1e-12)


@pytest.mark.parametrize("mu,y,p,q", FERRERS)
def test_legendre_against_frozen_oracle(mu, y, p, q):
    assert sf.legendre_p1(mu, y) == pytest.approx(p, rel=1e-12, abs=1e-14)
    assert sf.legendre_q1(mu, y) == pytest.approx(q, rel=1e-12, abs=1e-14)


def test_legendre_spec_examples():
    assert sf.legendre_p1(0.0, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert sf.legendre_p1(0.5, 0.0) == pytest.approx(-1 / math.sqrt(math.pi), rel=1e-13)
    for y in (-0.9, 0.0, 0.3, 0.99):
        assert sf.legendre_p1(2.0, y) == 0.0
        assert sf.legendre_p1(3.0, y) == 0.0
    assert sf.legendre_q1(0.0, 0.0) == pytest.approx(-1.0, abs=1e-15)


def test_degree_zero_order_closed_forms_on_grid():
    y = np.linspace(-0.99, 0.99, 100)
    assert np.max(np.abs(sf.legendre_p1(0.0, y) - y)) <= 1e-10
    q0 = y / 2 * np.log((1 + y) / (1 - y)) - 1
    assert np.max(np.abs(sf.legendre_q1(0.0, y) - q0)) <= 1e-10


@pytest.mark.parametrize("y", [1.0, -1.0, 1.5])
def test_legendre_argument_domain(y):
    with pytest.raises(DomainError):
        sf.legendre_p1(0.5, y)
    with pytest.raises(DomainError):
        sf.legendre_q1(0.5, y)


def test_q_singular_order_raises():
    with pytest.raises(DomainError):
        sf.legendre_q1(2.0 + 1e-9, 0.3)


@pytest.mark.parametrize("mu", [0.3, 1.7, 2.4])
def test_p_asymptote_at_one(mu):
    for d in (1e-8, 1e-10):
        expect = (2 / d) ** (mu / 2) / sf.gamma(1 - mu)
        assert sf.legendre_p1(mu, 1 - d) == pytest.approx(expect, rel=1e-2)


@pytest.mark.parametrize("mu,ds", [(1.2, (1e-8, 1e-10)), (2.7, (1e-8, 1e-10)),
                                   (0.6, (1e-8, 1e-10)), (0.3, (1e-12, 1e-14))])
def test_q_asymptote_at_one_generic(mu, ds):
    # the next term is smaller by O((1 - y)^mu), so small orders need 1 - y
    # well below 1e-8 for 1% agreement
    for d in ds:
        expect = 0.5 * math.cos(mu * math.pi) * sf.gamma(mu) * (2 / d) ** (mu / 2)
        assert sf.legendre_q1(mu, 1 - d) == pytest.approx(expect, rel=1e-2)


@pytest.mark.parametrize("mu", [0.5, 1.5])
def test_q_half_odd_stays_bounded_at_one(mu):
    vals = []
    for d in (1e-8, 1e-10, 1e-12):
        expect = ((-1) ** (mu + 0.5) * math.pi * sf.gamma(mu + 2)
                  / (2 * sf.gamma(mu + 1) * sf.gamma(2 - mu)) * (d / 2) ** (mu / 2))
        q = sf.legendre_q1(mu, 1 - d)
        assert q == pytest.approx(expect, rel=1e-2)
        vals.append(abs(q))
    assert vals[0] > vals[1] > vals[2] and vals[0] < 1.0


def test_q_half_blows_up_at_minus_one():
    mu = 0.5
    scaled = [abs(sf.legendre_q1(mu, -1 + d)) * d ** (mu / 2) for d in (1e-8, 1e-10, 1e-12)]
    assert scaled[1] == pytest.approx(scaled[0], rel=1e-2)
    assert scaled[2] == pytest.approx(scaled[0], rel=1e-2)
    assert abs(sf.legendre_q1(mu, -1 + 1e-12)) > 1e2


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 4.0).filter(lambda m: abs(m - round(m)) > 1e-3),
       st.floats(-0.95, 0.95))
def test_connection_formula_property(mu, y):
    # Q(y) = -cos((1+mu) pi) Q(-y) - (pi/2) sin((1+mu) pi) P(-y)
    lhs = sf.legendre_q1(mu, y)
    rhs = (-sf.cospi(1 + mu) * sf.legendre_q1(mu, -y)
           - math.pi / 2 * sf.sinpi(1 + mu) * sf.legendre_p1(mu, -y))
    scale = 1 + abs(sf.legendre_q1(mu, -y)) + abs(sf.legendre_p1(mu, -y))
    assert abs(lhs - rhs) <= 1e-11 * scale


def test_order_equation_examples():
    assert sf.order_equation_lhs(0.25) == pytest.approx(-math.pi ** 2, rel=1e-12)
    assert sf.order_equation_lhs(1 / 3) == pytest.approx(-math.pi ** 2 / 3, rel=1e-12)
    with pytest.raises(DomainError) as info:
        sf.order_equation_lhs(1.0)
    assert info.value.location == 1.0


def test_order_equation_pole_location_reported():
    with pytest.raises(DomainError) as info:
        sf.order_equation_lhs(3.004)
    assert info.value.location == 3.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.011, 9.989).filter(lambda m: abs(m - round(m)) >= 0.01))
def test_order_equation_matches_closed_form(mu):
    g = sf.order_equation_lhs(mu)
    c = -math.pi ** 2 / math.tan(math.pi * mu) ** 2
    assert abs(g - c) <= 1e-8 * abs(c)


def test_scan_spec_examples():
    rep = sf.scan_no_root(0.05, 10, 1e-3)
    assert rep.min_gap >= math.pi ** 2 * (1 - 1e-12)
    assert rep.min_gap == pytest.approx(min(abs(g - math.pi ** 2) for _, g in rep.samples))
    assert sf.scan_no_root(0.05, 0.45, 1e-3).excluded == []
    ex = sf.scan_no_root(0.5, 1.5, 1e-3).excluded
    assert ex == [(1.0, 1e-2)]


def test_scan_full_range_no_near_root_and_fast():
    t = time.perf_counter()
    rep = sf.scan_no_root(1e-3, 10.0, 1e-3)
    elapsed = time.perf_counter() - t
    assert elapsed <= 2.0
    gaps = [abs(g - math.pi ** 2) for _, g in rep.samples]
    assert min(gaps) >= 1.0
    assert rep.max_closed_form_error <= 1e-8
    centers = [c for c, _ in rep.excluded]
    assert centers == [float(k) for k in range(0, 11)]
    assert rep.argmin == pytest.approx(0.5)


def test_scan_parameter_validation():
    with pytest.raises(DomainError):
        sf.scan_no_root(0.0, 1.0, 1e-3)
    with pytest.raises(DomainError):
        sf.scan_no_root(0.1, 1.0, 0.0)
