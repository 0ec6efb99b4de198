"""Strip discretization, spectrum, bifurcation diagnostics and branch tools."""
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liouville.errors import (ContinuationStall, ContractError, ConvergenceError,
                              DegeneracyError, DomainError)
from liouville.strip2d import (HalfOperators, NewtonHistory, StripField, StripGrid,
                               bifurcation_diagnostics, classified_solution,
                               continue_branch, detect_bifurcations, extend_by_reflection,
                               fit_branch, linearized_spectrum, newton_solve,
                               per_mode_spectrum, period_epsilon, poschl_teller_ground,
                               poschl_teller_levels, pt_dense_matrix, rescale_to_exact_period,
                               residual_2d, seam_residuals, stencil_residual, sup_norm,
                               trivial_solution_2d, validate_stencil_order, zero_field)
from liouville.strip2d.grid import base_exponential


def exact_family(x, y, a):
    """log(2(1-a^2)/(cosh x - a cos y)^2): solutions of Delta u + e^u = 0
    with y-period 2 pi for every |a| < 1."""
    return np.log(2.0 * (1.0 - a * a) / (np.cosh(x) - a * np.cos(y)) ** 2)


def dense_stencil_residual(grid, u):
    """Node-by-node five-point residual with explicit ghost lookups."""
    v, nx, ny = u.values, grid.nx, grid.ny
    hx, hy = grid.hx, grid.hy
    out = np.zeros_like(v)
    for i in range(nx):
        if grid.x_bc == "dirichlet" and i in (0, nx - 1):
            continue
        ip = i + 1 if i + 1 < nx else i - 1
        im = i - 1 if i > 0 else i + 1
        e0 = 2.0 / np.cosh(grid.x[i] * u.base_scale) ** 2 * u.base_scale ** 2
        for j in range(ny):
            jp = j + 1 if j + 1 < ny else j - 1
            jm = j - 1 if j > 0 else j + 1
            lap = (v[ip, j] - 2.0 * v[i, j] + v[im, j]) / hx ** 2 + \
                (v[i, jp] - 2.0 * v[i, j] + v[i, jm]) / hy ** 2
            out[i, j] = lap + e0 * np.expm1(v[i, j])
    return out


def random_smooth_field(grid, rng):
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    c = rng.normal(size=4)
    v = 0.1 * (c[0] * np.exp(-X ** 2 / 8) * np.cos(np.pi * Y / grid.lam)
               + c[1] * np.sin(0.3 * X) * np.cos(2 * np.pi * Y / grid.lam)
               + c[2] / np.cosh(X) + c[3] * np.cos(0.1 * X))
    return StripField(v, grid)


# -- trivial solution ---------------------------------------------------------

def test_trivial_solution_at_zero():
    assert trivial_solution_2d(0.0) == pytest.approx(np.log(2.0), abs=1e-15)


def test_trivial_solution_far_field_asymptote():
    assert trivial_solution_2d(20.0) + 40.0 == pytest.approx(np.log(8.0), abs=1e-10)


@given(st.floats(-30, 30))
def test_trivial_solution_solves_ode(x):
    # u0'' = -2 sech^2 x in closed form; u0'' + e^{u0} = 0
    assert -2.0 / np.cosh(x) ** 2 + np.exp(trivial_solution_2d(x)) == pytest.approx(0.0, abs=1e-15)


def test_trivial_solution_scaled_is_the_dilated_solution():
    x = np.linspace(-5, 5, 11)
    c = 1.3
    assert np.allclose(trivial_solution_2d(x, c), trivial_solution_2d(c * x) + 2 * np.log(c),
                       atol=1e-14)


# -- residual -------------------------------------------------------------------

def test_residual_of_zero_is_exactly_zero():
    g = StripGrid(np.pi)
    assert np.all(residual_2d(g, zero_field(g)).values == 0.0)
    assert np.all(HalfOperators(g).residual(g.lam, np.zeros(g.n_unknowns)) == 0.0)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.5, 10.0), nx=st.integers(1, 60), ny=st.integers(3, 30),
       X=st.floats(1.0, 30.0), bc=st.sampled_from(["neumann", "dirichlet"]))
def test_trivial_branch_on_every_grid(lam, nx, ny, X, bc):
    g = StripGrid(lam, X, 2 * nx + 1, ny, bc)
    assert np.all(residual_2d(g, zero_field(g)).values == 0.0)


@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
def test_residual_matches_dense_stencil_oracle(bc):
    rng = np.random.default_rng(3)
    g = StripGrid(2.7, X=6.0, nx=61, ny=13, x_bc=bc)
    u = random_smooth_field(g, rng)
    got = residual_2d(g, u).values
    assert np.max(np.abs(got - dense_stencil_residual(g, u))) <= 1e-12


def test_residual_rejects_field_from_other_grid():
    g = StripGrid(np.pi, nx=101, ny=11)
    other = zero_field(StripGrid(2.0, nx=101, ny=11))
    with pytest.raises(ContractError):
        residual_2d(g, other)


def test_exact_family_is_a_discrete_solution_to_second_order():
    # perturbation of the exact family on the width-pi strip
    res = []
    for ny in (21, 41):
        g = StripGrid(np.pi, X=20.0, nx=32 * (ny - 1) + 1, ny=ny)
        X, Y = np.meshgrid(g.x, g.y, indexing="ij")
        w = exact_family(X, Y, 0.3) - trivial_solution_2d(X)
        res.append(sup_norm(residual_2d(g, StripField(w, g))))
    assert 3.6 <= res[0] / res[1] <= 4.4


# -- symmetry of L ----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(lam=st.floats(1.0, 8.0), nx=st.integers(5, 100), ny=st.integers(3, 11),
       bc=st.sampled_from(["neumann", "dirichlet"]), seed=st.integers(0, 2 ** 31))
def test_linearization_is_symmetric(lam, nx, ny, bc, seed):
    g = StripGrid(lam, 20.0, 2 * nx + 1, ny, bc)
    L = HalfOperators(g).linearization(lam)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, g.n_unknowns))
    W = g.weights
    lhs = W @ ((L @ u) * v) - W @ (u * (L @ v))
    assert abs(lhs) <= 1e-12 * np.sqrt(W @ u ** 2) * np.sqrt(W @ v ** 2)


# -- Pöschl–Teller ------------------------------------------------------------------

def test_poschl_teller_ground_state():
    t0 = time.perf_counter()
    val, prof = poschl_teller_ground(20.0, 0.01)
    assert time.perf_counter() - t0 <= 5.0
    assert val == pytest.approx(-1.0, abs=1e-4)
    s = 1.0 / np.cosh(prof.x)
    assert prof.values @ s / np.linalg.norm(prof.values) / np.linalg.norm(s) >= 0.9999
    assert np.all(prof.values > 0)


def test_poschl_teller_has_one_bound_state():
    _, vals, _ = poschl_teller_levels(20.0, 0.05, 2)
    dense = np.linalg.eigvalsh(pt_dense_matrix(20.0, 0.05))
    assert np.allclose(vals, dense[:2], atol=1e-10)
    assert dense[1] >= -1e-3


def test_poschl_teller_precondition():
    with pytest.raises(ContractError):
        poschl_teller_ground(5.0, 0.01)
    with pytest.raises(ContractError):
        poschl_teller_ground(20.0, 0.1)


# -- spectrum -------------------------------------------------------------------------

def test_spectrum_at_pi_contains_kernel_and_bound_level(strip_pi):
    rep = linearized_spectrum(np.pi, strip_pi, n=6)
    labels = {p[1]: p[0] for p in rep.pairs}
    assert abs(labels[(0, 1)]) <= 1e-3
    assert all(r <= 1e-8 for r in rep.residuals)
    assert rep.bound_gap <= 1e-6
    # the j = 0 bound level sits behind the x continuum near 0
    per = per_mode_spectrum(strip_pi, 12)
    j0 = [p[0] for p in per.pairs if p[1] == (0, 0)]
    assert j0 and j0[0] == pytest.approx(1.0, abs=1e-4)


def test_spectrum_at_two_has_no_bound_kernel():
    rep = linearized_spectrum(2.0, StripGrid(2.0), n=6)
    assert all(abs(p[0]) > 1e-3 for p in rep.bound_modes())
    assert rep.bound_gap <= 1e-6


def test_kernel_field_matches_sech_cos(strip_pi):
    rep = linearized_spectrum(np.pi, strip_pi, n=2)
    f = [p[2] for p in rep.pairs if p[1] == (0, 1)][0]
    X, Y = np.meshgrid(strip_pi.x, strip_pi.y, indexing="ij")
    ref = StripField(np.cos(Y) / np.cosh(X), strip_pi)
    assert abs(f.inner(ref)) / (f.norm() * ref.norm()) >= 0.999


def test_full_2d_kernel_eigenfield_similarity():
    g = StripGrid(np.pi, X=12.0, nx=481, ny=21)
    rep = linearized_spectrum(np.pi, g, n=3)
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    ref = StripField(np.cos(Y) / np.cosh(X), g)
    sims = [abs(p[2].inner(ref)) / (p[2].norm() * ref.norm()) for p in rep.full2d.pairs]
    assert max(sims) >= 0.999


@pytest.mark.parametrize("lo,hi,expected", [
    (1.0, 10.0, [np.pi, 2 * np.pi, 3 * np.pi]),
    (0.5, 3.0, []),
    (3.0, 4.0, [np.pi]),
])
def test_detect_bifurcations(lo, hi, expected):
    found = detect_bifurcations(lo, hi, 0.05)
    assert len(found) == len(expected)
    assert np.allclose(found, expected, atol=1e-2)


def test_detect_bifurcations_precondition():
    with pytest.raises(ValueError):
        detect_bifurcations(3.0, 1.0)


# -- bifurcation diagnostics -----------------------------------------------------------

def test_diagnostics_first_coefficient_vanishes(diag_pi):
    assert abs(diag_pi.lambda1) <= 1e-8


def test_diagnostics_kernel_and_u2(diag_pi):
    us = diag_pi.u_star
    assert diag_pi.kernel_residual <= 1e-6
    assert diag_pi.u2_residual <= 1e-8
    assert np.array_equal(diag_pi.psi.values, us.values)
    assert abs(diag_pi.u2.inner(us)) <= 1e-10 * diag_pi.u2.norm() * us.norm() + 1e-14
    assert diag_pi.lambda_star == pytest.approx(np.pi, abs=1e-3)


def test_lambda_derivative_is_parallel_to_kernel(diag_pi):
    g = diag_pi.grid
    ops = HalfOperators(g)
    us = diag_pi.u_star.unknowns()
    Mu = ops.d_lambda(g.lam, us)
    c = (g.weights @ (Mu * us)) / (g.weights @ us ** 2)
    assert np.max(np.abs(Mu - c * us)) <= 1e-10 * np.max(np.abs(Mu))
    assert c == pytest.approx(2.0 / np.pi, rel=1e-3)


def test_coefficient_without_u2_is_minus_lambda_over_15(diag_pi):
    # closed form: -(int sech^6 int cos^4) / (3 int sech^2 int cos^2) / lambda-factor
    assert diag_pi.lambda2_without_u2 == pytest.approx(-np.pi / 15, rel=2e-3)


def test_second_coefficient_vanishes_under_refinement(diag_pi):
    # the exact family has period pi for every amplitude, so lambda2 = 0
    fine = bifurcation_diagnostics(np.pi, StripGrid(np.pi, ny=81))
    assert abs(diag_pi.lambda2) <= 1e-3
    assert abs(fine.lambda2) <= abs(diag_pi.lambda2) / 3.0


def test_dirichlet_second_coefficient_is_a_truncation_artifact():
    vals = []
    for X in (10.0, 20.0):
        g = StripGrid(np.pi, X=X, nx=int(100 * X) + 1, x_bc="dirichlet")
        vals.append(bifurcation_diagnostics(np.pi, g, tol=2e-3).lambda2)
    assert vals[0] > vals[1] > 0
    assert vals[0] / vals[1] == pytest.approx(2.0, rel=0.15)


def test_diagnostics_degenerate_kernel():
    # with X = 200 the first x continuum level lies within 1e-4 of 0
    with pytest.raises(DegeneracyError):
        bifurcation_diagnostics(np.pi, StripGrid(np.pi, X=200.0, nx=2001), tol=1e-2)


def test_diagnostics_requires_kernel_width():
    with pytest.raises(ContractError):
        bifurcation_diagnostics(3.3, StripGrid(3.3))


# -- Newton ---------------------------------------------------------------------------

def test_newton_trivial_solution_at_two():
    g = StripGrid(2.0, nx=201, ny=11)
    u = newton_solve(2.0, g)
    assert sup_norm(u) == 0.0
    # brute force: the dense symmetrized Jacobian at 0 is far from singular
    L = HalfOperators(g).linearization(2.0).toarray()
    s = np.sqrt(g.weights)
    A = s[:, None] * L / s[None, :]
    assert np.min(np.abs(np.linalg.eigvalsh(0.5 * (A + A.T)))) >= 1e-4


def test_newton_nontrivial_from_predictor():
    g = StripGrid(np.pi, x_bc="dirichlet")
    diag = bifurcation_diagnostics(np.pi, g, tol=2e-3)
    t0 = np.sqrt(0.05 / diag.lambda2)
    hist = NewtonHistory()
    u = newton_solve(np.pi + 0.05, diag.grid,
                     init=StripField(t0 * diag.u_star.values, diag.grid), history=hist)
    assert sup_norm(residual_2d(u.grid, u)) <= 1e-10
    assert u.inner(diag.u_star) / diag.u_star.inner(diag.u_star) > 1.0
    r = hist.residuals
    tail = [(a, b) for a, b in zip(r, r[1:]) if a <= 1e-1 and b >= 1e-10]
    assert tail and all(b <= 10.0 * a * a for a, b in tail)


@pytest.mark.parametrize("level", [30.0, 100.0])
def test_newton_far_init_fails(level, strip_pi):
    init = StripField(np.full((strip_pi.nx, strip_pi.ny), level), strip_pi)
    with pytest.raises(ConvergenceError) as exc:
        newton_solve(np.pi, strip_pi, init=init, max_iter=10)
    assert exc.value.last_residual is not None


def test_newton_tol_must_be_positive(strip_pi):
    with pytest.raises(DomainError):
        newton_solve(np.pi, strip_pi, tol=0.0)


# -- continuation -----------------------------------------------------------------------

def test_branch_points_converged(branch_pi):
    assert len(branch_pi.points) == 20
    for p in branch_pi.points:
        assert p.newton_residual <= 1e-10
        assert sup_norm(residual_2d(p.field.grid, p.field)) <= 1e-10
    assert np.all(np.diff(branch_pi.amplitudes) > 0)


def test_branch_fit_matches_diagnostics(branch_pi, diag_pi):
    c0, c2 = branch_pi.fit
    assert c2 == pytest.approx(diag_pi.lambda2, rel=0.1)
    # amplitude -> 0 recovers the discrete kernel width
    assert c0 == pytest.approx(diag_pi.lambda_star, abs=1e-6)
    assert abs(branch_pi.cubic_coefficient) <= 1.0


def test_discrete_kernel_width_is_second_order(diag_pi):
    fine = bifurcation_diagnostics(np.pi, StripGrid(np.pi, ny=81))
    e1, e2 = diag_pi.lambda_star - np.pi, fine.lambda_star - np.pi
    assert 3.5 <= e1 / e2 <= 4.5


def test_branch_points_even_and_neumann(branch_pi):
    for p in branch_pi.points:
        v = p.field.values
        assert np.array_equal(v, v[::-1])
        # the edge rows satisfy the mirrored-ghost equation
        res = residual_2d(p.field.grid, p.field).values
        assert np.max(np.abs(res[:, [0, -1]])) <= 1e-10


def test_branch_follows_exact_family(branch_pi):
    p = branch_pi.points[-1]
    g = p.field.grid
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    # w(0, 0) = log((1 + a)/(1 - a)) fixes the family member
    a = np.tanh(p.field.values[g.center, 0] / 2)
    ref = exact_family(X, Y * np.pi / g.lam, a) - trivial_solution_2d(X)
    assert np.max(np.abs(p.field.values - ref)) <= 1e-2 * np.max(np.abs(ref))


def test_oscillating_part_decays_in_bands(branch_pi):
    for p in branch_pi.points:
        g = p.field.grid
        osc = p.field.values - p.field.values.mean(axis=1, keepdims=True)
        ax = np.abs(g.x)
        weight = np.sqrt(1 + g.x ** 2)
        edges = np.arange(g.X / 2, g.X + 1e-9, 2.0)
        sups = [np.max(weight[(ax >= a) & (ax < b)][:, None]
                       * np.abs(osc[(ax >= a) & (ax < b)])) for a, b in zip(edges, edges[1:])]
        assert np.all(np.diff(sups) < 0)


def test_continuation_rejects_bad_step(diag_pi):
    with pytest.raises(DomainError):
        continue_branch(diag_pi, n_steps=1, ds=0.0)


def test_continuation_stall(diag_pi):
    with pytest.raises(ContinuationStall):
        continue_branch(diag_pi, n_steps=1, ds=0.01, tol=1e-18, max_newton=2)


def test_fit_branch_recovers_polynomial():
    t = np.linspace(0.01, 0.2, 20)
    c0, c2, c3 = fit_branch(t, 3.0 + 0.5 * t ** 2 - 0.2 * t ** 3)
    assert (c0, c2, c3) == pytest.approx((3.0, 0.5, -0.2), abs=1e-10)


# -- exact period and reflection -----------------------------------------------------------

def test_rescale_identity(branch_pi):
    u = branch_pi.points[3].field
    v = rescale_to_exact_period(u, 0.0)
    assert np.array_equal(v.values, u.values)
    assert v.grid.lam == u.grid.lam and v.grid.X == u.grid.X


def test_rescale_branch_point_to_exact_period(branch_pi):
    u = branch_pi.points[-1].field
    eps = period_epsilon(u.grid.lam, 1)
    v = rescale_to_exact_period(u, eps)
    assert v.grid.lam == np.pi
    r0 = residual_2d(u.grid, u).values
    r1 = residual_2d(v.grid, v).values
    assert sup_norm(residual_2d(v.grid, v)) <= 1e-6
    assert np.allclose(r1, (1 + eps) ** 2 * r0, rtol=0, atol=1e-12)


@given(st.floats(-0.5, 2.0))
def test_rescale_constant_shift_on_trivial_part(eps):
    g = StripGrid(np.pi * (1 + eps), X=10.0, nx=41, ny=5)
    u = zero_field(g)
    v = rescale_to_exact_period(u, eps)
    shift = v.full_solution() - u.full_solution()
    assert np.allclose(shift, 2 * np.log(1 + eps), atol=1e-12)
    assert v.meta["constant_shift"] == pytest.approx(2 * np.log(1 + eps), abs=1e-15)


def test_rescale_domain_error(branch_pi):
    with pytest.raises(DomainError):
        rescale_to_exact_period(branch_pi.points[0].field, -1.0)


def test_extend_trivial_field():
    g = StripGrid(np.pi, nx=201, ny=21)
    ext = extend_by_reflection(zero_field(g), copies=3)
    assert np.all(ext.values == 0.0)
    assert np.allclose(ext.full_solution(), trivial_solution_2d(g.x)[:, None], atol=0)


def test_extend_mirror_and_period(branch_pi):
    u = branch_pi.points[-1].field
    ny = u.grid.ny
    e2 = extend_by_reflection(u, copies=2)
    v = e2.values
    k = np.arange(ny)
    assert np.array_equal(v[:, ny - 1 + k], v[:, ny - 1 - k])
    e4 = extend_by_reflection(u, copies=4).values
    assert e4.shape[1] == 4 * (ny - 1) + 1
    assert np.array_equal(e4[:, : 2 * (ny - 1) + 1], e4[:, 2 * (ny - 1):])


def test_extend_seam_residual(branch_pi):
    u = branch_pi.points[-1].field
    seam, bulk = seam_residuals(extend_by_reflection(u, copies=4), 4)
    assert seam <= 2.0 * bulk


def test_extend_rejects_neumann_violation():
    g = StripGrid(np.pi, nx=201, ny=21)
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    bad = StripField(1e-3 * np.sin(Y) / np.cosh(X), g)
    with pytest.raises(ContractError):
        extend_by_reflection(bad, copies=2)


# -- classified-solution stencil oracle ---------------------------------------------------

@given(st.floats(-3, 3), st.floats(-3, 3))
def test_classified_solution_solves_liouville(x, y):
    # u = log 32 - 2 log(4 + r^2): Delta u = -32/(4 + r^2)^2 = -e^u
    r2 = x * x + y * y
    lap = -2.0 * (4.0 * (4.0 + r2) - 4.0 * r2) / (4.0 + r2) ** 2
    assert lap + np.exp(classified_solution(x, y)) == pytest.approx(0.0, abs=1e-14)


def test_stencil_order():
    order, r1, r2 = validate_stencil_order(0.05)
    assert 1.8 <= order <= 2.2
    assert r1 / r2 == pytest.approx(4.0, rel=0.15)
    assert stencil_residual(0.0125) < r2


def test_stencil_domain_error():
    with pytest.raises(DomainError):
        validate_stencil_order(0.0)


def test_base_exponential_matches_trivial():
    x = np.linspace(-10, 10, 21)
    assert np.allclose(base_exponential(x), np.exp(trivial_solution_2d(x)), rtol=1e-14)
