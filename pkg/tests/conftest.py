"""Shared, session-scoped numerical fixtures and the acceptance summary."""
import numpy as np
import pytest

from liouville import negindex4d as ni
from liouville.radial3d import RadialGrid, continue_eps_to_zero
from liouville.strip2d import StripGrid, bifurcation_diagnostics

ACCEPTANCE_LINES = {}


def record_criterion(number, title, passed, detail):
    ACCEPTANCE_LINES[number] = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title} | {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def eps_continuation():
    return continue_eps_to_zero(grid=RadialGrid())


@pytest.fixture(scope="session")
def limit_profile(eps_continuation):
    return eps_continuation.limit


@pytest.fixture(scope="session")
def strip_pi():
    return StripGrid(np.pi)


@pytest.fixture(scope="session")
def diag_pi(strip_pi):
    return bifurcation_diagnostics(np.pi, strip_pi)


@pytest.fixture(scope="session")
def negindex_setup(limit_profile):
    """(mu search, u_mu on the eigen grid, eigenpair, sign-change t)."""
    search = ni.find_mu_star(limit_profile)
    mu = search.mu_star
    u_mu = ni.rescale_solution(limit_profile, mu, grid=limit_profile.grid.scaled(1.0 / mu))
    pair = ni.v0_eigenpair(u_mu)
    u_e = ni.on_grid(u_mu, pair.v0.grid)
    return {"search": search, "mu": mu, "u_mu_scaled": u_mu, "u_mu": u_e, "pair": pair,
            "t_c": ni.sign_change_t(pair.v0, u_e)}


@pytest.fixture(scope="session")
def branch_pi(diag_pi):
    from liouville.strip2d import continue_branch
    return continue_branch(diag_pi, n_steps=20, ds=0.01)


@pytest.fixture(scope="session")
def limit_profile_wide():
    """Limit profile with the truncation radius enlarged 1.5 times."""
    return continue_eps_to_zero(grid=RadialGrid(R=60.0, n=6000)).limit


@pytest.fixture(scope="session")
def picard_tenth():
    from liouville.radial3d import picard_solve
    return picard_solve(0.1)
