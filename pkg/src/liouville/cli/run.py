"""Pipelines behind each CLI command, CSV emission and the run manifest."""
import json
import os
import time
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from .. import negindex4d as ni
from .. import normdiag as nd
from .. import specfun
from ..errors import ConfigError, LiouvilleError
from ..radial3d import (RadialGrid, biharmonic_residual, continue_eps_to_zero,
                        default_schedule, integral_equation_residual, picard_solve,
                        pohozaev_residual, volume)
from ..strip2d import (StripGrid, bifurcation_diagnostics, continue_branch,
                       detect_bifurcations, extend_by_reflection, linearized_spectrum,
                       seam_residuals, validate_stencil_order)
from . import io
from .config import COMMANDS, config_echo, emit_config


def package_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str
    summary: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)     # name -> sha256
    wall_clock_seconds: float = 0.0

    def to_dict(self, include_timing=True):
        d = {"command": self.command, "version": self.version, "config": self.config,
             "summary": self.summary, "files": self.files}
        if include_timing:
            d["wall_clock_seconds"] = self.wall_clock_seconds
        return d

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n"


def _clean(v):
    """JSON-safe summary values (floats kept at full precision)."""
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


class _Writer:
    def __init__(self, out):
        self.out = out
        self.files = []
        os.makedirs(out, exist_ok=True)

    def path(self, name):
        self.files.append(name)
        return os.path.join(self.out, name)

    def csv(self, name, header, rows):
        io.write_csv(self.path(name), header, rows)

    def text(self, name, text):
        with open(self.path(name), "w") as fh:
            fh.write(text)


def _strip_grid(p, lam):
    return StripGrid(lam, p["X"], p["nx"], p["ny"], p["x_bc"])


def _radial_grid(p):
    return RadialGrid(p["R"], p["n"], p["power"])


# -- commands ---------------------------------------------------------------

def _spectrum2d(p, w):
    rep = linearized_spectrum(p["lambda"], _strip_grid(p, p["lambda"]), p["n"])
    rows = [(p["lambda"], f"{lab[0]}:{lab[1]}", val) for val, lab, _ in rep.pairs]
    rows += [(p["lambda"], "2D", val) for val in rep.full2d.eigenvalues]
    w.csv("spectrum.csv", ["lambda", "mode", "eigenvalue"], rows)
    found = detect_bifurcations(p["detect_lo"], p["detect_hi"], p["detect_step"],
                                _strip_grid(p, 1.0))
    w.csv("bifurcations.csv", ["lambda"], [(float(x),) for x in found])
    return {"bound_gap": rep.bound_gap, "max_residual": max(rep.residuals),
            "bifurcations": found}


def _diagnostics(p):
    return bifurcation_diagnostics(p["lambda_star"], _strip_grid(p, p["lambda_star"]))


def _bifurcate2d(p, w):
    d = _diagnostics(p)
    b = continue_branch(d, p["n_steps"], p["ds"], tol=p["tol"], fit_tmax=p["fit_tmax"])
    w.csv("branch.csv", ["lambda", "t", "residual"],
          [(pt.lam, pt.t, pt.newton_residual) for pt in b.points])
    io.save_field(w.path("branch_last.field"), b.points[-1].field)
    return {"lambda_star": d.lambda_star, "lambda1": d.lambda1, "lambda2": d.lambda2,
            "fit_lambda_star": b.fit[0], "fit_lambda2": b.fit[1],
            "fit_cubic": b.cubic_coefficient, "points": len(b.points),
            "max_newton_residual": max(pt.newton_residual for pt in b.points),
            "min_lambda": float(b.lambdas.min())}


def _lambda2(p, w):
    d = _diagnostics(p)
    io.save_field(w.path("u_star.field"), d.u_star)
    io.save_field(w.path("u2.field"), d.u2)
    return {"lambda_star": d.lambda_star, "mode": d.mode, "lambda1": d.lambda1,
            "lambda2": d.lambda2, "lambda2_without_u2": d.lambda2_without_u2,
            "kernel_residual": d.kernel_residual, "u2_residual": d.u2_residual}


def _radial3d(p, w):
    grid = _radial_grid(p)
    sched = default_schedule(p["eps_max"], p["eps_min"], p["ratio"])
    cont = continue_eps_to_zero(sched, grid, p["tol"], p["max_iter"])
    rows = [(prof.epsilon, float(prof.values[0]), rep.residual, rep.iterations,
             pohozaev_residual(prof, prof.epsilon))
            for prof, rep in zip(cont.profiles, cont.reports)]
    w.csv("stages.csv", ["epsilon", "u0", "residual", "iterations", "pohozaev"], rows)
    io.save_profile(w.path("limit.profile"), cont.limit)
    fit = nd.decay_fit(cont.limit)
    return {"stages": len(sched), "limit_u0": float(cont.limit.values[0]),
            "measured_order": cont.measured_order, "order_used": cont.order,
            "integral_residual_r10": integral_equation_residual(cont.limit, 0.0, 10.0),
            "biharmonic_residual": biharmonic_residual(cont.limit),
            "volume": volume(cont.limit), "decay_kind": fit.kind, "decay_rate": fit.rate}


def _pohozaev(p, w):
    prof, rep = picard_solve(p["epsilon"], _radial_grid(p), p["tol"], p["max_iter"])
    io.save_profile(w.path("profile.profile"), prof)
    w.csv("picard.csv", ["iteration", "residual"],
          [(i, float(r)) for i, r in enumerate(rep.residual_history)])
    return {"epsilon": p["epsilon"], "pohozaev": pohozaev_residual(prof, p["epsilon"]),
            "u0": float(prof.values[0]), "iterations": rep.iterations,
            "picard_residual": rep.residual}


def _legendre_scan(p, w):
    rep = specfun.scan_no_root(p["mu_lo"], p["mu_hi"], p["step"], p["radius"])
    w.csv("scan.csv", ["mu", "g"], rep.samples)
    return {"min_gap": rep.min_gap, "argmin": rep.argmin, "samples": len(rep.samples),
            "excluded": [list(e) for e in rep.excluded],
            "max_closed_form_error": rep.max_closed_form_error}


def _negindex4d(p, w):
    if p["profile"]:
        u1 = io.load_profile(p["profile"])
    else:
        u1 = continue_eps_to_zero(grid=_radial_grid(p)).limit
    search = ni.find_mu_star(u1, mu_cap=p["mu_cap"])
    mu = search.mu_star
    u_mu = ni.rescale_solution(u1, mu, grid=u1.grid.scaled(1.0 / mu))
    pair = ni.v0_eigenpair(u_mu)
    u_e = ni.on_grid(u_mu, pair.v0.grid)
    t_c = ni.sign_change_t(pair.v0, u_e)
    rows = []
    for lam in p["lambdas"]:
        rep = ni.count_negative(lam, ni.kmax_for(lam, t_c), pair.v0, u_e, mu, pair.nu0)
        rows.append((lam, mu, pair.nu0, rep.counts))
        w.csv(f"f_samples_lambda_{io.fmt(lam)}.csv", ["t", "f"], rep.f_samples)
    w.csv("negindex.csv", ["lambda", "mu", "nu0", "count"], rows)
    t_max = ni.decayed_t(pair.v0, u_e, p["decay_factor"])
    ratio = ni.f_of_t(t_max, pair.v0, u_e) / ni.norm_squared(pair.v0)
    return {"mu_star": mu, "form": search.form, "nu0": pair.nu0,
            "backward_error": pair.backward_error, "f0": ni.f_of_t(0.0, pair.v0, u_e),
            "t_sign_change": t_c, "t_max": t_max, "f_tmax_ratio": ratio,
            "counts": [r[3] for r in rows]}


def _extend(p, w):
    u = io.load_field(p["field"])
    ext = extend_by_reflection(u, p["copies"], p["neumann_tol"])
    io.save_field(w.path("extended.field"), ext)
    seam, bulk = seam_residuals(ext, p["copies"]) if p["copies"] > 1 else (0.0, 0.0)
    return {"copies": p["copies"], "width": ext.grid.lam, "seam_residual": seam,
            "bulk_residual": bulk}


def _norms(p, w):
    u = io.load_any(p["field"])
    names = list(nd.SPACE_EXPONENTS[p["space"]])
    if p["exponents"] and len(p["exponents"]) != len(names):
        raise ConfigError(f"exponents needs {len(names)} values for {p['space']}",
                          key="exponents")
    exps = dict(zip(names, p["exponents"])) if p["exponents"] else None
    rep = nd.membership_check(u, p["space"], exps, p["alpha"], p["inner_fraction"],
                              p["growth_tol"])
    w.text("norms.txt", rep.to_text())
    return {"space": p["space"], "passed": rep.passed,
            "components": {c.name: c.full for c in rep.components}}


def validation_checks(h=0.05, samples=50, seed=0):
    """(name, value, threshold, passed) for the discretization oracles."""
    rng = np.random.default_rng(seed)
    checks = []
    order = validate_stencil_order(h)[0]
    checks.append(("stencil_order", order, "[1.8, 2.2]", 1.8 <= order <= 2.2))
    mus = rng.uniform(1e-6, 1.0 - 1e-6, samples)
    refl = max(abs(specfun.gamma(m) * specfun.gamma(1 - m) * np.sin(np.pi * m) / np.pi - 1)
               for m in mus)
    checks.append(("gamma_reflection", refl, "1e-12", refl <= 1e-12))
    ident = max(nd.operator_identity_defect(nd.random_operator_sample(rng))
                for _ in range(samples))
    checks.append(("operator_transform", ident, "1e-10", ident <= 1e-10))
    gap = 0.0
    for _ in range(5):
        u = rng.normal(size=(20, 1))
        x = np.sort(rng.uniform(0.0, 1.0, 20))
        spec = nd.WeightSpec(rng.uniform(-1, 1), rng.uniform(0.05, 0.95), int(rng.integers(0, 3)))
        gap = max(gap, abs(nd.weighted_holder_seminorm((u, x), spec)
                           - nd.holder_seminorm_all_pairs((u, x), spec)))
    checks.append(("holder_all_pairs", gap, "0", gap == 0.0))
    return checks


def _validate(p, w):
    checks = validation_checks(p["h"], p["samples"], p["seed"])
    w.csv("validate.csv", ["check", "value", "threshold", "passed"],
          [(n, float(v), t, int(ok)) for n, v, t, ok in checks])
    passed = sum(1 for c in checks if c[3])
    return {"passed": passed, "failed": len(checks) - passed}


PIPELINES = {
    "spectrum2d": _spectrum2d, "bifurcate2d": _bifurcate2d, "lambda2": _lambda2,
    "radial3d": _radial3d, "pohozaev": _pohozaev, "legendre-scan": _legendre_scan,
    "negindex4d": _negindex4d, "extend": _extend, "norms": _norms, "validate": _validate,
}
assert set(PIPELINES) == set(COMMANDS)


class CommandFailure(Exception):
    """Wraps a module error with the command that raised it."""

    def __init__(self, command, error):
        super().__init__(f"{command}: {error}")
        self.command = command
        self.error = error


def run(cfg):
    """Execute ``cfg`` and write its outputs plus manifest.json into cfg.out."""
    start = time.perf_counter()
    w = _Writer(cfg.out)
    w.text("config.txt", emit_config(cfg, include_out=False))
    try:
        summary = PIPELINES[cfg.command](cfg.params, w)
    except LiouvilleError as exc:
        raise CommandFailure(cfg.command, exc) from exc
    files = {name: io.sha256_file(os.path.join(cfg.out, name)) for name in w.files}
    man = RunManifest(cfg.command, config_echo(cfg), package_version(), _clean(summary),
                      files, time.perf_counter() - start)
    with open(os.path.join(cfg.out, "manifest.json"), "w") as fh:
        fh.write(man.to_json())
    return man
