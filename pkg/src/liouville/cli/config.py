"""Plain-text ``key = value`` run configurations with a per-command schema.

Blank lines and lines starting with ``#`` are ignored. Lists are comma
separated. Every key must belong to the command's schema; missing keys
take their defaults unless marked required.
"""
from dataclasses import dataclass, field

from ..errors import ConfigError

REQUIRED = object()


@dataclass(frozen=True)
class Key:
    kind: str                 # float | int | str | floats | bool
    default: object = REQUIRED
    positive: bool = False
    choices: tuple = ()
    doc: str = ""


def _strip_grid():
    return {
        "X": Key("float", 20.0, True, doc="x truncation half-width"),
        "nx": Key("int", 2001, True, doc="x nodes (odd)"),
        "ny": Key("int", 41, True, doc="y nodes"),
        "x_bc": Key("str", "neumann", choices=("neumann", "dirichlet"),
                    doc="closure for the perturbation at x = +-X"),
    }


def _radial_grid():
    return {
        "R": Key("float", 40.0, True, doc="truncation radius"),
        "n": Key("int", 4000, True, doc="radial nodes"),
        "power": Key("float", 1.5, True, doc="grading exponent"),
    }


SCHEMAS = {
    "spectrum2d": {
        "lambda": Key("float", positive=True, doc="strip width"),
        "n": Key("int", 6, True, doc="eigenvalues nearest 0"),
        "detect_lo": Key("float", 1.0, True),
        "detect_hi": Key("float", 10.0, True),
        "detect_step": Key("float", 0.05, True),
        **_strip_grid(),
    },
    "bifurcate2d": {
        "lambda_star": Key("float", positive=True),
        "n_steps": Key("int", 20, True),
        "ds": Key("float", 0.01, True),
        "tol": Key("float", 1e-10, True),
        "fit_tmax": Key("float", 0.2, True),
        **_strip_grid(),
    },
    "lambda2": {
        "lambda_star": Key("float", positive=True),
        **_strip_grid(),
    },
    "radial3d": {
        "eps_max": Key("float", 1.0, True),
        "eps_min": Key("float", 2.0 ** -17, True),
        "ratio": Key("float", 0.5, True),
        "tol": Key("float", 1e-11, True),
        "max_iter": Key("int", 20000, True),
        **_radial_grid(),
    },
    "pohozaev": {
        "epsilon": Key("float", positive=True),
        "tol": Key("float", 1e-11, True),
        "max_iter": Key("int", 20000, True),
        **_radial_grid(),
    },
    "legendre-scan": {
        "mu_lo": Key("float", 1e-3, True),
        "mu_hi": Key("float", 10.0, True),
        "step": Key("float", 1e-3, True),
        "radius": Key("float", 1e-2, True),
    },
    "negindex4d": {
        "profile": Key("str", "", doc="limit profile file; empty: compute it"),
        "lambdas": Key("floats", (5.0, 10.0, 20.0, 40.0), True),
        "mu_cap": Key("float", 2.0 ** 20, True),
        "decay_factor": Key("float", 100.0, True),
        **_radial_grid(),
    },
    "extend": {
        "field": Key("str", doc="strip field file"),
        "copies": Key("int", 2, True),
        "neumann_tol": Key("float", 1e-6, True),
    },
    "norms": {
        "field": Key("str", doc="strip field or radial profile file"),
        "space": Key("str", "X2", choices=("X2", "Y2", "X4", "Y4")),
        "alpha": Key("float", 0.5, True),
        "inner_fraction": Key("float", 0.8, True),
        "growth_tol": Key("float", 0.05, True),
        "exponents": Key("floats", (), doc="override <x> exponents in component order"),
    },
    "validate": {
        "h": Key("float", 0.05, True),
        "samples": Key("int", 50, True),
        "seed": Key("int", 0),
    },
}

COMMANDS = tuple(SCHEMAS)


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: str = "out"

    def __getitem__(self, key):
        return self.params[key]

    def __eq__(self, other):
        return isinstance(other, RunConfig) and (self.command, self.params, self.out) == \
            (other.command, other.params, other.out)


def _convert(key, spec, raw, line):
    try:
        if spec.kind == "float":
            val = float(raw)
        elif spec.kind == "int":
            val = int(raw)
        elif spec.kind == "bool":
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            val = raw.lower() in ("true", "1", "yes")
        elif spec.kind == "floats":
            val = tuple(float(p) for p in raw.split(",") if p.strip())
        else:
            val = raw
    except ValueError:
        raise ConfigError(f"line {line}: {key} expects {spec.kind}, got {raw!r}",
                          key=key, line=line) from None
    _validate(key, spec, val, line)
    return val


def _validate(key, spec, val, line=None):
    where = f"line {line}: " if line is not None else ""
    if spec.positive:
        vals = val if isinstance(val, tuple) else (val,)
        if any(v <= 0 for v in vals):
            raise ConfigError(f"{where}{key} must be positive", key=key, line=line)
    if spec.choices and val not in spec.choices:
        raise ConfigError(f"{where}{key} must be one of {spec.choices}", key=key, line=line)


def parse_config(text, command=None, out="out"):
    """Parse ``text`` into a RunConfig.

    The command comes from ``command`` or a ``command = ...`` line (both
    must agree when given).
    """
    entries, lines = {}, {}
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"line {no}: expected 'key = value'", line=no)
        k, v = (p.strip() for p in s.split("=", 1))
        if not k:
            raise ConfigError(f"line {no}: empty key", line=no)
        if k in entries:
            raise ConfigError(f"line {no}: duplicate key {k}", key=k, line=no)
        entries[k], lines[k] = v, no
    file_cmd = entries.pop("command", None)
    if command is None:
        command = file_cmd
    elif file_cmd is not None and file_cmd != command:
        raise ConfigError(f"line {lines['command']}: config is for {file_cmd!r}, not {command!r}",
                          key="command", line=lines["command"])
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}", key="command",
                          line=lines.get("command"))
    out = entries.pop("out", out)
    schema = SCHEMAS[command]
    params = {}
    for k, v in entries.items():
        if k not in schema:
            raise ConfigError(f"line {lines[k]}: unknown key {k!r} for {command}",
                              key=k, line=lines[k])
        params[k] = _convert(k, schema[k], v, lines[k])
    for k, spec in schema.items():
        if k not in params:
            if spec.default is REQUIRED:
                raise ConfigError(f"missing required key {k!r} for {command}", key=k)
            params[k] = spec.default
    return RunConfig(command, params, out)


def _format(val):
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, tuple):
        return ", ".join(repr(float(v)) for v in val)
    return str(val)


def emit_config(cfg, include_out=True):
    """Text that parses back to ``cfg`` (with ``out`` when included)."""
    lines = [f"command = {cfg.command}"] + ([f"out = {cfg.out}"] if include_out else [])
    lines += [f"{k} = {_format(v)}" for k, v in cfg.params.items()]
    return "\n".join(lines) + "\n"


def config_echo(cfg):
    """JSON-friendly view of the parameters."""
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.params.items()}
