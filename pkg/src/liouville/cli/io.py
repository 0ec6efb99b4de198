"""Text formats for strip fields, radial profiles and CSV tables.

Numbers are written with 17 significant digits, which round-trips every
double exactly.
"""
import hashlib

import numpy as np

from ..errors import FormatError
from ..radial3d.grid import RadialGrid, RadialProfile
from ..strip2d.grid import StripField, StripGrid

FIELD_HEADER = "# liouville-field v1"
PROFILE_HEADER = "# liouville-profile v1"


def fmt(x):
    return "%.17g" % x


def _meta_line(pairs):
    return "# " + " ".join(f"{k}={v}" for k, v in pairs)


def _parse_meta(line):
    out = {}
    for tok in line.lstrip("#").split():
        if "=" not in tok:
            raise FormatError(f"bad metadata token {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def dumps_field(u):
    g = u.grid
    lines = [FIELD_HEADER,
             f"{fmt(g.lam)} {fmt(g.X)} {g.nx} {g.ny}",
             _meta_line([("x_bc", g.x_bc), ("base_scale", fmt(u.base_scale)),
                         ("symmetric", int(u.symmetric))])]
    lines += [" ".join(fmt(v) for v in row) for row in u.values]
    return "\n".join(lines) + "\n"


def loads_field(text):
    lines = text.splitlines()
    if not lines or lines[0].strip() != FIELD_HEADER:
        raise FormatError(f"expected header {FIELD_HEADER!r}")
    try:
        lam, X, nx, ny = lines[1].split()
        lam, X, nx, ny = float(lam), float(X), int(nx), int(ny)
    except (IndexError, ValueError):
        raise FormatError("second line must be 'lambda X nx ny'") from None
    body, meta = lines[2:], {}
    if body and body[0].startswith("#"):
        meta = _parse_meta(body[0])
        body = body[1:]
    try:
        vals = np.array([[float(t) for t in row.split()] for row in body if row.strip()])
    except ValueError:
        raise FormatError("non-numeric field value") from None
    if vals.shape != (nx, ny):
        raise FormatError(f"expected {nx}x{ny} values, found {vals.shape}")
    grid = StripGrid(lam, X, nx, ny, meta.get("x_bc", "neumann"))
    return StripField(vals, grid, float(meta.get("base_scale", 1.0)),
                      bool(int(meta.get("symmetric", 0))))


def dumps_profile(u):
    g = u.grid
    lines = [PROFILE_HEADER, f"epsilon={fmt(u.epsilon)}",
             _meta_line([("R", fmt(g.R)), ("n", g.n), ("power", fmt(g.power)),
                         ("scale", fmt(g.scale))]),
             "r u"]
    lines += [f"{fmt(r)} {fmt(v)}" for r, v in zip(u.r, u.values)]
    return "\n".join(lines) + "\n"


def loads_profile(text):
    lines = text.splitlines()
    if not lines or lines[0].strip() != PROFILE_HEADER:
        raise FormatError(f"expected header {PROFILE_HEADER!r}")
    if len(lines) < 4 or not lines[1].startswith("epsilon="):
        raise FormatError("second line must be 'epsilon=<value>'")
    try:
        eps = float(lines[1].split("=", 1)[1])
        meta = _parse_meta(lines[2])
        grid = RadialGrid(float(meta["R"]), int(meta["n"]), float(meta["power"]),
                          float(meta.get("scale", 1.0)))
    except (KeyError, ValueError):
        raise FormatError("bad grid line") from None
    if lines[3].split() != ["r", "u"]:
        raise FormatError("missing 'r u' column line")
    try:
        data = np.array([[float(t) for t in row.split()] for row in lines[4:] if row.strip()])
    except ValueError:
        raise FormatError("non-numeric profile value") from None
    if data.shape != (grid.n, 2):
        raise FormatError(f"expected {grid.n} rows of 'r u'")
    if not np.array_equal(data[:, 0], grid.r):
        raise FormatError("radii do not match the declared grid")
    return RadialProfile(data[:, 1], grid, eps)


def save_field(path, u):
    with open(path, "w") as fh:
        fh.write(dumps_field(u))


def load_field(path):
    with open(path) as fh:
        return loads_field(fh.read())


def save_profile(path, u):
    with open(path, "w") as fh:
        fh.write(dumps_profile(u))


def load_profile(path):
    with open(path) as fh:
        return loads_profile(fh.read())


def load_any(path):
    """A strip field or a radial profile, decided by the header."""
    with open(path) as fh:
        text = fh.read()
    head = text.split("\n", 1)[0].strip()
    if head == FIELD_HEADER:
        return loads_field(text)
    if head == PROFILE_HEADER:
        return loads_profile(text)
    raise FormatError(f"unrecognized header {head!r}")


def write_csv(path, header, rows):
    """Rows of numbers/strings; floats use 17 significant digits."""
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                            for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
