"""``liouville <command> --config <path> [--out <dir>]``.

Exit status: 0 success, 2 usage or configuration error, 3 numerical
non-convergence, 4 I/O or file-format error, 1 any other failure.
"""
import argparse
import sys

from ..errors import ConfigError, ConvergenceError, FormatError
from .config import COMMANDS, parse_config
from .run import CommandFailure, run

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3, 4


def _parser():
    p = argparse.ArgumentParser(prog="liouville", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    return p


def exit_code(exc):
    err = exc.error if isinstance(exc, CommandFailure) else exc
    if isinstance(err, ConfigError):
        return EXIT_CONFIG
    if isinstance(err, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(err, (OSError, FormatError)):
        return EXIT_IO
    return EXIT_OTHER


def main(argv=None):
    args = _parser().parse_args(argv)     # usage errors exit with status 2
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"liouville: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text, command=args.command)
        if args.out is not None:
            cfg.out = args.out
        man = run(cfg)
    except (CommandFailure, ConfigError, OSError) as exc:
        print(f"liouville: {exc}", file=sys.stderr)
        return exit_code(exc)
    except Exception as exc:       # numerical library failures not wrapped above
        print(f"liouville: {args.command}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    for k, v in man.summary.items():
        print(f"{k}: {v}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
