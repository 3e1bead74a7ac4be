"""Command-line front end: ``airyedge <subcommand> [flags]``.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O failure.
Flags given on the command line override values from ``--config``.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import DomainError, NumericalError
from .engine import ExperimentConfig, run
from .experiments import REGISTRY
from .io import read_config, write_report

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

GLOBAL_DEFAULTS = {"seed": 0, "reps": 1, "workers": 1, "out": "-", "format": "json"}


def _add_globals(p):
    S = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=S, help="master seed (64-bit unsigned)")
    p.add_argument("--reps", type=int, default=S, help="number of replicas")
    p.add_argument("--workers", type=int, default=S, help="worker threads")
    p.add_argument("--out", default=S, help="output path, '-' for standard output")
    p.add_argument("--format", choices=("csv", "json"), default=S)
    p.add_argument("--config", default=S, help="file of 'key = value' lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airyedge", description="Edge-of-spectrum Monte Carlo laboratory.")
    _add_globals(parser)
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name, exp in REGISTRY.items():
        sp = sub.add_parser(name, help=(exp.__doc__ or "").strip().splitlines()[0] if exp.__doc__ else None)
        _add_globals(sp)
        for key, param in exp.params.items():
            flag = "--" + key.replace("_", "-")
            if param.kind == "bool":
                sp.add_argument(flag, dest=key, nargs="?", const="true", default=argparse.SUPPRESS, help=param.help)
            else:
                sp.add_argument(flag, dest=key, default=argparse.SUPPRESS, help=param.help)
    return parser


def _parse_int(name, value):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise DomainError(f"--{name}: expected an integer, got {value!r}") from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    command = ns.pop("command")
    exp = REGISTRY[command]
    try:
        file_kv = read_config(ns.pop("config")) if "config" in ns else {}
    except OSError as exc:
        print(f"airyedge: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"airyedge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        merged = {k: ns.get(k, file_kv.get(k, v)) for k, v in GLOBAL_DEFAULTS.items()}
        unknown = set(file_kv) - set(exp.params) - set(GLOBAL_DEFAULTS)
        if unknown:
            raise DomainError(f"config file: unknown key {sorted(unknown)[0]!r} for {command}")
        if merged["format"] not in ("csv", "json"):
            raise DomainError(f"--format must be csv or json, got {merged['format']!r}")
        params = {k: ns[k] if k in ns else file_kv[k] for k in exp.params if k in ns or k in file_kv}
        config = ExperimentConfig(command, params, _parse_int("seed", merged["seed"]),
                                  _parse_int("reps", merged["reps"]), _parse_int("workers", merged["workers"]))
        report = run(config)
    except DomainError as exc:
        print(f"airyedge {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"airyedge {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"airyedge {command}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        write_report(report, merged["out"], merged["format"])
    except OSError as exc:
        print(f"airyedge {command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def entry() -> None:
    """Console-script wrapper."""
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry()
