"""Command-line entry point.

Subcommands: sweep-delay, find-poles, trace-poles, gamow.  Exit codes:
0 success, 2 configuration error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config as cfgmod
from .errors import BilliardError, ConfigError, SolverError
from .orchestrate import cmd_find_poles, cmd_gamow, cmd_sweep_delay, cmd_trace


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="openbilliard",
        description="Open rectangular billiard: scattering delay, resonance "
        "poles via exterior complex scaling, Gamow wavefunctions.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("sweep-delay", "reflection coefficient and Wigner-Smith delay sweep"),
        ("find-poles", "classified complex eigenvalue scan"),
        ("trace-poles", "pole trajectories over the coupling strength"),
        ("gamow", "resonance wavefunction fields and mixing tables"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", choices=["paper"], help="named preset config")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="SECTION.FIELD=VALUE",
            help="override one config field, e.g. numerics.h=0.04",
        )
    return ap


def _load_config(args):
    if args.config:
        cfg_dict = json.loads(open(args.config).read())
    elif args.preset == "paper":
        cfg_dict = {}
    else:
        raise ConfigError("provide --config PATH or --preset paper")
    for item in args.set:
        try:
            key, value = item.split("=", 1)
            section, fld = key.split(".", 1)
        except ValueError as exc:
            raise ConfigError(f"bad --set {item!r}") from exc
        try:
            value = json.loads(value)
        except json.JSONDecodeError:
            pass
        cfg_dict.setdefault(section, {})[fld] = value
    return cfgmod.from_dict(cfg_dict)


_COMMANDS = {
    "sweep-delay": cmd_sweep_delay,
    "find-poles": cmd_find_poles,
    "trace-poles": cmd_trace,
    "gamow": cmd_gamow,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = _COMMANDS[args.command](config, out_dir=args.out, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, BilliardError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    if args.command == "trace-poles":
        result = result[0]
    if isinstance(result, str):
        result = [result]
    for path in result or []:
        print(path)
    if args.command == "sweep-delay" and not result:
        print("warning: empty lambda list, nothing to do", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
