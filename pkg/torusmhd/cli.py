"""
Command-line front-end: argparse subcommands mapped onto Lab commands.
"""

import argparse
import math
import sys
from typing import Any, Dict, List, NoReturn, Optional

from .examples import KILLING, NAMES
from .lab import EXIT_INPUT, Lab


class ArgumentError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """An ArgumentParser that raises instead of exiting on bad input."""

    def error(self, message: str) -> NoReturn:
        raise ArgumentError(message)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--configfile", help="JSON config file")
    parser.add_argument("--loglevel", help="DEBUG, INFO, WARNING, ...")
    parser.add_argument("--grid", type=int, help="nodes per axis")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--tol-residual", type=float)
    parser.add_argument("--tol-adapted", type=float)


def make_parser() -> Parser:
    """Build the parser with one subparser per command"""
    parser = Parser(
        prog="torusmhd",
        description="MHD equilibria with pressure foliations on the 3-torus",
    )
    sub = parser.add_subparsers(dest="command", parser_class=Parser)

    build = sub.add_parser("build", help="write an example bundle archive")
    build.add_argument("name", choices=NAMES)
    _common(build)

    verify = sub.add_parser("verify", help="residual suite on an archive")
    verify.add_argument("archive")
    _common(verify)

    perturb = sub.add_parser("perturb", help="adapted perturbation g^rho")
    perturb.add_argument("archive")
    perturb.add_argument(
        "--center",
        type=float,
        nargs=3,
        default=[math.pi, 0.0, 0.0],
        metavar=("ZETA", "THETA", "PHI"),
    )
    perturb.add_argument("--radius", type=float, default=0.5)
    perturb.add_argument("--amplitude", type=float, default=0.3)
    perturb.add_argument(
        "--chart-c",
        type=float,
        help="slice-quadratic rho = 1 + c u^2 instead of a bump",
    )
    perturb.add_argument("--slice", type=float, default=0.0)
    perturb.add_argument(
        "--support-radius",
        type=float,
        help="confine the slice-quadratic profile to this in-slice radius",
    )
    _common(perturb)

    certify = sub.add_parser("certify", help="symmetry-breaking certificate")
    source = certify.add_mutually_exclusive_group()
    source.add_argument("--archive")
    source.add_argument("--example", choices=NAMES)
    certify.add_argument("--slice", type=float, required=True)
    certify.add_argument("--radius", type=float)
    certify.add_argument("--gap", type=float)
    _common(certify)

    reproduce = sub.add_parser("reproduce", help="all checks of an example")
    reproduce.add_argument("name")
    _common(reproduce)
    return parser


def overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Config keys set on the command line"""
    return {
        "loglevel": args.loglevel,
        "grid": args.grid,
        "tolerances": {
            "residual": args.tol_residual,
            "adapted": args.tol_adapted,
        },
        "certify": {
            "radius": getattr(args, "radius", None)
            if args.command == "certify"
            else None,
            "gap": getattr(args, "gap", None),
        },
    }


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except ArgumentError as exc:
        sys.stderr.write(f"{parser.prog}: {exc}\n")
        return EXIT_INPUT
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT

    try:
        lab = Lab(args.configfile, overrides(args))
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"{parser.prog}: bad config: {exc}\n")
        return EXIT_INPUT

    if args.command == "build":
        return lab.run(lab.build, args.name, args.out or args.name)
    if args.command == "verify":
        return lab.run(lab.verify, args.archive, args.out)
    if args.command == "perturb":
        return lab.run(
            lab.perturb,
            args.archive,
            args.out or args.archive + "-rho",
            args.center,
            args.radius,
            args.amplitude,
            args.chart_c,
            args.slice,
            args.support_radius,
        )
    if args.command == "certify":
        return lab.run(
            lab.certify,
            args.slice,
            args.archive,
            args.example or KILLING,
            args.out,
        )
    return lab.run(lab.reproduce, args.name, args.out)
