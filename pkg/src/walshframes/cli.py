"""Command line front end.

Exit codes: 0 all checks passed, 1 a check computed a failing verdict,
2 configuration error, 3 input data error. Reports go to --out when given,
otherwise to stdout, and are byte-identical across runs with equal inputs.
"""

from __future__ import annotations

import argparse
import io
import sys

from . import __version__
from .errors import ConfigError, InputDataError, WalshFramesError
from .harmonic import fast_inverse_transform, fast_transform
from .runner import (
    RunConfig,
    dump_wavelets_report,
    field_info_report,
    periodic_report,
    render_report,
    uindex_report,
    verify_report,
)
from .stepfn import dump_csv, load_csv

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walshframes",
        description="Exact wavelet frame checks for Laurent series fields.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, config=True, out=True, seed=False, mode=False):
        cmd = sub.add_parser(name, help=help_text)
        if config:
            cmd.add_argument("--config", required=True,
                             help="run configuration file (INI)")
        if out:
            cmd.add_argument("--out", help="write the report here")
        if seed:
            cmd.add_argument("--seed", type=int,
                             help="override the suite seed (64-bit)")
        if mode:
            cmd.add_argument("--mode", choices=("unitary", "qn"),
                             help="override the mask normalization mode")
        return cmd

    add("field-info", "describe the field and the coset enumeration")

    cmd = add("uindex", "tabulate the coset enumeration u(n)")
    cmd.add_argument("count", type=int, nargs="?", default=32,
                     help="tabulate n < count (default 32)")

    cmd = add("transform", "transform a dumped step function", config=False)
    cmd.add_argument("input", help="step function CSV")
    cmd.add_argument("--direction", choices=("forward", "inverse"),
                     default="forward")

    add("verify", "run the full frame verification suite",
        seed=True, mode=True)
    add("periodic", "run the folded-system verification suite",
        seed=True, mode=True)
    cmd = add("dump-wavelets", "derive generators and dump them as CSV",
              out=False, mode=True)
    cmd.add_argument("--out", required=True,
                     help="directory for the generator CSV files")
    return parser


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    with open(out_path, "w") as fh:
        fh.write(text)


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "field-info":
        rc = RunConfig.load(args.config, need_masks=False)
        _emit(render_report(field_info_report(rc)), args.out)
        return 0

    if args.command == "uindex":
        rc = RunConfig.load(args.config, need_masks=False)
        _emit(render_report(uindex_report(rc, args.count)), args.out)
        return 0

    if args.command == "transform":
        try:
            f = load_csv(args.input)
        except OSError as exc:
            raise InputDataError(f"cannot read {args.input!r}: {exc}") from exc
        g = fast_transform(f) if args.direction == "forward" \
            else fast_inverse_transform(f)
        buf = io.StringIO()
        dump_csv(g, buf)
        _emit(buf.getvalue(), args.out)
        return 0

    if args.command == "verify":
        rc = RunConfig.load(args.config, seed=args.seed, mode=args.mode)
        report = verify_report(rc)
        _emit(render_report(report), args.out)
        return 0 if report["verdicts"]["overall"] else 1

    if args.command == "periodic":
        rc = RunConfig.load(args.config, seed=args.seed, mode=args.mode)
        report = periodic_report(rc)
        _emit(render_report(report), args.out)
        return 0 if report["verdicts"]["overall"] else 1

    if args.command == "dump-wavelets":
        rc = RunConfig.load(args.config, mode=args.mode)
        sys.stdout.write(render_report(dump_wavelets_report(rc, args.out)))
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except InputDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WalshFramesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
