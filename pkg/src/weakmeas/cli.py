"""Command line interface: ``weakmeas {run,figure2,weak-value,validity}``."""

from __future__ import annotations

import argparse
import sys

from . import io, spin, validity
from .errors import ValidationError


def _cmd_run(args) -> int:
    return io.run_file(args.scenario, args.out)


def _cmd_figure2(args) -> int:
    try:
        run = io.figure2(args.n, args.lam, args.seed, args.out, args.delta)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return io.EXIT_VALIDATION
    print(f"l2_error = {io.format_value(run.l2_error)}")
    print(f"fidelity = {io.format_value(run.fidelity)}")
    return io.EXIT_OK


def _cmd_weak_value(args) -> int:
    try:
        pre_axis, pre_sign = io.parse_axis(args.pre)
        post_axis, post_sign = io.parse_axis(args.post)
        obs_axis, obs_sign = io.parse_axis(args.observable)
        sel = spin.PrePostSelection(spin.eigenstate(pre_axis, pre_sign), spin.eigenstate(post_axis, post_sign))
        w = spin.weak_value(sel, obs_sign * spin.spin_along(obs_axis))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return io.EXIT_VALIDATION
    print(io.format_summary({"weak_value_re": w.real, "weak_value_im": w.imag, "eccentric": abs(w) > 1}), end="")
    return io.EXIT_OK


def _cmd_validity(args) -> int:
    if args.n < 1 or args.lam < 0 or args.delta <= 0:
        print("error: need n >= 1, lambda >= 0, delta > 0", file=sys.stderr)
        return io.EXIT_VALIDATION
    rep = validity.regime_check(args.alpha, args.lam, args.n, validity.GaussianSpec(0.0, args.delta))
    print(io.format_summary(rep.summary()), end="")
    return io.EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakmeas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="override output_dir")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("figure2", help="exact vs weak-value NSWM pointer profiles")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--out", default="figure2")
    p.set_defaults(func=_cmd_figure2)

    p = sub.add_parser("weak-value", help="print the weak value of a spin component")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--observable", required=True)
    p.set_defaults(func=_cmd_weak_value)

    p = sub.add_parser("validity", help="regime diagnostics for a uniform weak value")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=1.0)
    p.set_defaults(func=_cmd_validity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
