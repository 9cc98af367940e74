"""Command-line front end.

Exit codes: 0 success, 1 runtime (solver) failure, 2 usage or config error.
"""

import argparse
import io
import os
import sys

from . import experiments
from .errors import ConfigError, FlowError, InvalidArgumentError, InvalidSizeError, PGMFormatError
from .spectral import BoundaryCondition, build_spectrum, mode_numbers


def _common(p):
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="noise seed")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration value (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(prog="nlpm", description="Nonlocal Perona-Malik flows.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="print eigenvalues of -A as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bc", choices=[b.value for b in BoundaryCondition], default="periodic")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    _common(p)

    p = sub.add_parser("flow", help="run a key=value configuration file")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("preset", help="reproduce one figure experiment")
    p.add_argument("id", choices=sorted(experiments.PRESETS))
    p.add_argument("--symmetric-ic", action="store_true",
                   help="fig-eps: use 100 x^2 (1-x)^2 instead of 100 x^2 (1-x^2)")
    _common(p)

    p = sub.add_parser("denoise", help="denoise a PGM image with the 2D flow")
    p.add_argument("input")
    p.add_argument("output")
    _common(p)
    return parser


def _spectrum_csv(args):
    s = build_spectrum(args.n, args.bc, args.dim)
    buf = io.StringIO()
    k = mode_numbers(s.n, s.bc)
    if s.dim == 1:
        buf.write("index,mode,eigenvalue\n")
        for i, (m, lam) in enumerate(zip(k, s.eigenvalues)):
            buf.write(f"{i},{m},{lam:.17g}\n")
    else:
        buf.write("i,j,mode_i,mode_j,eigenvalue\n")
        for i in range(s.n):
            for j in range(s.n):
                buf.write(f"{i},{j},{k[i]},{k[j]},{s.eigenvalues[i, j]:.17g}\n")
    return buf.getvalue()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = experiments.parse_overrides(args.override)
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.command == "spectrum":
            text = _spectrum_csv(args)
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                with open(os.path.join(args.out, f"spectrum_{args.bc}_n{args.n}_d{args.dim}.csv"), "w",
                          newline="\n") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        elif args.command == "flow":
            out = experiments.run_custom(args.config, args.out, overrides)
            for path in out.files:
                print(path)
        elif args.command == "preset":
            if args.symmetric_ic:
                overrides["symmetric_ic"] = True
            out = experiments.run_preset(args.id, args.out or ".", overrides)
            for path in out.files:
                print(path)
            if out.summary:
                print(out.summary)
        elif args.command == "denoise":
            experiments.denoise_file(args.input, args.output, overrides)
            print(args.output)
    except FlowError as exc:
        print(f"nlpm: solver failure at step {exc.step}: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, InvalidSizeError, InvalidArgumentError, PGMFormatError) as exc:
        print(f"nlpm: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"nlpm: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
