"""Command-line entry point: ``bmhull <command> [options]``.

Exit status: 0 success, 1 some estimate falls outside its bounds,
2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .harness import ConfigError, ExperimentConfig, render, resolve_output, run


def _radii(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmhull",
        description="Monte Carlo lab for convex hulls of Brownian motion and their passage times.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, path=True):
        p.add_argument("--seed", type=_seed, default=0, help="64-bit seed (default 0)")
        p.add_argument("--output", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1)
        if path:
            p.add_argument("--steps", type=int, default=10_000, help="grid steps on [0, 1]")
            p.add_argument("--replicates", type=int, default=10_000)
            p.add_argument("--heavy", action="store_true", help="use at least 1e5 steps")
            p.add_argument("--dump-paths", metavar="DIR",
                           help="write every sampled path as text (one grid point per line)")

    p = sub.add_parser("estimate", help="means of V, S, D, R at time 1")
    p.add_argument("--dim", type=int, required=True)
    common(p)

    p = sub.add_parser("inverse", help="means of the level-1 passage times")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--method", choices=("direct", "transform", "both"), default="both")
    p.add_argument("--passage-replicates", type=int,
                   help="replicates for direct passage (default: --replicates)")
    common(p)

    p = sub.add_parser("bounds", help="table of reference values and bounds")
    p.add_argument("--nmax", type=int, default=5)
    common(p, path=False)

    p = sub.add_parser("optimize", help="closed-form vs numerical solution of the radius program")
    p.add_argument("--nmax", type=int, default=20)
    common(p, path=False)

    p = sub.add_parser("stage", help="per-replicate records of the stage construction")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--radii", type=_radii, help="r1,..,rN (default: optimal radii)")
    common(p, path=False)

    p = sub.add_parser("report", help="estimates and passage times with bound verdicts")
    p.add_argument("--dim", type=int, help="single dimension (default 1..nmax)")
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--method", choices=("direct", "transform", "both"), default="both")
    p.add_argument("--passage-replicates", type=int)
    common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    fields = {k: v for k, v in vars(args).items() if v is not None}
    return ExperimentConfig(**fields)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args).validate()
        result = run(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(result, config.format)
    target = resolve_output(config.output)
    if target is None:
        sys.stdout.write(text)
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
