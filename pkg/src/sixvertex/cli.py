"""``sixvertex`` command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for
configuration errors.
"""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .errors import ConfigError, SixVertexError
from .suites import FAMILIES, SUITES, SuiteConfig, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 already; keep the message on stderr
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_complex(text: str) -> complex:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}") from exc
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def parse_seeds(values: Sequence[str] | None) -> list[int]:
    if not values:
        return [0]
    seeds: list[int] = []
    for chunk in values:
        for item in chunk.split(","):
            item = item.strip()
            if "-" in item[1:]:
                lo, hi = item.split("-", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            elif item:
                seeds.append(int(item))
    return seeds


def parse_tolerances(values: Sequence[str] | None) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in values or ():
        if "=" not in item:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        name, val = item.split("=", 1)
        try:
            out[name.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value in {item!r}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sixvertex", description="Seeded numerical verification of six-vertex model identities.")
    p.add_argument("suite", choices=SUITES + ("all", "benchmark"))
    p.add_argument("--weights", default="field-trig", choices=FAMILIES)
    p.add_argument("--rho", type=parse_complex, default=complex(0.6, 0.3), help="anisotropy as RE,IM")
    p.add_argument("--L", type=int, default=3, help="number of sites")
    p.add_argument("--M", type=int, default=1, help="number of rapidities")
    p.add_argument("--seed", action="append", help="seed, list (1,2,3) or range (0-9); repeatable")
    p.add_argument("--tol", action="append", help="tolerance override name=value; repeatable")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    return p


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    try:
        seeds = parse_seeds(args.seed)
    except ValueError as exc:
        raise ConfigError(f"bad seed specification: {exc}") from exc
    return SuiteConfig(suite=args.suite, weight_family=args.weights, rho=args.rho, L=args.L, M=args.M,
                       seeds=seeds, tol=parse_tolerances(args.tol), output=args.out).validate()


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run_suite(cfg)
    except ConfigError as exc:
        print(f"sixvertex: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SixVertexError as exc:
        print(f"sixvertex: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = report.dumps()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for rec in report.failures():
        print(f"FAIL {rec.identifier}: residual {rec.residual:.3e} >= {rec.tolerance:.1e}", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
