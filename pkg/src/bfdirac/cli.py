"""``bfdirac analyze``: run the constraint analysis and write a report.

Exit codes: 0 when every enabled check passes, 1 when a check or stage
fails, 2 for an invalid configuration.
"""

import argparse
import sys
from dataclasses import dataclass, field

from .analysis import DEFAULT_TOLERANCES, DERIVATIVE_STAGES, STAGES, StageError, run_analysis
from .lattice import LatticeGeometry
from .models import ModelError, ModelSpec


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str = "bf"
    k: float = 1.0
    g: float = 1.0
    lattice: int = 3
    seed: int = 0
    gap: float = 1e6
    tolerances: dict = field(default_factory=dict)
    format: str = "json"
    out: str = None
    stage: str = None

    @property
    def stages(self):
        return STAGES if self.stage is None else (self.stage,)

    def validate(self):
        if self.lattice < 2:
            raise ConfigError("--lattice must be at least 2")
        needs_derivatives = [s for s in self.stages if s in DERIVATIVE_STAGES]
        if self.lattice < 3 and needs_derivatives:
            raise ConfigError(
                f"--lattice {self.lattice} is too small for derivative stages "
                f"{needs_derivatives} (central differences vanish at N = 2)"
            )
        if not self.gap > 1:
            raise ConfigError("--gap must exceed 1")
        unknown = sorted(set(self.tolerances) - set(DEFAULT_TOLERANCES))
        if unknown:
            raise ConfigError(f"unknown tolerance names {unknown}")
        try:
            return ModelSpec(self.model, LatticeGeometry(self.lattice), k=self.k, g=self.g)
        except (ModelError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _tolerance(text):
    name, _, value = text.partition("=")
    if not value:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    return name, float(value)


def build_parser():
    parser = argparse.ArgumentParser(prog="bfdirac")
    sub = parser.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="run the Dirac-Bergmann analysis")
    a.add_argument("--model", choices=["bf", "gbf"], default="bf")
    a.add_argument("--k", type=float, default=1.0)
    a.add_argument("--g", type=float, default=1.0)
    a.add_argument("--lattice", type=int, default=3)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--gap", type=float, default=1e6)
    a.add_argument("--tol", type=_tolerance, action="append", default=[],
                   metavar="NAME=VALUE", help="override a tolerance")
    a.add_argument("--format", choices=["json", "text"], default="json")
    a.add_argument("--out", default=None)
    a.add_argument("--stage", choices=list(STAGES), default=None)
    return parser


def analyze(config):
    """Run one configuration; returns (exit code, rendered report or None)."""
    model = config.validate()
    try:
        report = run_analysis(
            model, seed=config.seed, gap_threshold=config.gap,
            tolerances=config.tolerances, stages=config.stages,
        )
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1, None
    text = report.to_json() + "\n" if config.format == "json" else report.to_text()
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = sorted(name for name, ok in report.checks.items() if not ok)
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1, text
    return 0, text


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(
        model=args.model, k=args.k, g=args.g, lattice=args.lattice, seed=args.seed,
        gap=args.gap, tolerances=dict(args.tol), format=args.format, out=args.out,
        stage=args.stage,
    )
    try:
        code, _ = analyze(config)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"bfdirac analyze: error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
