"""Command line entry point: ``vdistill <experiment> [config.json] [flags]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .exceptions import DegeneratePurityError, InputError, VDError
from .experiments import EXPERIMENTS, OUTPUT_ENV, ExperimentConfig, run

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE = 0, 2, 3


def _lambda_grid(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda grid {text!r}") from None


def _shots(text: str) -> int | str:
    if text == "exact":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("shots must be an integer or 'exact'") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vdistill", description=__doc__,
                                epilog=f"Default output directory comes from ${OUTPUT_ENV}.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("config", nargs="?", help="ExperimentConfig JSON file")
        s.add_argument("--fixture", help="fixture path or bundled name such as h2_2q_2.00")
        s.add_argument("--seed", type=int)
        s.add_argument("--shots", type=_shots)
        s.add_argument("--lambda-grid", type=_lambda_grid, dest="lambda_grid")
        s.add_argument("--noise", type=float, help="depolarization used by vqe/dissociation runs")
        s.add_argument("--method", choices=("raw", "vd", "bgate-hybrid"))
        s.add_argument("--output", "-o")
        s.add_argument("--svg")
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise InputError("config must be a JSON object")
        if doc.get("experiment", args.experiment) != args.experiment:
            raise InputError(f"config is for {doc['experiment']!r}, not {args.experiment!r}")
    doc["experiment"] = args.experiment
    for key in ("fixture", "seed", "shots", "lambda_grid", "noise", "method", "output", "svg"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    return ExperimentConfig.from_dict(doc)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        result = run(cfg)
    except DegeneratePurityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, VDError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(result.path)
    return EXIT_DEGENERATE if result.degenerate else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
