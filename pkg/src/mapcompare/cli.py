"""Command line entry point: mapcompare <stage> --config <file> [--seed N] [--out DIR]."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, RunConfig
from .pipeline import STAGES, Pipeline, PipelineError

COMMANDS = STAGES + ["all", "serve"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapcompare",
        description="Build and compare an LDA topic map and a direct-citation "
        "cluster map of a publication corpus.",
    )
    parser.add_argument("stage", choices=COMMANDS, help="pipeline stage to run")
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", help="override the configured output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_file(args.config)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.output_dir = args.out

    if args.stage == "serve":
        from .server import serve

        try:
            serve(config)
        except FileNotFoundError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        return 0

    pipe = Pipeline(config)
    try:
        if args.stage == "all":
            pipe.run_all()
        else:
            pipe.run(args.stage)
    except (PipelineError, ConfigError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
