"""Command line entry point.

    motifclass <stage> --config cfg.json [--seed N] [--ablation MODE]
    motifclass sweep --config cfg.json
    motifclass synth --workdir DIR [--seed N]

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, CorpusError, MotifClassError
from .pipeline import ABLATION_MODES, STAGES, PipelineConfig, run_ablation_sweep, run_stage
from .synth import SynthConfig, write_demo_dataset


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motifclass",
        description="Weakly supervised metadata-aware text classification")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for stage in STAGES + ("all", "sweep"):
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--seed", type=int, help="override the global seed")
        p.add_argument("--workers", type=int, default=1,
                       help="worker count (stages are currently single-worker)")
        p.add_argument("--ablation", choices=ABLATION_MODES,
                       help="override the ablation mode")
        p.add_argument("--workdir", help="override the workdir")

    p = sub.add_parser("synth", help="write the bundled synthetic demo dataset")
    p.add_argument("--workdir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--docs-per-category", type=int, default=400)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "synth":
            paths = write_demo_dataset(args.workdir, SynthConfig(
                seed=args.seed, docs_per_category=args.docs_per_category))
            print("\n".join(str(p) for p in paths))
            return 0

        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.ablation is not None:
            overrides["ablation"] = args.ablation
        if args.workdir is not None:
            overrides["workdir"] = args.workdir
        config = PipelineConfig.from_file(args.config, overrides)

        if args.command == "sweep":
            results = run_ablation_sweep(config)
            print(json.dumps(results, sort_keys=True, indent=2))
            return 0

        report = run_stage(args.command, config)
        if report is not None:
            print(f"micro_f1={report['micro_f1']:.4f} "
                  f"macro_f1={report['macro_f1']:.4f}")
        return 0
    except (ConfigError, CorpusError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (MotifClassError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
