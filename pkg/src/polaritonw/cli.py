"""Command-line entry point.

Verbs: ``run`` (one parameter point), ``sweep-fig2`` (drive strength times
uniform background, closed-form path), ``sweep-fig3`` (pulsed pump
intensity times reservoir temperature, numeric path).  Exit codes: 0 on
success, 2 on configuration errors, 3 on numeric failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .integrate import IntegrationError
from .runner import (ConfigError, NumericError, emit, load_config, run_single,
                     sweep_fig2, sweep_fig3)
from .tomography import ReconstructionError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polaritonw",
        description="Five-mode parametric polariton emission and W-state weight")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, doc in (("run", "evaluate a single parameter point"),
                      ("sweep-fig2", "drive-strength x background grid (analytic)"),
                      ("sweep-fig3", "pump-intensity x temperature grid (pulsed numeric)")):
        p = sub.add_parser(verb, help=doc)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--output", default=None, help="output file (overrides config)")
        p.add_argument("--format", default=None, choices=("csv", "json"),
                       help="output format (overrides config)")
        p.add_argument("--mode", default=None, choices=("analytic", "numeric"),
                       help="computation mode (overrides config)")
        p.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.mode:
            cfg = dataclasses.replace(cfg, mode=args.mode)
        if args.output:
            cfg = dataclasses.replace(cfg, output_path=args.output)
        if args.format:
            cfg = dataclasses.replace(cfg, output_format=args.format)

        if args.verb == "run":
            record = run_single(cfg)
            record.pop("wall_ms", None)
            text = json.dumps(record, indent=1)
            if cfg.output_path:
                with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text + "\n")
                if not args.quiet:
                    print(f"wrote {cfg.output_path}")
            else:
                print(text)
            return EXIT_OK

        sweep = sweep_fig2 if args.verb == "sweep-fig2" else sweep_fig3
        result = sweep(cfg)
        if not cfg.output_path:
            raise ConfigError("sweeps need an output path (config output.path or --output)")
        emit(result, cfg.output_path, cfg.output_format)
        if not args.quiet:
            print(f"wrote {len(result.rows)} rows to {cfg.output_path}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, IntegrationError, ReconstructionError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
