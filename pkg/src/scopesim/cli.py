"""Command-line entry point: headless script runs and the live service."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError
from .gateway import NoCompletedAcquisition, ScriptError, run_headless


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scopesim",
        description="Deterministic virtual oscilloscope: run scripted sessions "
        "headlessly or serve the live control-panel protocol.",
    )
    parser.add_argument("--config", metavar="PATH", help="session config JSON")
    parser.add_argument("--script", metavar="PATH", help="JSON-lines action script")
    parser.add_argument(
        "--ticks", type=int, metavar="N", help="run the master clock out to absolute tick N"
    )
    parser.add_argument("--export-csv", metavar="PATH", help="write the last capture as CSV")
    parser.add_argument("--snapshot", metavar="PATH", help="write the display as a P4 PBM")
    parser.add_argument(
        "--serve", type=int, metavar="PORT", help="serve the wire protocol on PORT"
    )
    parser.add_argument(
        "--allow-unsafe-adc-n",
        action="store_true",
        help="permit adc_n below 3 in the config (demonstrates capture corruption)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.serve is not None:
            from .server import serve

            serve(
                args.serve,
                config_path=args.config,
                allow_unsafe_adc_n=args.allow_unsafe_adc_n,
            )
            return 0
        return run_headless(
            args.config,
            args.script,
            ticks=args.ticks,
            csv_path=args.export_csv,
            snapshot_path=args.snapshot,
            allow_unsafe_adc_n=args.allow_unsafe_adc_n,
        )
    except (ConfigError, ScriptError, NoCompletedAcquisition) as exc:
        print(f"scopesim: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
