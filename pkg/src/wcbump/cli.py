"""Command-line entry point: ``wcbump <subcommand> --config PATH [--out DIR]``.

Exit codes: 0 on success, 2 when a hypothesis the run relies on fails
(including the absence of a width pair), 1 on any other error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .errors import AssumptionError, ConfigError, WCBumpError
from .experiment import STAGES, builtin_configs, load_config, run, write_outputs

log = logging.getLogger("wcbump")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wcbump", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "widths": "solve the step-rate half-widths and select the width pair",
        "check": "verify the iteration hypotheses on the width pair",
        "direct": "run Scheme I and extend its fixed point to a bump",
        "width-scheme": "run Scheme II on the excitation-width profile",
        "simulate": "build the Scheme I bump and probe its stability by time stepping",
        "all": "run the full pipeline selected by the config",
    }
    for name in STAGES:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument(
            "--config",
            required=True,
            metavar="PATH",
            help=f"INI file, or a shipped config: {', '.join(builtin_configs())}",
        )
        p.add_argument("--out", metavar="DIR", help="output directory (default: [output] dir)")
        p.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    return parser


def _print_summary(bundle) -> None:
    if bundle.pair is not None:
        print(f"Delta_tau = {bundle.pair[0]!r}, Delta_0 = {bundle.pair[1]!r}")
    if bundle.assumptions is not None:
        print(bundle.assumptions.table())
    for key, value in bundle.scalars.items():
        print(f"{key} = {value!r}")
    for msg in bundle.failures:
        print(f"note: {msg}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(message)s")
    try:
        config = load_config(args.config)
        bundle = run(config, args.command)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except AssumptionError as exc:
        log.error("aborted: %s", exc)
        return 2
    except WCBumpError as exc:
        log.error("error: %s", exc)
        return 1
    out = args.out or config.out_dir
    paths = write_outputs(bundle, out)
    if not args.quiet:
        _print_summary(bundle)
        print(f"wrote {len(paths)} files to {out}")
    return 2 if bundle.assumption_failure else 0


if __name__ == "__main__":
    sys.exit(main())
