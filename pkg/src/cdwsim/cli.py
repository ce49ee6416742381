"""Command-line entry point: ``cdwsim run|validate|list-scenarios``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SCENARIOS, ConfigError, validate_config
from .core import CDWError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _read(path: str) -> str:
    return Path(path).read_text()


def _load(path: str, args=None):
    cfg = validate_config(_read(path))
    if args is None:
        return cfg
    changes = {}
    if args.out is not None:
        changes["output_dir"] = Path(args.out)
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.svg:
        changes["emit_svg"] = True
    return cfg.model_copy(update=changes) if changes else cfg


def cmd_run(args) -> int:
    from .scenarios import run_scenario

    cfg = _load(args.config, args)
    outcome, written = run_scenario(cfg)
    for path in written:
        print(f"wrote {path}")
    if outcome.error is not None:
        print(f"error in scenario {cfg.scenario}: {outcome.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    print(f"valid: scenario {cfg.scenario}")
    print(cfg.params.model_dump_json(indent=2))
    return EXIT_OK


def cmd_list(args) -> int:
    for name in SCENARIOS:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdwsim", description="Charge-density-wave soliton transport scenarios")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    run.add_argument("--seed", type=int, default=None, help="seed for random sweeps (overrides seed)")
    run.add_argument("--svg", action="store_true", help="also write plot_*.svg")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="validate a config and print it with defaults filled")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list-scenarios", help="list scenario names")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        print("error: --seed must be >= 0", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_VALIDATION
    except CDWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
