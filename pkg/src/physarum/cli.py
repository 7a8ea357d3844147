"""Command-line interface.

Subcommands::

    physarum run --config experiment.cfg [--seed N] [--out DIR]
    physarum preset li|la [--seed N] [--out DIR]
    physarum validate --config experiment.cfg

Exit codes: 0 success, 2 configuration/validation error, 1 runtime or I/O
error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .configfile import parse_config
from .errors import ConfigError
from .experiment import preset_la, preset_li, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="physarum",
        description="Particle-based slime mould simulation with timed "
                    "attractant and light stimuli.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="config file path")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config's seed")
    p_run.add_argument("--out", default="out", help="output directory "
                       "(default ./out)")
    p_run.set_defaults(func=_cmd_run)

    p_preset = sub.add_parser("preset", help="run a built-in preset")
    p_preset.add_argument("name", choices=("li", "la"),
                          help="li: attractant stimulus; la: light stimulus")
    p_preset.add_argument("--seed", type=int, default=None,
                          help="override the preset seed")
    p_preset.add_argument("--out", default="out", help="output directory "
                          "(default ./out)")
    p_preset.set_defaults(func=_cmd_preset)

    p_validate = sub.add_parser("validate",
                                help="check a config file without running")
    p_validate.add_argument("--config", required=True, help="config file path")
    p_validate.set_defaults(func=_cmd_validate)
    return parser


def _execute(config, out) -> int:
    record = run(config)
    from .outputs import write_bundle
    paths = write_bundle(record, Path(out))
    summary = record.summary
    if summary.contrast_peak is None:
        print("contrast peak: n/a")
    else:
        print(f"contrast peak: {summary.contrast_peak:.6g} "
              f"at step {summary.contrast_peak_step}")
    if summary.recovery_step is None:
        print("recovery step: not reached")
    else:
        print(f"recovery step: {summary.recovery_step}")
    if summary.onset_columns:
        print("onset columns: "
              + ", ".join(str(c) for c in summary.onset_columns))
    else:
        print("onset columns: none")
    if summary.baseline_cv is not None:
        print(f"baseline cv: {summary.baseline_cv:.6g}")
    print(f"wrote {len(paths)} files under {Path(out)}")
    return 0


def _with_seed(config, seed):
    return config if seed is None else replace(config, seed=seed)


def _cmd_run(args) -> int:
    config = _with_seed(parse_config(args.config), args.seed)
    return _execute(config, args.out)


def _cmd_preset(args) -> int:
    config = preset_li() if args.name == "li" else preset_la()
    return _execute(_with_seed(config, args.seed), args.out)


def _cmd_validate(args) -> int:
    parse_config(args.config)
    print("configuration OK")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        if exc.violations:
            print("error: invalid configuration", file=sys.stderr)
            for violation in exc.violations:
                print(f"  - {violation}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
