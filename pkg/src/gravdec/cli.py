"""Command-line runner.

    gravdec run CONFIG [--seed N] [--out-dir DIR] [--threads K]
    gravdec validate CONFIG

Exit codes: 0 success, 2 schema error, 3 guard violation, 4 failed check.
The output directory defaults to [output] directory, then $GRAVDEC_OUT_DIR,
then ./gravdec-out.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import config as cfgmod
from . import io
from .errors import GuardError, InvariantError, SchemaError
from .experiment import run_mode, validate

ENV_OUT_DIR = "GRAVDEC_OUT_DIR"
EXIT_OK, EXIT_SCHEMA, EXIT_GUARD, EXIT_CHECK = 0, 2, 3, 4


def _parser():
    p = argparse.ArgumentParser(prog="gravdec", description="Gravitational decoherence experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="override [run] seed")
    r.add_argument("--out-dir", default=None, help="artifact directory")
    r.add_argument("--threads", type=int, default=1, help="worker threads for trajectory mode")
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    return p


def out_dir_for(cfg, cli_value=None) -> Path:
    return Path(cli_value or cfg.output.directory or os.environ.get(ENV_OUT_DIR) or "gravdec-out")


def cmd_run(args) -> int:
    try:
        cfg = cfgmod.parse(args.config)
        if args.seed is not None:
            cfg = cfgmod.replace(cfg, "run", seed=args.seed)
        if args.threads < 1:
            raise SchemaError("--threads must be >= 1")
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    out = out_dir_for(cfg, args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_manifest(out / "manifest.txt", cfgmod.serialize(cfg), {"output_directory": str(out)})
    try:
        outcome = run_mode(cfg, threads=args.threads)
    except (GuardError, ValueError) as exc:
        code = EXIT_GUARD if isinstance(exc, GuardError) else EXIT_SCHEMA
        io.write_summary(out / "summary.txt", cfg.run.mode, [], [f"aborted: {exc}"])
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except InvariantError as exc:
        io.write_summary(out / "summary.txt", cfg.run.mode, [("invariant", str(exc), None, False)])
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    for stem, (header, rows) in outcome.tables.items():
        io.write_csv(out / f"{stem}.csv", header, rows)
    io.write_summary(out / "summary.txt", cfg.run.mode, outcome.checks, outcome.notes)
    print((out / "summary.txt").read_text(), end="")
    return EXIT_OK if outcome.passed else EXIT_CHECK


def cmd_validate(args) -> int:
    try:
        cfg = cfgmod.parse(args.config)
    except SchemaError as exc:
        print(f"error: schema: {exc}")
        return EXIT_SCHEMA
    report = validate(cfg)
    for level, msg in report:
        print(f"{level}: {msg}")
    return EXIT_GUARD if any(level == "error" for level, _ in report) else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return cmd_run(args) if args.command == "run" else cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
