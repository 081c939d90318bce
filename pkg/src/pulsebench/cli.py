"""Command-line front end: benchmark runs, report comparison, synthetic data.

Exit codes: 0 success, 2 config or usage errors (nothing computed),
1 pipeline failures (message carries the failing stage).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import compare, config_from_dict, run
from .data_io import save_segments
from .errors import InvalidSpecError, PulsebenchError, StageError
from .synth import synth_af_records, synth_bp_records

__all__ = ["main"]

DATA_ROOT_ENV = "PULSEBENCH_DATA"


def _data_root() -> str:
    return os.environ.get(DATA_ROOT_ENV, "") or "."


def _cmd_run(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error [config] cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error [config] {args.config} is not valid JSON: {exc}", file=sys.stderr)
        return 2
    # flags override file values
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out"] = args.out
    try:
        config = config_from_dict(raw, base_dir=_data_root())
    except PulsebenchError as exc:
        print(f"error [config] {exc}", file=sys.stderr)
        return 2

    try:
        result = run(config)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except PulsebenchError as exc:
        print(f"error [run] {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(result.table)
    print(f"report: {result.paths['report']}")
    return 0


def _cmd_compare(args) -> int:
    try:
        table, summary = compare(args.reports)
    except InvalidSpecError as exc:
        print(f"error [compare] {exc}", file=sys.stderr)
        return 2
    except PulsebenchError as exc:
        print(f"error [compare] {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.txt").write_text(table, encoding="utf-8")
    (out / "compare.json").write_text(
        json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    sys.stdout.write(table)
    print(f"best: {summary['best']}")
    return 0


def _cmd_synth(args) -> int:
    if args.n < 1:
        print("error [config] --n must be >= 1", file=sys.stderr)
        return 2
    out = Path(args.out if args.out is not None else _data_root())
    try:
        if args.task == "bp":
            records = synth_bp_records(args.n, seed=args.seed)
        else:
            records = synth_af_records(args.n, seed=args.seed)
        name = f"synth_{args.task}"
        out.mkdir(parents=True, exist_ok=True)
        store = out / f"{name}.f32"
        manifest = out / f"{name}.manifest.json"
        save_segments(records, name, store, manifest)
    except PulsebenchError as exc:
        print(f"error [synth] {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(records)} segments: {store}")
    print(f"manifest: {manifest}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsebench",
        description="Benchmark runner for PPG blood-pressure and rhythm models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one benchmark run from a JSON config")
    p_run.add_argument("--config", required=True, help="path to a run config (JSON)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="override the artifact directory")
    p_run.set_defaults(fn=_cmd_run)

    p_cmp = sub.add_parser("compare", help="merge >= 2 run reports into a ranked table")
    p_cmp.add_argument("reports", nargs="+", help="report JSON files from 'pulsebench run'")
    p_cmp.add_argument("--out", default=".", help="directory for compare.txt / compare.json")
    p_cmp.set_defaults(fn=_cmd_compare)

    p_syn = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p_syn.add_argument("--task", choices=("bp", "af"), required=True)
    p_syn.add_argument("--n", type=int, default=2000, help="number of segments")
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--out", default=None,
                       help=f"output directory (default: ${DATA_ROOT_ENV} or '.')")
    p_syn.set_defaults(fn=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
