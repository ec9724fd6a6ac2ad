"""Command line entry point: ``frogmodel <command> --config FILE``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
from pathlib import Path

from .config import ExperimentConfig
from .engine import CappedRunError
from .graph import GraphError
from .harness import EXIT_CAP, EXIT_USAGE, RECIPES, ExperimentResult, cmd_verify, run_experiment
from .init_config import ConfigError
from .paths import PathError
from .suites import SUITES


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frogmodel", description="Frog model experiments and checks.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run",) + tuple(RECIPES):
        p = sub.add_parser(name, help="run the experiment in a config file" if name == "run"
                           else f"run a {name} experiment")
        p.add_argument("--config", required=True, help="experiment config (INI)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="JSON-lines output (default: config path, else stdout)")
        p.add_argument("--workers", type=int, default=1, help="worker processes for replicas")
        p.add_argument("--emit-csv", action="store_true", help="also write plot-data CSV files")
    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", help="|".join(SUITES))
    v.add_argument("--out", help="JSON report path (default stdout)")
    return ap


def write_result(res: ExperimentResult, out: str | None, cfg: ExperimentConfig | None,
                 emit_csv: bool) -> None:
    text = "".join(line + "\n" for line in res.lines())
    if out:
        Path(out).write_text(text)
        base = Path(out)
    else:
        sys.stdout.write(text)
        base = Path(cfg.name if cfg else "report")
    meta = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "exit_code": res.exit_code,
        **({"config": cfg.to_dict(), "digest": cfg.digest()} if cfg else {}),
        **res.meta,
    }
    if out:
        Path(str(base) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    if emit_csv:
        for name, (header, rows) in res.curves.items():
            with open(f"{base.with_suffix('')}.{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        if args.command == "verify":
            res = cmd_verify(args.suite)
            write_result(res, args.out, None, False)
            return res.exit_code
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.command != "run" and args.command != cfg.kind:
            raise ConfigError(f"config is a {cfg.kind} experiment, not {args.command}")
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        res = run_experiment(cfg, workers=args.workers)
        write_result(res, args.out or cfg.out or None, cfg, args.emit_csv)
        return res.exit_code
    except (ConfigError, GraphError, PathError, FileNotFoundError) as exc:
        print(f"frogmodel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CappedRunError as exc:
        print(f"frogmodel: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
