"""Command line entry point: ``run``, ``report`` and ``wins``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .dataset import DATASETS
from .harness import (
    QUICK_REPEATS,
    TREATMENTS,
    ExperimentPlan,
    ResultStore,
    default_workers,
    render_report,
    run_experiment,
    store_tables,
    summarize_wins,
    wins_text,
)


def _names(values, universe, what):
    items = [v for chunk in values for v in chunk.split(",") if v]
    if items == ["all"]:
        return list(universe)
    bad = [v for v in items if v not in universe]
    if bad:
        raise SystemExit(f"unknown {what}: {', '.join(bad)} (choose from {', '.join(universe)} or 'all')")
    return items


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="effortune", description="Tuned effort estimators, cross-validated and ranked.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an M x N cross-validation experiment")
    r.add_argument("--data", default=os.environ.get("EFFORTUNE_DATA"),
                   help="directory of <dataset>.csv files (default: $EFFORTUNE_DATA, else bundled stand-ins)")
    r.add_argument("--datasets", nargs="+", default=["all"])
    r.add_argument("--treatments", nargs="+", default=["all"])
    r.add_argument("--repeats", type=int, default=20)
    r.add_argument("--bins", type=int, default=3)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", required=True)
    r.add_argument("--quick", action="store_true", help=f"use {QUICK_REPEATS} repeats")
    r.add_argument("--workers", type=int, default=default_workers())
    r.add_argument("--no-traces", action="store_true", help="skip optimizer trace CSVs")

    rep = sub.add_parser("report", help="Scott-Knott rank table for one dataset")
    rep.add_argument("--store", required=True)
    rep.add_argument("--dataset", required=True)
    rep.add_argument("--metric", choices=("mre", "sa"), default="mre")
    rep.add_argument("--csv", help="also write the machine-readable table here")

    w = sub.add_parser("wins", help="rank-1 counts across every dataset and metric")
    w.add_argument("--store", required=True, nargs="+")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        plan = ExperimentPlan(
            datasets=_names(args.datasets, DATASETS, "dataset"),
            treatments=_names(args.treatments, TREATMENTS, "treatment"),
            repeats=QUICK_REPEATS if args.quick else args.repeats,
            bins=args.bins,
            seed=args.seed,
            out=args.out,
            data_dir=args.data,
            workers=args.workers,
            write_traces=not args.no_traces,
        )

        def progress(i, n, res):
            if res.failure:
                print(f"[{i}/{n}] FAILED {res.failure[0]} {res.failure[1]} r{res.failure[2]} f{res.failure[3]}: "
                      f"{res.failure[4]}", file=sys.stderr)
            elif i % 50 == 0 or i == n:
                print(f"[{i}/{n}] cells done", file=sys.stderr)

        store = run_experiment(plan, progress)
        fails = store.failures()
        print(f"wrote {store.path} ({len(store.records())} scores, {len(fails)} failures)")
        return 0
    if args.command == "report":
        text, table_csv = render_report(ResultStore(args.store), args.dataset, args.metric)
        print(text)
        if args.csv:
            Path(args.csv).write_text(table_csv)
        return 0
    wins = summarize_wins(store_tables(ResultStore(s) for s in args.store))
    print(wins_text(wins))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
