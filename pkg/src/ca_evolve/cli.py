"""Command-line front end.

Subcommands: ``evolve`` runs seeded experiments, ``simulate`` prints a rule's
spacetime history, ``render`` writes it as an image, ``report`` merges
experiment artifacts into plot-ready CSV. Exit codes: 0 success, 1 runtime
failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import ca, harness, objectives, render


class UsageError(ValueError):
    pass


def parse_rule(text: str) -> ca.RuleTable:
    """Accept 'r<radius>:<hex>' always, bare decimal for radius 1 only."""
    text = text.strip()
    if text.isdigit():
        number = int(text)
        if number > 255:
            raise UsageError(
                f"decimal rule numbers are radius-1 only (0..255); "
                f"use r<radius>:<hex> for {text}"
            )
        return ca.RuleTable.from_number(number, 1)
    try:
        return ca.RuleTable.from_string(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_ic(spec: str, n: int, at, seed: int) -> np.ndarray:
    if spec == "single-one":
        return ca.single_one(n, at)
    if spec == "all-zeros":
        return ca.all_zeros(n)
    if spec == "all-ones":
        return ca.all_ones(n)
    if spec.startswith("density:"):
        try:
            rho = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad density in IC spec: {spec!r}") from exc
        if not 0.0 <= rho <= 1.0:
            raise UsageError(f"IC density must lie in [0, 1], got {rho}")
        k = round(rho * n)
        cells = ca.all_zeros(n)
        if k:
            rng = np.random.default_rng(seed)
            cells[rng.choice(n, size=k, replace=False)] = 1
        return cells
    if spec.startswith("hex:"):
        try:
            return objectives.unpack_cells_hex(spec.split(":", 1)[1], n)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    raise UsageError(
        f"unknown IC spec {spec!r}; use single-one, all-zeros, all-ones, "
        f"density:<rho>, or hex:<hex>"
    )


def _write_image(path: str, rows: np.ndarray, fmt, scale: int) -> None:
    if fmt is None:
        fmt = "png" if str(path).lower().endswith(".png") else "pbm"
    if fmt == "pbm":
        render.write_pbm(path, rows, scale)
    else:
        render.write_png(path, rows, scale)


# --- subcommands -------------------------------------------------------------

def cmd_evolve(args) -> int:
    try:
        cfg = harness.ExperimentConfig(
            task=args.task,
            algorithm=args.algo,
            radius=args.r,
            n=args.n,
            t=args.t,
            epochs=args.epochs,
            trials=args.trials,
            batch_size=args.batch,
            master_seed=args.seed,
            workers=args.workers,
            timeout_s=args.timeout,
            out_dir=args.out,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    summary = harness.run_experiment(cfg)
    print(f"{'algorithm':<10} {'task':<8} {'mean':>8} {'stddev':>8}")
    print(
        f"{cfg.algorithm:<10} {cfg.task:<8} "
        f"{summary.mean_holdout:>8.4f} {summary.stddev_holdout:>8.4f}"
    )
    if not summary.complete:
        print("warning: experiment incomplete", file=sys.stderr)
        for err in summary.errors:
            print(f"  trial {err['trial']}: {err['error']}", file=sys.stderr)
        return 1
    return 0


def _simulate_history(args) -> ca.SpacetimeHistory:
    rule = parse_rule(args.rule)
    ic = parse_ic(args.ic, args.n, args.at, args.seed)
    return ca.evolve(ic, rule, args.steps)


def cmd_simulate(args) -> int:
    history = _simulate_history(args)
    for row in history.rows:
        print("".join("1" if c else "0" for c in row))
    if args.render is not None:
        _write_image(args.render, history.rows, None, args.scale)
    return 0


def cmd_render(args) -> int:
    history = _simulate_history(args)
    _write_image(args.out, history.rows, args.format, args.scale)
    return 0


def cmd_report(args) -> int:
    root = Path(args.directory)
    summaries = sorted(root.rglob("summary.json")) if root.is_dir() else []
    if not summaries:
        print(f"no experiment summaries found under {root}", file=sys.stderr)
        return 1

    bad = []
    merged = ["epoch,trial,best_fitness"]
    table = []
    for summary_path in summaries:
        try:
            doc = json.loads(summary_path.read_text())
            cfg = doc["config"]
            table.append(
                f"{cfg['algorithm']} {cfg['task']} "
                f"{doc['mean_holdout']:.4f} ±{doc['stddev_holdout']:.4f}"
            )
            for ref in doc["trials"]:
                csv_path = summary_path.parent / ref["trajectory"]
                lines = csv_path.read_text().strip().splitlines()
                if lines[0] != "epoch,best_fitness":
                    raise ValueError(f"unexpected header in {csv_path}")
                for line in lines[1:]:
                    epoch, fitness = line.split(",")
                    merged.append(f"{epoch},{ref['index']},{fitness}")
        except (OSError, ValueError, KeyError) as exc:
            bad.append(f"{summary_path}: {type(exc).__name__}: {exc}")
    if bad:
        print("corrupt or missing artifacts:", file=sys.stderr)
        for item in bad:
            print(f"  {item}", file=sys.stderr)
        return 1

    out = Path(args.out) if args.out else root / "fitness_curves.csv"
    out.write_text("\n".join(merged) + "\n")
    for line in table:
        print(line)
    print(f"merged CSV: {out}")
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ca-evolve",
        description="Evolve 1-d binary cellular automata for density "
        "classification and chaos generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="run a seeded multi-trial experiment")
    ev.add_argument("--task", choices=harness.TASKS, default="density")
    ev.add_argument("--algo", choices=harness.ALGORITHMS, default="ga")
    ev.add_argument("--r", type=int, default=3, help="rule radius")
    ev.add_argument("--n", type=int, default=149, help="lattice width")
    ev.add_argument("--t", type=int, default=150, help="CA steps per evaluation")
    ev.add_argument("--epochs", type=int, default=200)
    ev.add_argument("--trials", type=int, default=10)
    ev.add_argument("--batch", type=int, default=100, help="ICs per fitness evaluation")
    ev.add_argument("--seed", type=int, default=0, help="master seed")
    ev.add_argument("--workers", type=int,
                    default=int(os.environ.get("CA_EVOLVE_WORKERS", "1")))
    ev.add_argument("--timeout", type=float, default=None, help="per-trial seconds")
    ev.add_argument("--out", required=True, help="artifact directory")
    ev.set_defaults(func=cmd_evolve)

    def add_sim_args(p):
        p.add_argument("--rule", required=True,
                       help="decimal (radius 1) or r<radius>:<hex>")
        p.add_argument("--n", type=int, default=149)
        p.add_argument("--steps", type=int, default=150)
        p.add_argument("--ic", default="single-one",
                       help="single-one | all-zeros | all-ones | density:<rho> | hex:<hex>")
        p.add_argument("--at", type=int, default=None,
                       help="cell index for single-one (default: centered)")
        p.add_argument("--seed", type=int, default=0, help="seed for density ICs")
        p.add_argument("--scale", type=int, default=1, help="pixels per cell")

    sim = sub.add_parser("simulate", help="print a spacetime history as 0/1 rows")
    add_sim_args(sim)
    sim.add_argument("--render", default=None, help="also write an image here")
    sim.set_defaults(func=cmd_simulate)

    ren = sub.add_parser("render", help="write a spacetime history as an image")
    add_sim_args(ren)
    ren.add_argument("--out", required=True)
    ren.add_argument("--format", choices=("pbm", "png"), default=None,
                     help="default: from the file extension")
    ren.set_defaults(func=cmd_render)

    rep = sub.add_parser("report", help="merge experiment artifacts into CSV")
    rep.add_argument("directory")
    rep.add_argument("--out", default=None, help="merged CSV path")
    rep.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
