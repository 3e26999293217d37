"""Seeded multi-trial experiments comparing the search methods on both tasks.

A trial derives its seed from the master seed by a stable hash (SHA-256 of
"<master>:<index>"), so adding trials never perturbs earlier ones and reruns
reproduce every artifact byte for byte. Each trial optimizes with a fresh IC
batch per epoch, then re-scores the returned rule on a held-out batch; the
summary reports both the training-batch best and the held-out mean, since the
former is optimistically biased by the per-epoch resampling.

Wall-clock times are kept on the in-memory results only and never written to
disk, so artifact files stay bit-identical across reruns.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import ca, objectives, optimizers

TASKS = ("density", "chaos")
ALGORITHMS = ("ga", "bpso", "bglpso")

_PSO_KEYS = {"swarm_size", "c1", "c2", "w1", "w2", "vmax",
             "neighborhood_delta", "mutation_pmf", "ring", "redraw_z"}
_GA_KEYS = {"population_size", "elite_fraction", "mutation_bits"}


@dataclass
class ExperimentConfig:
    task: str = "density"
    algorithm: str = "ga"
    radius: int = 3
    n: int = 149
    t: int = 150
    epochs: int = 200
    trials: int = 10
    batch_size: int = 100
    master_seed: int = 0
    workers: int = 1
    timeout_s: Optional[float] = None
    out_dir: Optional[str] = None
    optimizer: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.task == "density" and self.n % 2 == 0:
            raise ValueError("density task needs an odd lattice width")
        if self.trials < 1:
            raise ValueError(f"need at least one trial, got {self.trials}")
        if self.epochs < 1:
            raise ValueError(f"need at least one epoch, got {self.epochs}")
        if self.workers < 1:
            raise ValueError(f"worker count must be positive, got {self.workers}")
        allowed = _GA_KEYS if self.algorithm == "ga" else _PSO_KEYS
        unknown = set(self.optimizer) - allowed
        if unknown:
            raise ValueError(
                f"unknown optimizer keys for {self.algorithm}: {sorted(unknown)}"
            )

    def to_dict(self) -> Dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: Dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def rule_length(self) -> int:
        return ca.table_size(self.radius)

    def optimizer_config(self):
        if self.algorithm == "ga":
            return optimizers.GAConfig(epochs=self.epochs, **self.optimizer)
        overrides = dict(self.optimizer)
        if "mutation_pmf" in overrides:
            overrides["mutation_pmf"] = tuple(overrides["mutation_pmf"])
        return optimizers.PSOConfig(epochs=self.epochs, **overrides)


@dataclass
class TrialResult:
    index: int
    seed: int
    trajectory: np.ndarray
    best_rule: str               # serialized rule string
    train_fitness: float         # best fitness seen on per-epoch training batches
    holdout_fitness: float       # re-evaluated on a fresh held-out batch
    complete: bool
    compressor: Optional[str]    # set for the chaos task
    wall_clock_s: float          # in-memory only, never serialized

    def to_dict(self) -> Dict:
        return {
            "index": self.index,
            "seed": self.seed,
            "best_rule": self.best_rule,
            "train_fitness": self.train_fitness,
            "holdout_fitness": self.holdout_fitness,
            "complete": self.complete,
            "compressor": self.compressor,
            "epochs_run": int(len(self.trajectory)),
        }


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    results: List[TrialResult]
    errors: List[Dict]
    mean_holdout: float
    stddev_holdout: float
    mean_train: float
    stddev_train: float

    @property
    def complete(self) -> bool:
        return not self.errors and all(r.complete for r in self.results)


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Stable 64-bit trial seed: SHA-256 of "<master>:<index>", first 8 bytes."""
    digest = hashlib.sha256(f"{master_seed}:{trial_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _dispatch(cfg: ExperimentConfig, objective, rng, deadline):
    opt_cfg = cfg.optimizer_config()
    if cfg.algorithm == "ga":
        return optimizers.ga(objective, cfg.rule_length(), opt_cfg, rng, deadline)
    if cfg.algorithm == "bpso":
        return optimizers.binary_pso(objective, cfg.rule_length(), opt_cfg, rng, deadline)
    return optimizers.bgl_pso(objective, cfg.rule_length(), opt_cfg, rng, deadline)


def _holdout_fitness(cfg: ExperimentConfig, rule: ca.RuleTable, rng) -> float:
    batch = objectives.sample_flat_batch(cfg.n, cfg.batch_size, rng)
    if cfg.task == "density":
        return objectives.f100(rule, batch, cfg.t).value
    return objectives.chaos_fitness(rule, batch, cfg.t).value


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialResult:
    seed = trial_seed(cfg.master_seed, trial_index)
    opt_ss, obj_ss, holdout_ss = np.random.SeedSequence(seed).spawn(3)
    objective = objectives.make_objective(
        cfg.task, cfg.radius, cfg.n, cfg.t, cfg.batch_size, np.random.default_rng(obj_ss)
    )
    deadline = time.monotonic() + cfg.timeout_s if cfg.timeout_s else None

    start = time.monotonic()
    result = _dispatch(cfg, objective, np.random.default_rng(opt_ss), deadline)
    rule = ca.RuleTable(cfg.radius, result.best_position)
    holdout = _holdout_fitness(cfg, rule, np.random.default_rng(holdout_ss))
    elapsed = time.monotonic() - start

    return TrialResult(
        index=trial_index,
        seed=seed,
        trajectory=result.trajectory,
        best_rule=rule.to_string(),
        train_fitness=result.best_fitness,
        holdout_fitness=holdout,
        complete=result.complete,
        compressor=objectives.COMPRESSOR_ID if cfg.task == "chaos" else None,
        wall_clock_s=elapsed,
    )


def _mean_std(values: List[float]):
    if not values:
        return float("nan"), float("nan")
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return mean, std


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> ExperimentSummary:
    """Run all trials (optionally in parallel) and aggregate; write artifacts if a directory is given."""
    indices = list(range(cfg.trials))
    results: List[TrialResult] = []
    errors: List[Dict] = []

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {i: pool.submit(run_trial, cfg, i) for i in indices}
            for i in indices:
                try:
                    results.append(futures[i].result())
                except Exception as exc:  # noqa: BLE001 - per-trial isolation
                    errors.append({"trial": i, "error": f"{type(exc).__name__}: {exc}"})
    else:
        for i in indices:
            try:
                results.append(run_trial(cfg, i))
            except Exception as exc:  # noqa: BLE001 - per-trial isolation
                errors.append({"trial": i, "error": f"{type(exc).__name__}: {exc}"})

    mean_h, std_h = _mean_std([r.holdout_fitness for r in results])
    mean_t, std_t = _mean_std([r.train_fitness for r in results])
    summary = ExperimentSummary(
        config=cfg,
        results=results,
        errors=errors,
        mean_holdout=mean_h,
        stddev_holdout=std_h,
        mean_train=mean_t,
        stddev_train=std_t,
    )

    target = out_dir or cfg.out_dir
    if target is not None:
        write_artifacts(summary, Path(target))
    return summary


def write_artifacts(summary: ExperimentSummary, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trial_refs = []
    for r in summary.results:
        stem = f"trial_{r.index:03d}"
        (out_dir / f"{stem}.json").write_text(
            json.dumps(r.to_dict(), indent=2, sort_keys=True) + "\n"
        )
        lines = ["epoch,best_fitness"]
        lines += [f"{e + 1},{v:.12g}" for e, v in enumerate(r.trajectory)]
        (out_dir / f"{stem}.csv").write_text("\n".join(lines) + "\n")
        trial_refs.append(
            {
                "index": r.index,
                "file": f"{stem}.json",
                "trajectory": f"{stem}.csv",
                "train_fitness": r.train_fitness,
                "holdout_fitness": r.holdout_fitness,
            }
        )
    # echo the config without execution details so artifacts are relocatable
    # and byte-identical regardless of worker count
    cfg_doc = summary.config.to_dict()
    cfg_doc["out_dir"] = None
    cfg_doc["workers"] = 1
    doc = {
        "config": cfg_doc,
        "trials": trial_refs,
        "errors": summary.errors,
        "complete": summary.complete,
        "mean_holdout": summary.mean_holdout,
        "stddev_holdout": summary.stddev_holdout,
        "mean_train": summary.mean_train,
        "stddev_train": summary.stddev_train,
        "compressor": objectives.COMPRESSOR_ID if summary.config.task == "chaos" else None,
    }
    (out_dir / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
