"""Filtered-vs-unfiltered experiment runner.

A configuration lists arms (how the belief set is built and how long to
train) and seeds. Every (arm, seed) cell runs sample -> optional filter ->
optional subsample -> solve -> evaluate and yields one report row. Cells
that share a seed share the random-walk, solver and evaluation streams, so
arms are compared on common random numbers.
"""
from __future__ import annotations

import csv
import io
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .benchmarks import data_path, hallway2_goal_states
from .core import PomdpModel
from .evaluate import DEFAULT_MAX_STEPS, EvalConfig, sample_rewards
from .filter import filter_beliefs, subsample
from .parser import load_model
from .sampler import sample_belief_set
from .solver import SolveConfig, solve

BUILTIN_MODELS = {
    "tiger": ("tiger.POMDP", frozenset()),
    "hallway2": ("hallway2.POMDP", hallway2_goal_states()),
}

TIME_COLUMNS = ("filter_time", "training_time", "eval_time", "total_time")
REPORT_COLUMNS = (
    "arm", "seed", "raw_samples", "beliefs_used", "threshold", "subsample",
    "convergence_threshold", "max_iterations", "policy_size", "iterations",
    "final_convergence", "stop_reason", "expected_reward", "reward_std",
    "episodes", "episodes_truncated", "reference_reward",
    *TIME_COLUMNS, "error",
)


@dataclass
class ArmConfig:
    name: str
    raw_samples: int
    threshold: Optional[float] = None
    subsample: Optional[int] = None
    convergence: Optional[float] = 1e-4
    max_iterations: Optional[int] = None
    time_budget: Optional[float] = None
    reference_reward: Optional[float] = None


@dataclass
class ExperimentConfig:
    model: str
    arms: list
    seeds: list
    goals: Optional[list] = None  # 1-based state numbers
    trials_per_start: int = 10
    max_steps_per_episode: int = DEFAULT_MAX_STEPS
    eval_discount: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        self.arms = [a if isinstance(a, ArmConfig) else ArmConfig(**a) for a in self.arms]
        self.seeds = [int(s) for s in self.seeds]
        if not self.arms:
            raise ValueError("an experiment needs at least one arm")
        if not self.seeds:
            raise ValueError("an experiment needs at least one seed")
        names = [a.name for a in self.arms]
        if len(set(names)) != len(names):
            raise ValueError("arm names must be unique")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: expected a mapping at top level")
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return asdict(self)


def resolve_model(name: str, goals_one_based=None) -> PomdpModel:
    """Builtin name ("tiger", "hallway2") or a path to a ``.POMDP`` file."""
    if name in BUILTIN_MODELS:
        filename, default_goals = BUILTIN_MODELS[name]
        path = data_path(filename)
    else:
        path, default_goals = Path(name), frozenset()
    goals = default_goals if goals_one_based is None else frozenset(int(g) - 1 for g in goals_one_based)
    return load_model(path, goals)


def derive_seed(seed: int, stage: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(stage)]).generate_state(1)[0])


SAMPLE_STREAM, SUBSAMPLE_STREAM, SOLVE_STREAM, EVAL_STREAM = range(4)


def run_cell(config: ExperimentConfig, arm: ArmConfig, seed: int) -> dict:
    row = {c: "" for c in REPORT_COLUMNS}
    row.update(arm=arm.name, seed=seed, raw_samples=arm.raw_samples,
               threshold="" if arm.threshold is None else arm.threshold,
               subsample="" if arm.subsample is None else arm.subsample,
               convergence_threshold="" if arm.convergence is None else arm.convergence,
               max_iterations="" if arm.max_iterations is None else arm.max_iterations,
               reference_reward="" if arm.reference_reward is None else arm.reference_reward)
    t0 = time.monotonic()
    try:
        model = resolve_model(config.model, config.goals)
        beliefs = sample_belief_set(model, arm.raw_samples, derive_seed(seed, SAMPLE_STREAM))
        filter_time = 0.0
        if arm.threshold is not None:
            beliefs, report = filter_beliefs(beliefs, arm.threshold)
            filter_time = report.elapsed
        if arm.subsample is not None:
            beliefs = subsample(beliefs, arm.subsample, derive_seed(seed, SUBSAMPLE_STREAM))
        row["beliefs_used"] = len(beliefs)

        solve_cfg = SolveConfig(arm.convergence, arm.max_iterations, arm.time_budget,
                                derive_seed(seed, SOLVE_STREAM))
        result = solve(model, beliefs, solve_cfg)
        eval_cfg = EvalConfig(config.trials_per_start, config.eval_discount,
                              config.max_steps_per_episode, derive_seed(seed, EVAL_STREAM))
        t_eval = time.monotonic()
        evaluation = sample_rewards(model, result.value_function, eval_cfg)
        eval_time = time.monotonic() - t_eval

        row.update(
            policy_size=len(result.value_function),
            iterations=result.iterations,
            final_convergence=repr(result.trace[-1].convergence) if result.trace else "",
            stop_reason=result.stop_reason,
            expected_reward=repr(evaluation.mean_reward),
            reward_std=repr(evaluation.std_reward),
            episodes=len(evaluation.episode_rewards),
            episodes_truncated=evaluation.episodes_truncated,
            filter_time=f"{filter_time:.3f}",
            training_time=f"{result.elapsed:.3f}",
            eval_time=f"{eval_time:.3f}",
        )
    except Exception as exc:  # noqa: BLE001 - a failed cell is reported, the others proceed
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["stop_reason"] = "error"
        traceback.print_exc()
    row["total_time"] = f"{time.monotonic() - t0:.3f}"
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(config: ExperimentConfig, progress=None) -> list[dict]:
    """All cells, returned in (arm, seed) order whatever the completion order."""
    cells = [(config, arm, seed) for arm in config.arms for seed in config.seeds]
    if config.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_cell_args, cells))
    else:
        rows = []
        for cell in cells:
            rows.append(run_cell(*cell))
            if progress is not None:
                progress(rows[-1])
    return rows


def format_report(config: ExperimentConfig, rows: list[dict]) -> str:
    """CSV preceded by ``#``-prefixed lines holding the resolved configuration."""
    buf = io.StringIO()
    buf.write("# perseusfilter experiment report\n")
    for line in yaml.safe_dump(config.to_dict(), sort_keys=False).splitlines():
        buf.write(f"# {line}\n")
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def read_report(text: str) -> list[dict]:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


def mask_times(report_text: str) -> str:
    """The report with elapsed-time columns blanked, for reproducibility comparisons."""
    out = io.StringIO()
    header = [line for line in report_text.splitlines(keepends=True) if line.startswith("#")]
    out.writelines(header)
    rows = read_report(report_text)
    writer = csv.DictWriter(out, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if k in TIME_COLUMNS else v) for k, v in row.items()})
    return out.getvalue()


HALLWAY2_COMPARISON = {
    "model": "hallway2",
    "seeds": [1, 2, 3],
    "trials_per_start": 10,
    "max_steps_per_episode": DEFAULT_MAX_STEPS,
    "arms": [
        {"name": "original", "raw_samples": 3212, "convergence": 1e-4,
         "max_iterations": 100, "time_budget": 1800, "reference_reward": 0.3468},
        {"name": "filter-0.01", "raw_samples": 10000, "threshold": 0.01, "convergence": 1e-4,
         "max_iterations": 100, "time_budget": 1800, "reference_reward": 0.3545},
    ],
}
