"""Run-log CSV persistence and run comparison.

CSV discipline (fixed schema, so files are diffable and reproducible):
UTF-8, LF line endings, '.' decimal separator, reals at 17 significant
digits (shortest round-trip), one header row. Per-seed run logs carry
    run_id,seed,episode,env_steps,eval_mean_cost,eval_std,beta
and the cross-seed summary carries
    episode,env_steps,cost_mean,cost_std,n_seeds
Timing is not written into CSVs (it would break byte-for-byte
reproducibility); the experiment driver records it in a JSON sidecar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComparisonError
from .training import RunRow

RUNLOG_COLUMNS = ("run_id", "seed", "episode", "env_steps", "eval_mean_cost", "eval_std", "beta")
SUMMARY_COLUMNS = ("episode", "env_steps", "cost_mean", "cost_std", "n_seeds")


def fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_runlog(path, rows: list[RunRow]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(RUNLOG_COLUMNS) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    fmt(v)
                    for v in (
                        r.run_id, r.seed, r.episode, r.env_steps,
                        r.eval_mean_cost, r.eval_std, r.beta,
                    )
                )
                + "\n"
            )


def read_runlog(path) -> list[RunRow]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != RUNLOG_COLUMNS:
            raise ComparisonError(f"unexpected run-log header in {path}: {header}")
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(
                RunRow(
                    run_id=parts[0],
                    seed=int(parts[1]),
                    episode=int(parts[2]),
                    env_steps=int(parts[3]),
                    eval_mean_cost=float(parts[4]),
                    eval_std=float(parts[5]),
                    beta=float(parts[6]),
                )
            )
    return rows


def summarize(per_seed: list[list[RunRow]]):
    """Per-episode mean and population std of eval cost across seeds."""
    if not per_seed:
        raise ComparisonError("no runs to summarize")
    episodes = [r.episode for r in per_seed[0]]
    env_steps = [r.env_steps for r in per_seed[0]]
    for rows in per_seed[1:]:
        if [r.episode for r in rows] != episodes:
            raise ComparisonError("seed runs disagree on the episode grid")
    costs = np.array([[r.eval_mean_cost for r in rows] for rows in per_seed])
    return [
        {
            "episode": episodes[i],
            "env_steps": env_steps[i],
            "cost_mean": float(costs[:, i].mean()),
            "cost_std": float(costs[:, i].std()),
            "n_seeds": len(per_seed),
        }
        for i in range(len(episodes))
    ]


def write_summary(path, summary_rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for r in summary_rows:
            fh.write(",".join(fmt(r[c]) for c in SUMMARY_COLUMNS) + "\n")


def read_summary(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != SUMMARY_COLUMNS:
            raise ComparisonError(f"unexpected summary header in {path}: {header}")
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(
                {
                    "episode": int(parts[0]),
                    "env_steps": int(parts[1]),
                    "cost_mean": float(parts[2]),
                    "cost_std": float(parts[3]),
                    "n_seeds": int(parts[4]),
                }
            )
    return rows


@dataclass
class CompareReport:
    episodes: list[int]
    diff: list[float]  # cost_a - cost_b per episode
    final_gap: float
    threshold: float | None
    crossing_a: int | None  # first episode at or below threshold; None = not reached
    crossing_b: int | None

    def to_text(self) -> str:
        lines = [f"final_gap={fmt(self.final_gap)}"]
        if self.threshold is not None:
            ca = "not reached" if self.crossing_a is None else str(self.crossing_a)
            cb = "not reached" if self.crossing_b is None else str(self.crossing_b)
            lines.append(f"threshold={fmt(self.threshold)}")
            lines.append(f"crossing_a={ca}")
            lines.append(f"crossing_b={cb}")
        return "\n".join(lines)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("episode,cost_diff\n")
            for e, d in zip(self.episodes, self.diff):
                fh.write(f"{e},{fmt(d)}\n")


def first_crossing(episodes, costs, threshold) -> int | None:
    for e, c in zip(episodes, costs):
        if c <= threshold:
            return e
    return None


def compare_runs(summary_a, summary_b, threshold: float | None = None) -> CompareReport:
    ep_a = [r["episode"] for r in summary_a]
    ep_b = [r["episode"] for r in summary_b]
    if ep_a != ep_b:
        raise ComparisonError(
            f"episode grids differ: {len(ep_a)} rows vs {len(ep_b)} rows"
        )
    ca = [r["cost_mean"] for r in summary_a]
    cb = [r["cost_mean"] for r in summary_b]
    return CompareReport(
        episodes=ep_a,
        diff=[a - b for a, b in zip(ca, cb)],
        final_gap=ca[-1] - cb[-1],
        threshold=threshold,
        crossing_a=None if threshold is None else first_crossing(ep_a, ca, threshold),
        crossing_b=None if threshold is None else first_crossing(ep_b, cb, threshold),
    )
