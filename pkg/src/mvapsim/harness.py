"""Campaign orchestration: seeded training runs, aggregation, file outputs.

A campaign trains each selected algorithm once per seed, averages the
per-episode reward curves across seeds, and reports when each algorithm's
moving average first reaches the configured fraction of its final plateau.
The requirement sweep repeats full trainings over a grid of fixed
deadlines.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .agents import EpisodeRecord, make_agent, train_episode
from .config import ExperimentConfig
from .env import OffloadEnv
from .seeding import named_streams

CSV_HEADER = ("episode", "reward_total", "reward_mean", "violations",
              "mean_t_total", "epsilon")


@dataclass(frozen=True)
class CampaignSummary:
    """Seed-averaged reward curves and convergence diagnostics."""

    episodes: int
    window: int
    plateau_fraction: float
    curves: dict[str, np.ndarray]          # per-algorithm mean reward per episode
    moving_averages: dict[str, np.ndarray]
    convergence_episode: dict[str, int]    # 1-based episode of first crossing
    final_reward: dict[str, float]         # final moving-average value


@dataclass(frozen=True)
class SweepResult:
    """Final reward per (deadline, algorithm) from the requirement sweep."""

    t_values: tuple[float, ...]
    algorithms: tuple[str, ...]
    rewards: np.ndarray                    # shape (len(t_values), len(algorithms))

    def reward(self, t_value: float, algorithm: str) -> float:
        i = self.t_values.index(t_value)
        j = self.algorithms.index(algorithm)
        return float(self.rewards[i, j])


def run_cell(config: ExperimentConfig, algorithm: str,
             seed: int) -> list[EpisodeRecord]:
    """Train one (algorithm, seed) replica for the configured episode count."""
    streams = named_streams(seed)
    env = OffloadEnv(config, streams)
    agent = make_agent(algorithm, config, env.action_count, streams)
    return [train_episode(agent, env, episode_index=ep)
            for ep in range(1, config.campaign.episodes + 1)]


def _run_cell_task(args) -> tuple[str, int, list[EpisodeRecord]]:
    config, algorithm, seed = args
    return algorithm, seed, run_cell(config, algorithm, seed)


def _run_cells(config: ExperimentConfig,
               cells: Sequence[tuple[str, int]]) -> dict[tuple[str, int],
                                                         list[EpisodeRecord]]:
    tasks = [(config, algo, seed) for algo, seed in cells]
    workers = config.campaign.workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_task, tasks))
    else:
        results = [_run_cell_task(t) for t in tasks]
    return {(algo, seed): records for algo, seed, records in results}


def moving_average(values: Sequence[float], window: int) -> np.ndarray:
    """Trailing moving average; early entries average what exists so far."""
    values = np.asarray(values, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    sums = np.cumsum(values)
    out = np.empty_like(values)
    out[:window] = sums[:window] / np.arange(1, min(window, len(values)) + 1)
    if len(values) > window:
        out[window:] = (sums[window:] - sums[:-window]) / window
    return out


def convergence_episode(ma: np.ndarray, fraction: float, window: int = 1) -> int:
    """First 1-based episode where the moving average reaches fraction*final.

    The search starts at ``window`` since earlier entries average fewer than
    ``window`` episodes and are dominated by single-episode noise.
    """
    plateau = ma[-1]
    threshold = fraction * plateau
    if plateau < 0:
        threshold = plateau / fraction  # a negative plateau is reached from below
    start = min(max(window - 1, 0), len(ma) - 1)
    hits = np.nonzero(ma[start:] >= threshold)[0]
    return int(hits[0]) + start + 1 if hits.size else len(ma)


def summarize(config: ExperimentConfig,
              records: Mapping[tuple[str, int], list[EpisodeRecord]]) -> CampaignSummary:
    camp = config.campaign
    curves: dict[str, np.ndarray] = {}
    mas: dict[str, np.ndarray] = {}
    conv: dict[str, int] = {}
    final: dict[str, float] = {}
    for algo in camp.algorithms:
        per_seed = [
            [rec.reward_mean for rec in records[(algo, seed)]]
            for seed in camp.seeds if (algo, seed) in records
        ]
        if not per_seed:
            continue
        curve = np.mean(np.asarray(per_seed), axis=0)
        ma = moving_average(curve, camp.moving_average_window)
        curves[algo] = curve
        mas[algo] = ma
        conv[algo] = convergence_episode(ma, camp.plateau_fraction,
                                         camp.moving_average_window)
        final[algo] = float(ma[-1])
    return CampaignSummary(
        episodes=camp.episodes,
        window=camp.moving_average_window,
        plateau_fraction=camp.plateau_fraction,
        curves=curves,
        moving_averages=mas,
        convergence_episode=conv,
        final_reward=final,
    )


def run_campaign(config: ExperimentConfig,
                 write_outputs: bool = True) -> CampaignSummary:
    """Train every (algorithm, seed) cell, aggregate, and emit the file set."""
    camp = config.campaign
    cells = [(algo, seed) for algo in camp.algorithms for seed in camp.seeds]
    records = _run_cells(config, cells)
    summary = summarize(config, records)
    if write_outputs:
        emit_outputs(records, summary, Path(config.output_dir))
    return summary


def sweep_requirement(config: ExperimentConfig,
                      t_values: Sequence[float] | None = None,
                      write_outputs: bool = True) -> SweepResult:
    """One full training per (algorithm, deadline); deadlines are fixed."""
    camp = config.campaign
    if t_values is None:
        t_values = camp.sweep_t_require_s
    t_values = tuple(float(t) for t in t_values)
    if not t_values or any(t <= 0 for t in t_values):
        raise ValueError("sweep needs a non-empty list of positive deadlines")
    seeds = camp.sweep_seeds if camp.sweep_seeds is not None else (camp.seeds[0],)
    rewards = np.zeros((len(t_values), len(camp.algorithms)))
    for i, t_req in enumerate(t_values):
        cfg_t = replace(
            config,
            t_require_override_s=t_req,
            campaign=replace(camp, seeds=seeds),
        )
        cells = [(algo, seed) for algo in camp.algorithms for seed in seeds]
        records = _run_cells(cfg_t, cells)
        summary = summarize(cfg_t, records)
        for j, algo in enumerate(camp.algorithms):
            rewards[i, j] = summary.final_reward[algo]
    result = SweepResult(t_values=t_values, algorithms=camp.algorithms,
                         rewards=rewards)
    if write_outputs:
        write_sweep_outputs(result, Path(config.output_dir))
    return result


# --- file emission ----------------------------------------------------------

def write_episode_csv(path: Path, records: Sequence[EpisodeRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow([rec.episode, rec.reward_total, rec.reward_mean,
                             rec.violations, rec.mean_t_total, rec.epsilon])


def emit_outputs(records: Mapping[tuple[str, int], Sequence[EpisodeRecord]],
                 summary: CampaignSummary, out_dir: Path) -> list[Path]:
    """Write per-cell CSVs, the text summary and the convergence figure."""
    if not records:
        raise ValueError("no episode records to write")
    for key, recs in records.items():
        if not recs:
            raise ValueError(f"cell {key} has no episode records")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for (algo, seed) in sorted(records):
        path = out_dir / f"{algo}_seed{seed}.csv"
        write_episode_csv(path, records[(algo, seed)])
        written.append(path)

    summary_path = out_dir / "summary.txt"
    lines = [
        f"episodes: {summary.episodes}",
        f"moving average window: {summary.window}",
        f"plateau fraction: {summary.plateau_fraction}",
        "",
    ]
    for algo in summary.final_reward:
        lines.append(
            f"{algo}: final average reward {summary.final_reward[algo]:.4f}, "
            f"convergence episode {summary.convergence_episode[algo]}")
    summary_path.write_text("\n".join(lines) + "\n")
    written.append(summary_path)

    from .plots import plot_convergence
    fig_path = out_dir / "convergence.svg"
    plot_convergence(summary, fig_path)
    written.append(fig_path)
    return written


def write_sweep_outputs(result: SweepResult, out_dir: Path) -> list[Path]:
    """Write the deadline-sweep table and its figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_require_s", *result.algorithms])
        for i, t in enumerate(result.t_values):
            writer.writerow([t, *result.rewards[i].tolist()])

    from .plots import plot_sweep
    fig_path = out_dir / "sweep.svg"
    plot_sweep(result, fig_path)
    return [csv_path, fig_path]
