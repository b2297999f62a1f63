"""Report figures rendered to SVG next to the CSV outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# Stable ids inside the SVG so identical runs emit identical files.
matplotlib.rcParams["svg.hashsalt"] = "mvapsim"

_LABELS = {"ql": "Q-learning", "dqn": "DQN", "ddqn": "DDQN", "rm": "random"}
_COLORS = {"ql": "tab:green", "dqn": "tab:orange", "ddqn": "tab:blue",
           "rm": "tab:red"}


def _save(fig, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_convergence(summary, path: Path) -> None:
    """Moving-average reward per episode for every trained algorithm."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    episodes = None
    for algo, ma in summary.moving_averages.items():
        episodes = range(1, len(ma) + 1)
        ax.plot(episodes, ma, label=_LABELS.get(algo, algo),
                color=_COLORS.get(algo), linewidth=1.6)
    ax.set_xlabel("episode")
    ax.set_ylabel(f"average reward ({summary.window}-episode moving mean)")
    ax.grid(True, alpha=0.3)
    if episodes is not None and summary.episodes > 1:
        ax.set_xlim(1, summary.episodes)
    ax.legend(loc="lower right")
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(result, path: Path) -> None:
    """Final average reward as a function of the fixed latency deadline."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for j, algo in enumerate(result.algorithms):
        ax.plot(result.t_values, result.rewards[:, j], marker="o",
                label=_LABELS.get(algo, algo), color=_COLORS.get(algo),
                linewidth=1.6, markersize=4)
    ax.set_xlabel("latency requirement (s)")
    ax.set_ylabel("final average reward")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    _save(fig, path)
