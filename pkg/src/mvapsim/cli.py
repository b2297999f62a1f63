"""Command-line entry point: train campaigns, deadline sweeps, config checks."""
from __future__ import annotations

import argparse
import sys

from .config import ALGORITHMS, ConfigError, load_config
from .harness import run_campaign, sweep_requirement


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="YAML config file merged over the defaults")
    parser.add_argument("--algo", choices=[*ALGORITHMS, "all"],
                        help="restrict the campaign to one algorithm")
    parser.add_argument("--episodes", type=int, metavar="N",
                        help="override the episode count")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="run a single seed instead of the configured list")
    parser.add_argument("--out", metavar="DIR",
                        help="output directory for CSVs, summary and figures")
    parser.add_argument("--workers", type=int, metavar="N",
                        help="parallel (algorithm, seed) cells")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvapsim",
        description="Edge-offloading promptness simulator with RL agents.")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run the convergence campaign")
    _add_common(train)

    sweep = sub.add_parser("sweep", help="train across fixed latency deadlines")
    _add_common(sweep)
    sweep.add_argument("--t-values", metavar="T1,T2,...",
                       help="comma-separated deadlines in seconds")

    validate = sub.add_parser("validate-config",
                              help="parse and validate a config, then exit")
    validate.add_argument("--config", metavar="PATH")
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides: dict = {"campaign": {}}
    if args.algo and args.algo != "all":
        overrides["campaign"]["algorithms"] = [args.algo]
    if args.episodes is not None:
        overrides["campaign"]["episodes"] = args.episodes
    if args.seed is not None:
        overrides["campaign"]["seeds"] = [args.seed]
    if args.workers is not None:
        overrides["campaign"]["workers"] = args.workers
    if not overrides["campaign"]:
        del overrides["campaign"]
    if args.out is not None:
        overrides["output_dir"] = args.out
    return overrides


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate-config":
            load_config(args.config)
            print("configuration ok")
            return 0
        config = load_config(args.config, overrides=_overrides_from_args(args))
        if args.command == "train":
            summary = run_campaign(config)
            for algo, final in summary.final_reward.items():
                print(f"{algo}: final average reward {final:.4f}, convergence "
                      f"episode {summary.convergence_episode[algo]}")
            print(f"outputs written to {config.output_dir}")
            return 0
        if args.command == "sweep":
            t_values = None
            if getattr(args, "t_values", None):
                t_values = [float(tok) for tok in args.t_values.split(",") if tok]
            result = sweep_requirement(config, t_values)
            for i, t in enumerate(result.t_values):
                row = ", ".join(f"{algo}={result.rewards[i, j]:.2f}"
                                for j, algo in enumerate(result.algorithms))
                print(f"t_require={t:.2f}s: {row}")
            print(f"outputs written to {config.output_dir}")
            return 0
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
