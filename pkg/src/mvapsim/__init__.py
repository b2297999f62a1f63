"""Edge-offloading promptness simulator for digital-twin access points.

A discrete-time model of a Metaverse Virtual Access Point that splits each
service round's sensing data between its own CPU and an edge computing
server, trained with tabular Q-learning, DQN or DDQN against two-valued
promptness rewards, plus the experiment harness that reproduces the
convergence and deadline-sweep studies.
"""
from .agents import (DdqnAgent, DqnAgent, EpisodeRecord, ExplorationSchedule,
                     QlAgent, QTable, RandomAgent, ReplayMemory, Transition,
                     ddqn_target, dqn_target, make_agent, qtable_update,
                     select_action, train_episode)
from .config import (ExperimentConfig, SystemParams, default_config,
                     load_config)
from .env import EnvState, OffloadEnv, StepOutcome
from .errors import (ConfigError, EmptyBatchError, EmptyMvdSetError,
                     EmptyUserSetError, InvalidActionError,
                     NonFiniteInputError, NonStochasticRowError,
                     ShapeMismatchError, ZeroRateError)
from .harness import (CampaignSummary, SweepResult, run_campaign, run_cell,
                      sweep_requirement)
from .network import GradientSet, QNetwork, soft_update
from .physical import (ChannelParams, ComputeParams, LatencyBreakdown,
                       MvdParams)
from .seeding import named_streams
from .sinr import SinrChain

__version__ = "0.1.0"

__all__ = [
    "CampaignSummary", "ChannelParams", "ComputeParams", "ConfigError",
    "DdqnAgent", "DqnAgent", "EmptyBatchError", "EmptyMvdSetError",
    "EmptyUserSetError", "EnvState", "EpisodeRecord", "ExperimentConfig",
    "ExplorationSchedule", "GradientSet", "InvalidActionError",
    "LatencyBreakdown", "MvdParams", "NonFiniteInputError",
    "NonStochasticRowError", "OffloadEnv", "QNetwork", "QTable", "QlAgent",
    "RandomAgent", "ReplayMemory", "ShapeMismatchError", "SinrChain",
    "StepOutcome", "SweepResult", "SystemParams", "Transition",
    "ZeroRateError", "ddqn_target", "default_config", "dqn_target",
    "load_config", "make_agent", "named_streams", "qtable_update",
    "run_campaign", "run_cell",
    "select_action", "soft_update", "sweep_requirement", "train_episode",
]
