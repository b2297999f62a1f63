"""Policies: tabular Q-learning, DQN, DDQN and the random baseline.

All agents consume the environment's normalized 5-feature vectors; the
tabular agent discretizes them, the deep agents feed them to Q-networks.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import ExperimentConfig
from .env import OffloadEnv
from .network import QNetwork, soft_update


@dataclass(frozen=True)
class Transition:
    """One stored interaction: normalized features on both sides."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


@dataclass
class EpisodeRecord:
    """Per-episode diagnostics persisted by the harness."""

    episode: int
    reward_total: float
    reward_mean: float
    violations: int
    mean_t_total: float
    epsilon: float


class ReplayMemory:
    """Bounded FIFO of transitions with uniform minibatch sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._buffer: deque[Transition] = deque(maxlen=capacity)

    def push(self, transition: Transition) -> None:
        self._buffer.append(transition)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._buffer):
            raise ValueError("not enough stored transitions to sample from")
        idx = rng.choice(len(self._buffer), size=batch_size, replace=False)
        return [self._buffer[i] for i in idx]

    def __len__(self) -> int:
        return len(self._buffer)

    def __iter__(self):
        return iter(self._buffer)


@dataclass
class ExplorationSchedule:
    """Epsilon-greedy schedule decayed multiplicatively once per episode."""

    epsilon: float
    epsilon_decay: float
    epsilon_min: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon_min <= self.epsilon <= 1.0:
            raise ValueError("need 0 <= epsilon_min <= epsilon <= 1")
        if not 0.0 < self.epsilon_decay < 1.0:
            raise ValueError("need 0 < epsilon_decay < 1")

    def end_episode(self) -> float:
        self.epsilon = max(self.epsilon_min, self.epsilon * self.epsilon_decay)
        return self.epsilon


def derived_epsilon_decay(config: ExperimentConfig) -> float:
    """Per-episode decay reaching the floor at 80% of the campaign length."""
    agent = config.agent
    if agent.epsilon_decay is not None:
        return agent.epsilon_decay
    horizon = max(1.0, 0.8 * config.campaign.episodes)
    ratio = agent.epsilon_min / agent.epsilon_start
    return float(ratio ** (1.0 / horizon))


def select_action(q_values: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> int:
    """Epsilon-greedy choice; greedy ties resolve to the lowest index."""
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(len(q_values)))
    return int(np.argmax(q_values))


def dqn_target(reward: float, next_state: np.ndarray, target_net: QNetwork,
               gamma: float, terminal: bool) -> float:
    """Bootstrapped target using the target network's own maximum."""
    if terminal:
        return float(reward)
    return float(reward + gamma * np.max(target_net.forward(next_state)))


def ddqn_target(reward: float, next_state: np.ndarray, primary_net: QNetwork,
                target_net: QNetwork, gamma: float, terminal: bool) -> float:
    """Decoupled target: primary picks the action, target prices it."""
    if terminal:
        return float(reward)
    best = int(np.argmax(primary_net.forward(next_state)))
    return float(reward + gamma * target_net.forward(next_state)[best])


class QTable:
    """Q-values over a discretized feature space.

    Bin edges live in normalized-feature coordinates, so the same vectors
    the networks see index the table.
    """

    def __init__(self, action_count: int, feature_edges: Sequence[np.ndarray]):
        self.action_count = action_count
        self.edges = [np.asarray(e, dtype=float) for e in feature_edges]
        self._table: dict[tuple[int, ...], np.ndarray] = {}
        self._zeros = np.zeros(action_count)
        self._zeros.flags.writeable = False

    @classmethod
    def from_config(cls, config: ExperimentConfig, action_count: int) -> "QTable":
        sys = config.system
        agent = config.agent
        b_per_packet = sys.sensing_time_s * sys.sensing_rate_pps * sys.n_mvd
        b_lo = min(sys.packet_bits_choices) * b_per_packet / 1e7
        b_hi = max(sys.packet_bits_choices) * b_per_packet / 1e7
        if b_hi <= b_lo:
            b_hi = b_lo + 1.0
        t_hi = agent.ql_t_total_max_s / sys.t_require_range_s[1]
        # Interior edges only: n bins need n - 1 cuts.
        edges = [
            np.linspace(b_lo, b_hi, agent.ql_b_total_bins + 1)[1:-1],
            np.array([]),  # SINR feature is already discrete; bin by value
            np.linspace(0.0, t_hi, agent.ql_t_total_bins + 1)[1:-1],
            np.array([1.0 - sys.cpu_std_frac, 1.0 + sys.cpu_std_frac]),
            np.array([1.0 - sys.cpu_std_frac, 1.0 + sys.cpu_std_frac]),
        ]
        return cls(action_count, edges)

    def key(self, features: np.ndarray) -> tuple[int, ...]:
        """Map a normalized feature vector to its bin tuple."""
        out = []
        for value, edges in zip(features, self.edges):
            if edges.size == 0:
                # Discrete coordinate: key on the rounded value itself.
                out.append(int(round(float(value) * 1000)))
            else:
                out.append(int(np.searchsorted(edges, value, side="right")))
        return tuple(out)

    def q_values(self, key: tuple[int, ...]) -> np.ndarray:
        """Stored vector for the key, or a shared read-only zero vector."""
        return self._table.get(key, self._zeros)

    def update(self, s_key: tuple[int, ...], action: int, reward: float,
               next_key: tuple[int, ...], alpha: float, gamma: float) -> None:
        """One-step Q-learning backup; unseen keys start at zero."""
        row = self._table.get(s_key)
        if row is None:
            row = np.zeros(self.action_count)
            self._table[s_key] = row
        best_next = float(np.max(self.q_values(next_key)))
        row[action] += alpha * (reward + gamma * best_next - row[action])

    def __len__(self) -> int:
        return len(self._table)


def qtable_update(table: QTable, s_key, action, reward, next_key,
                  alpha: float, gamma: float) -> QTable:
    """Functional spelling of :meth:`QTable.update`; returns the table."""
    table.update(s_key, action, reward, next_key, alpha, gamma)
    return table


# ---------------------------------------------------------------------------
class RandomAgent:
    """The no-learning control: uniform action every step."""

    def __init__(self, action_count: int, rng: np.random.Generator):
        self._action_count = action_count
        self._rng = rng

    @property
    def epsilon(self) -> float:
        return 1.0

    def act(self, features: np.ndarray) -> int:
        return int(self._rng.integers(self._action_count))

    def observe(self, transition: Transition) -> None:
        pass

    def end_episode(self) -> None:
        pass


class QlAgent:
    """Tabular epsilon-greedy Q-learning over the discretized state."""

    def __init__(self, config: ExperimentConfig, action_count: int,
                 streams: Mapping[str, np.random.Generator]):
        agent = config.agent
        self.table = QTable.from_config(config, action_count)
        self.schedule = ExplorationSchedule(
            epsilon=agent.epsilon_start,
            epsilon_decay=derived_epsilon_decay(config),
            epsilon_min=agent.epsilon_min,
        )
        self.alpha = agent.ql_learning_rate
        self.gamma = agent.discount
        self._rng = streams["explore"]

    @property
    def epsilon(self) -> float:
        return self.schedule.epsilon

    def act(self, features: np.ndarray) -> int:
        key = self.table.key(features)
        return select_action(self.table.q_values(key), self.schedule.epsilon,
                             self._rng)

    def observe(self, transition: Transition) -> None:
        self.table.update(
            self.table.key(transition.state), transition.action,
            transition.reward, self.table.key(transition.next_state),
            self.alpha, self.gamma)

    def end_episode(self) -> None:
        self.schedule.end_episode()


class DqnAgent:
    """Replay-trained Q-network with a softly updated target copy."""

    def __init__(self, config: ExperimentConfig, action_count: int,
                 streams: Mapping[str, np.random.Generator], state_dim: int = 5):
        agent = config.agent
        sizes = (state_dim, *agent.hidden_sizes, action_count)
        self.primary = QNetwork(sizes, streams["init"])
        self.target = self.primary.copy()
        self.replay = ReplayMemory(agent.replay_capacity)
        self.schedule = ExplorationSchedule(
            epsilon=agent.epsilon_start,
            epsilon_decay=derived_epsilon_decay(config),
            epsilon_min=agent.epsilon_min,
        )
        self.gamma = agent.discount
        self.learning_rate = agent.learning_rate
        self.batch_size = agent.batch_size
        self.update_period = agent.target_update_period
        self.tau = agent.target_update_tau
        self._rng_explore = streams["explore"]
        self._rng_batch = streams["minibatch"]
        self._step_count = 0

    @property
    def epsilon(self) -> float:
        return self.schedule.epsilon

    def q_values(self, features: np.ndarray) -> np.ndarray:
        return self.primary.forward(features)

    def act(self, features: np.ndarray) -> int:
        # Inline epsilon-greedy so the forward pass is skipped while exploring.
        eps = self.schedule.epsilon
        if eps > 0.0 and self._rng_explore.random() < eps:
            return int(self._rng_explore.integers(self.primary.action_count))
        return int(np.argmax(self.primary.forward(features)))

    def observe(self, transition: Transition) -> None:
        self.replay.push(transition)
        self._step_count += 1
        if len(self.replay) >= self.batch_size:
            self._learn()
        if self._step_count % self.update_period == 0:
            soft_update(self.target, self.primary, self.tau)

    def _targets(self, rewards: np.ndarray, next_states: np.ndarray,
                 terminals: np.ndarray) -> np.ndarray:
        q_next = self.target.forward_batch(next_states)
        bootstrap = q_next.max(axis=1)
        return rewards + self.gamma * bootstrap * ~terminals

    def _learn(self) -> None:
        batch = self.replay.sample(self.batch_size, self._rng_batch)
        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch])
        rewards = np.array([t.reward for t in batch])
        next_states = np.stack([t.next_state for t in batch])
        terminals = np.array([t.terminal for t in batch])
        targets = self._targets(rewards, next_states, terminals)
        self.primary.train_step(states, actions, targets, self.learning_rate)

    def end_episode(self) -> None:
        self.schedule.end_episode()


class DdqnAgent(DqnAgent):
    """DQN variant that decouples action selection from target valuation."""

    def _targets(self, rewards: np.ndarray, next_states: np.ndarray,
                 terminals: np.ndarray) -> np.ndarray:
        best = self.primary.forward_batch(next_states).argmax(axis=1)
        q_next = self.target.forward_batch(next_states)
        bootstrap = q_next[np.arange(len(best)), best]
        return rewards + self.gamma * bootstrap * ~terminals


def make_agent(algorithm: str, config: ExperimentConfig, action_count: int,
               streams: Mapping[str, np.random.Generator]):
    """Instantiate one of the four policies by name."""
    if algorithm == "ql":
        return QlAgent(config, action_count, streams)
    if algorithm == "dqn":
        return DqnAgent(config, action_count, streams)
    if algorithm == "ddqn":
        return DdqnAgent(config, action_count, streams)
    if algorithm == "rm":
        return RandomAgent(action_count, streams["explore"])
    raise ValueError(f"unknown algorithm {algorithm!r}")


def train_episode(agent, env: OffloadEnv, episode_index: int = 0) -> EpisodeRecord:
    """Run one full episode, training the agent online; returns its record."""
    state = env.reset()
    features = env.normalize(state)
    total = 0.0
    violations = 0
    t_total_sum = 0.0
    steps = 0
    while True:
        action = agent.act(features)
        outcome = env.step(action)
        next_features = env.normalize(outcome.next_state)
        agent.observe(Transition(
            state=features,
            action=action,
            reward=outcome.reward,
            next_state=next_features,
            terminal=outcome.terminal,
        ))
        total += outcome.reward
        violations += int(outcome.violated)
        t_total_sum += outcome.breakdown.t_total_s
        steps += 1
        features = next_features
        if outcome.terminal:
            break
    agent.end_episode()
    return EpisodeRecord(
        episode=episode_index,
        reward_total=total,
        reward_mean=total / steps,
        violations=violations,
        mean_t_total=t_total_sum / steps,
        epsilon=agent.epsilon,
    )
