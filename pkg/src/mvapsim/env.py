"""The service-round MDP: offload-split decisions against latency deadlines.

Each episode fixes packet size, device distances and the strictest user
deadline; each step realizes fading and CPU draws, evaluates the full
latency pipeline for the chosen split and pays a two-valued reward for
meeting or missing the deadline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import physical
from .config import ExperimentConfig
from .errors import InvalidActionError, ZeroRateError
from .physical import ChannelParams, ComputeParams, MvdParams
from .seeding import named_streams
from .sinr import SinrChain


@dataclass(frozen=True)
class EnvState:
    """Observable state of one decision step."""

    b_total_bits: float
    sinr_db: float
    t_total_prev_s: float
    f_mvap_hz: float
    f_ecs_hz: float


@dataclass(frozen=True)
class StepOutcome:
    """Everything one environment step produced."""

    next_state: EnvState
    reward: float
    breakdown: physical.LatencyBreakdown
    violated: bool
    terminal: bool
    b_offload_bits: float
    b_local_bits: float


class OffloadEnv:
    """Single-owner mutable environment; one instance per training replica.

    Args:
        config: full experiment configuration.
        streams: named random substreams (see :mod:`mvapsim.seeding`); the
            environment consumes "episode", "fading", "cpu" and "sinr".
    """

    def __init__(self, config: ExperimentConfig,
                 streams: Mapping[str, np.random.Generator] | None = None,
                 master_seed: int | None = None):
        if streams is None:
            if master_seed is None:
                raise ValueError("provide streams or a master_seed")
            streams = named_streams(master_seed)
        sys = config.system
        self._cfg = config
        self._sys = sys
        self._rng_episode = streams["episode"]
        self._rng_fading = streams["fading"]
        self._rng_cpu = streams["cpu"]
        self._rng_sinr = streams["sinr"]
        self._channel = ChannelParams(
            pathloss_ref=sys.pathloss_ref,
            pathloss_exponent=sys.pathloss_exponent,
            noise_variance_w=sys.noise_variance_w,
            capacity_gap=sys.capacity_gap,
            rice_k_factor=sys.rice_k_factor,
        )
        self._compute = ComputeParams(
            f_mvap_hz=sys.f_mvap_mean_hz,
            f_ecs_hz=sys.f_ecs_mean_hz,
            complexity_cycles_per_bit=sys.complexity_cycles_per_bit,
            w_mvap_hz=sys.mvap_bandwidth_hz,
            delivery_time_s=sys.delivery_time_s,
        )
        self._chain = SinrChain(config.sinr.states_db, config.sinr.transition)
        self._split_factor = config.campaign.split_factor
        self._t_steps = config.campaign.t_steps
        # Fixed normalization scales for the 5 network features.
        lo_db, hi_db = min(self._chain.states_db), max(self._chain.states_db)
        self._sinr_mid = 0.5 * (hi_db + lo_db)
        self._sinr_half = 0.5 * (hi_db - lo_db) or 1.0
        self._b_scale = 1e7
        self._t_scale = sys.t_require_range_s[1]
        # Episode state, populated by reset().
        self._state: EnvState | None = None
        self._mvds: list[MvdParams] = []
        self._t_require = math.nan
        self._step_index = 0

    # ------------------------------------------------------------------
    @property
    def action_count(self) -> int:
        """Number of grid points of the split action set (F + 1)."""
        return self._split_factor + 1

    @property
    def t_steps(self) -> int:
        return self._t_steps

    @property
    def t_require_s(self) -> float:
        """Strictest user deadline of the current episode."""
        return self._t_require

    @property
    def state(self) -> EnvState | None:
        return self._state

    def _draw_cpu(self, mean_hz: float) -> float:
        """Gaussian CPU draw, resampled below the configured floor."""
        sys = self._sys
        if sys.cpu_std_frac == 0.0:
            return mean_hz
        floor = sys.cpu_floor_frac * mean_hz
        std = sys.cpu_std_frac * mean_hz
        f = self._rng_cpu.normal(mean_hz, std)
        while f < floor:
            f = self._rng_cpu.normal(mean_hz, std)
        return f

    def reset(self) -> EnvState:
        """Start a new episode and return its initial state."""
        sys = self._sys
        rng = self._rng_episode
        packet_bits = float(sys.packet_bits_choices[
            rng.integers(len(sys.packet_bits_choices))])
        d_lo, d_hi = sys.distance_range_m
        distances = rng.uniform(d_lo, d_hi, sys.n_mvd)
        self._mvds = [MvdParams(
            sensing_time_s=sys.sensing_time_s,
            sensing_rate_pps=sys.sensing_rate_pps,
            packet_bits=packet_bits,
            distance_m=float(d),
            tx_power_w=sys.tx_power_w,
            bandwidth_hz=sys.mvd_bandwidth_hz,
        ) for d in distances]
        if self._cfg.t_require_override_s is not None:
            self._t_require = self._cfg.t_require_override_s
        else:
            t_lo, t_hi = sys.t_require_range_s
            draws = rng.uniform(t_lo, t_hi, sys.user_count)
            self._t_require = physical.requirement([float(t) for t in draws])
        self._chain.reset(rng=self._rng_sinr)
        b_total = sum(physical.sensed_bits(m) for m in self._mvds)
        self._state = EnvState(
            b_total_bits=b_total,
            sinr_db=self._chain.current_db,
            t_total_prev_s=0.0,
            f_mvap_hz=self._draw_cpu(sys.f_mvap_mean_hz),
            f_ecs_hz=self._draw_cpu(sys.f_ecs_mean_hz),
        )
        self._step_index = 0
        return self._state

    def step(self, action: int) -> StepOutcome:
        """Apply split action ``k`` (offload ceil(k*B/F) bits) for one round."""
        if self._state is None:
            raise RuntimeError("call reset() before step()")
        k = int(action)
        if not 0 <= k <= self._split_factor:
            raise InvalidActionError(
                f"action {k} outside [0, {self._split_factor}]")
        state = self._state
        b_total = state.b_total_bits
        b_off = min(float(math.ceil(k * b_total / self._split_factor)), b_total)
        b_local = b_total - b_off

        # Per-device sensing + uplink; a dead link forfeits the round.
        per_mvd = []
        t_local = 0.0
        t_off = t_off_ecs = 0.0
        try:
            for mvd in self._mvds:
                fade = physical.rice_power_sample(
                    self._channel.rice_k_factor, self._rng_fading)
                gain = physical.channel_gain(mvd, self._channel, fade)
                rate = physical.mvd_rate(mvd, gain, self._channel)
                delay = physical.comm_delay(physical.sensed_bits(mvd), rate)
                per_mvd.append((delay, mvd.sensing_time_s))
            t_local = physical.local_latency(b_local, self._compute,
                                             state.f_mvap_hz)
            t_off, t_off_ecs = physical.offload_latency(
                b_off, state.sinr_db, self._compute, state.f_ecs_hz)
        except ZeroRateError:
            per_mvd = [(math.inf, m.sensing_time_s) for m in self._mvds]
        breakdown = physical.total_latency(per_mvd, t_local, t_off_ecs,
                                           self._compute, t_offloading=t_off)

        violated = breakdown.t_total_s > self._t_require
        reward = self._cfg.reward.negative if violated else self._cfg.reward.positive

        self._step_index += 1
        next_state = EnvState(
            b_total_bits=b_total,
            sinr_db=self._chain.step(self._rng_sinr),
            t_total_prev_s=breakdown.t_total_s,
            f_mvap_hz=self._draw_cpu(self._sys.f_mvap_mean_hz),
            f_ecs_hz=self._draw_cpu(self._sys.f_ecs_mean_hz),
        )
        self._state = next_state
        return StepOutcome(
            next_state=next_state,
            reward=reward,
            breakdown=breakdown,
            violated=violated,
            terminal=self._step_index >= self._t_steps,
            b_offload_bits=b_off,
            b_local_bits=b_local,
        )

    def normalize(self, state: EnvState) -> np.ndarray:
        """Scale the 5 state components to comparable magnitudes for the nets."""
        sys = self._sys
        return np.array([
            state.b_total_bits / self._b_scale,
            (state.sinr_db - self._sinr_mid) / self._sinr_half,
            state.t_total_prev_s / self._t_scale,
            state.f_mvap_hz / sys.f_mvap_mean_hz,
            state.f_ecs_hz / sys.f_ecs_mean_hz,
        ])
