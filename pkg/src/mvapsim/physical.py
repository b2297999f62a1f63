"""Closed-form link and latency model of one service round.

Pure functions over plain floats: sensing volume, LoS channel gain with
Rician fading, per-device uplink rate and delay, local/offloaded compute
latency and the end-to-end total. All quantities are SI (bits, seconds,
hertz, watts, meters).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyMvdSetError, EmptyUserSetError, ZeroRateError


@dataclass(frozen=True)
class MvdParams:
    """Per-device sensing and uplink parameters.

    All fields must be strictly positive; distance bounds are enforced by
    the environment that draws them, not here.
    """

    sensing_time_s: float
    sensing_rate_pps: float
    packet_bits: float
    distance_m: float
    tx_power_w: float
    bandwidth_hz: float

    def __post_init__(self):
        for name in ("sensing_time_s", "sensing_rate_pps", "packet_bits",
                     "distance_m", "tx_power_w", "bandwidth_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"MvdParams.{name} must be > 0")


@dataclass(frozen=True)
class ChannelParams:
    """LoS channel constants for the device uplink.

    ``pathloss_ref`` is the reference gain at 1 m; it absorbs the carrier
    and attenuation prefactors. ``rice_k_factor`` is the linear K of the
    fading power distribution (K = 0 degenerates to Rayleigh).
    """

    pathloss_ref: float
    pathloss_exponent: float
    noise_variance_w: float
    capacity_gap: float
    rice_k_factor: float

    def __post_init__(self):
        if not self.pathloss_ref > 0:
            raise ValueError("ChannelParams.pathloss_ref must be > 0")
        if not self.pathloss_exponent > 0:
            raise ValueError("ChannelParams.pathloss_exponent must be > 0")
        if not self.noise_variance_w > 0:
            raise ValueError("ChannelParams.noise_variance_w must be > 0")
        if not self.capacity_gap > 1:
            raise ValueError("ChannelParams.capacity_gap must be > 1")
        if self.rice_k_factor < 0:
            raise ValueError("ChannelParams.rice_k_factor must be >= 0")


@dataclass(frozen=True)
class ComputeParams:
    """Processor and delivery constants shared by every round."""

    f_mvap_hz: float
    f_ecs_hz: float
    complexity_cycles_per_bit: float
    w_mvap_hz: float
    delivery_time_s: float

    def __post_init__(self):
        for name in ("f_mvap_hz", "f_ecs_hz", "complexity_cycles_per_bit",
                     "w_mvap_hz", "delivery_time_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"ComputeParams.{name} must be > 0")


@dataclass(frozen=True)
class LatencyBreakdown:
    """Additive decomposition of one round's end-to-end latency.

    ``t_total_s = t_sensing_comm_s + t_delivery_s +
    max(t_local_s, t_offloading_ecs_s)``; built by :func:`total_latency`.
    """

    t_sensing_comm_s: float
    t_local_s: float
    t_offloading_s: float
    t_offloading_ecs_s: float
    t_delivery_s: float
    t_total_s: float


def sensed_bits(mvd: MvdParams) -> float:
    """Bits collected by one device over its sensing window (exact, unrounded)."""
    return mvd.packet_bits * mvd.sensing_time_s * mvd.sensing_rate_pps


def rice_power_sample(k_factor: float, rng: np.random.Generator) -> float:
    """Draw a unit-mean Rician fading power sample |h|^2.

    The LoS amplitude is sqrt(K/(K+1)) and the scattered component has
    total power 1/(K+1), so E[|h|^2] = 1 for any K >= 0.
    """
    if k_factor < 0:
        raise ValueError("k_factor must be >= 0")
    los = math.sqrt(k_factor / (k_factor + 1.0))
    scale = math.sqrt(1.0 / (2.0 * (k_factor + 1.0)))
    z = rng.standard_normal(2)
    re = los + scale * z[0]
    im = scale * z[1]
    return re * re + im * im


def channel_gain(mvd: MvdParams, ch: ChannelParams, rice_sample: float) -> float:
    """Uplink power gain: reference gain, distance decay, fading power."""
    if rice_sample < 0:
        raise ValueError("rice_sample must be >= 0")
    return ch.pathloss_ref * mvd.distance_m ** (-ch.pathloss_exponent) * rice_sample


def mvd_rate(mvd: MvdParams, gain: float, ch: ChannelParams) -> float:
    """Achievable uplink rate in bit/s for the given instantaneous gain."""
    if gain < 0:
        raise ValueError("gain must be >= 0")
    snr = mvd.tx_power_w * gain / (ch.noise_variance_w * ch.capacity_gap)
    return mvd.bandwidth_hz * math.log2(1.0 + snr)


def comm_delay(bits: float, rate: float) -> float:
    """Transfer time of ``bits`` at ``rate``; a dead link is an error.

    Callers that tolerate unreachable devices should map
    :class:`ZeroRateError` to a promptness violation for the round.
    """
    if rate <= 0:
        raise ZeroRateError(f"link rate must be > 0, got {rate}")
    return bits / rate


def local_latency(b_local: float, cp: ComputeParams, f_mvap_sample: float) -> float:
    """Processing time of ``b_local`` bits on the access point's own CPU."""
    return cp.complexity_cycles_per_bit * b_local / f_mvap_sample


def ecs_rate(sinr_db: float, cp: ComputeParams) -> float:
    """Offload-link rate in bit/s at the given SINR state."""
    return cp.w_mvap_hz * math.log2(1.0 + 10.0 ** (sinr_db / 10.0))


def offload_latency(b_off: float, sinr_db: float, cp: ComputeParams,
                    f_ecs_sample: float) -> tuple[float, float]:
    """Transfer time and transfer-plus-remote-compute time for ``b_off`` bits."""
    if b_off < 0:
        raise ValueError("b_off must be >= 0")
    if b_off == 0:
        return 0.0, 0.0
    rate = ecs_rate(sinr_db, cp)
    if rate <= 0:
        raise ZeroRateError(f"offload link rate must be > 0, got {rate}")
    t_off = b_off / rate
    return t_off, t_off + cp.complexity_cycles_per_bit * b_off / f_ecs_sample


def total_latency(per_mvd: Sequence[tuple[float, float]], t_local: float,
                  t_off_ecs: float, cp: ComputeParams,
                  t_offloading: float = 0.0) -> LatencyBreakdown:
    """Assemble the round's latency from per-device and processing terms.

    ``per_mvd`` holds (communication, sensing) second pairs; the slowest
    device gates processing, and local/offloaded processing run in
    parallel.
    """
    if len(per_mvd) == 0:
        raise EmptyMvdSetError("at least one sensing device is required")
    t_sensing_comm = max(t_comm + t_sens for t_comm, t_sens in per_mvd)
    t_total = t_sensing_comm + cp.delivery_time_s + max(t_local, t_off_ecs)
    return LatencyBreakdown(
        t_sensing_comm_s=t_sensing_comm,
        t_local_s=t_local,
        t_offloading_s=t_offloading,
        t_offloading_ecs_s=t_off_ecs,
        t_delivery_s=cp.delivery_time_s,
        t_total_s=t_total,
    )


def requirement(t_req_list: Sequence[float]) -> float:
    """Strictest deadline among the connected users' requirements."""
    if len(t_req_list) == 0:
        raise EmptyUserSetError("at least one user requirement is needed")
    if any(t <= 0 for t in t_req_list):
        raise ValueError("user requirements must be > 0")
    return min(t_req_list)
