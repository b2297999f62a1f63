"""Experiment configuration: typed parameters, YAML loading, validation.

The shipped defaults live in ``data/default.yaml``; a config file given on
the command line is deep-merged over them, and CLI flags override both.
Validation errors always carry the dotted path of the offending key.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError, NonStochasticRowError, ShapeMismatchError

ALGORITHMS = ("ql", "dqn", "ddqn", "rm")


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the sensing/offloading pipeline."""

    n_mvd: int = 3
    sensing_time_s: float = 0.5
    sensing_rate_pps: float = 5.0
    packet_bits_choices: tuple[int, ...] = (518400, 921600, 2073600, 3686400)
    distance_range_m: tuple[float, float] = (160.0, 210.0)
    tx_power_w: float = 0.52
    mvd_bandwidth_hz: float = 150e6
    mvap_bandwidth_hz: float = 500e6
    pathloss_ref: float = 1e-6
    pathloss_exponent: float = 2.2
    noise_variance_w: float = 1e-11
    capacity_gap: float = 1.2
    rice_k_factor: float = 10.0
    complexity_cycles_per_bit: float = 650.0
    f_mvap_mean_hz: float = 10.5e9
    f_ecs_mean_hz: float = 20.5e9
    cpu_std_frac: float = 0.1
    cpu_floor_frac: float = 0.5
    delivery_time_s: float = 0.05
    interference: float = 3.0  # recorded for completeness; the SINR chain drives the link
    user_count: int = 3
    t_require_range_s: tuple[float, float] = (1.5, 2.3)


@dataclass(frozen=True)
class SinrChainParams:
    """SINR state set (dB) and row-stochastic transition matrix."""

    states_db: tuple[float, ...] = (-5.0, -3.0, 0.0, 3.0, 5.0)
    transition: tuple[tuple[float, ...], ...] = (
        (0.600, 0.250, 0.100, 0.040, 0.010),
        (0.262, 0.312, 0.262, 0.112, 0.052),
        (0.096, 0.246, 0.316, 0.246, 0.096),
        (0.052, 0.112, 0.262, 0.312, 0.262),
        (0.010, 0.040, 0.100, 0.250, 0.600),
    )


@dataclass(frozen=True)
class RewardParams:
    positive: float = 20.0
    negative: float = -1.0


@dataclass(frozen=True)
class AgentParams:
    """Hyperparameters shared by the learning agents.

    ``epsilon_decay`` of None derives the per-episode factor so epsilon
    reaches its floor at 80% of the configured episode count.
    """

    learning_rate: float = 0.001
    batch_size: int = 10
    discount: float = 0.9985
    epsilon_start: float = 1.0
    epsilon_min: float = 0.001
    epsilon_decay: float | None = None
    replay_capacity: int = 10000
    target_update_period: int = 10
    target_update_tau: float = 0.01
    hidden_sizes: tuple[int, ...] = (256, 256, 256)
    ql_learning_rate: float = 0.1
    ql_b_total_bins: int = 8
    ql_t_total_bins: int = 6
    ql_t_total_max_s: float = 3.0
    ql_cpu_bins: int = 3


@dataclass(frozen=True)
class CampaignParams:
    """Shape of a training campaign and of the requirement sweep."""

    algorithms: tuple[str, ...] = ALGORITHMS
    episodes: int = 1000
    t_steps: int = 100
    split_factor: int = 1000
    seeds: tuple[int, ...] = (1, 2, 3)
    moving_average_window: int = 50
    plateau_fraction: float = 0.95
    sweep_t_require_s: tuple[float, ...] = (
        1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0, 2.1, 2.2, 2.3)
    sweep_seeds: tuple[int, ...] | None = None
    workers: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemParams = field(default_factory=SystemParams)
    sinr: SinrChainParams = field(default_factory=SinrChainParams)
    reward: RewardParams = field(default_factory=RewardParams)
    agent: AgentParams = field(default_factory=AgentParams)
    campaign: CampaignParams = field(default_factory=CampaignParams)
    t_require_override_s: float | None = None
    output_dir: str = "results"


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def packaged_default_path() -> Path:
    """Path of the shipped default config file."""
    return Path(resources.files("mvapsim").joinpath("data/default.yaml"))


# --- strict dict -> dataclass conversion -------------------------------------

def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(f"{path}: {message}")


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {value!r}")
    return int(value)


def _as_seq(value: Any, path: str) -> list:
    if not isinstance(value, (list, tuple)):
        raise _fail(path, f"expected a list, got {value!r}")
    return list(value)


def _positive(value: float, path: str) -> float:
    if not value > 0:
        raise _fail(path, f"must be > 0, got {value!r}")
    return value


def _merge(base: dict, override: Mapping, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in base:
            raise _fail(where, "unknown key")
        if isinstance(base[key], dict):
            if not isinstance(value, Mapping):
                raise _fail(where, f"expected a mapping, got {value!r}")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def _build_system(d: Mapping) -> SystemParams:
    p = "system"
    choices = tuple(_as_int(v, f"{p}.packet_bits_choices[{i}]")
                    for i, v in enumerate(_as_seq(d["packet_bits_choices"],
                                                  f"{p}.packet_bits_choices")))
    if not choices or any(c <= 0 for c in choices):
        raise _fail(f"{p}.packet_bits_choices", "needs at least one positive entry")
    dist = _as_seq(d["distance_range_m"], f"{p}.distance_range_m")
    if len(dist) != 2:
        raise _fail(f"{p}.distance_range_m", "expected [min, max]")
    d_lo = _positive(_as_float(dist[0], f"{p}.distance_range_m[0]"),
                     f"{p}.distance_range_m[0]")
    d_hi = _as_float(dist[1], f"{p}.distance_range_m[1]")
    if d_hi < d_lo:
        raise _fail(f"{p}.distance_range_m", "max must be >= min")
    treq = _as_seq(d["t_require_range_s"], f"{p}.t_require_range_s")
    if len(treq) != 2:
        raise _fail(f"{p}.t_require_range_s", "expected [min, max]")
    t_lo = _positive(_as_float(treq[0], f"{p}.t_require_range_s[0]"),
                     f"{p}.t_require_range_s[0]")
    t_hi = _as_float(treq[1], f"{p}.t_require_range_s[1]")
    if t_hi < t_lo:
        raise _fail(f"{p}.t_require_range_s", "max must be >= min")

    n_mvd = _as_int(d["n_mvd"], f"{p}.n_mvd")
    if n_mvd < 1:
        raise _fail(f"{p}.n_mvd", "must be >= 1")
    user_count = _as_int(d["user_count"], f"{p}.user_count")
    if user_count < 1:
        raise _fail(f"{p}.user_count", "must be >= 1")
    cap_gap = _as_float(d["capacity_gap"], f"{p}.capacity_gap")
    if not cap_gap > 1:
        raise _fail(f"{p}.capacity_gap", "must be > 1")
    rice_k = _as_float(d["rice_k_factor"], f"{p}.rice_k_factor")
    if rice_k < 0:
        raise _fail(f"{p}.rice_k_factor", "must be >= 0")
    floor = _as_float(d["cpu_floor_frac"], f"{p}.cpu_floor_frac")
    if not 0 < floor < 1:
        raise _fail(f"{p}.cpu_floor_frac", "must lie in (0, 1)")
    std = _as_float(d["cpu_std_frac"], f"{p}.cpu_std_frac")
    if std < 0:
        raise _fail(f"{p}.cpu_std_frac", "must be >= 0")

    def pos(key):
        return _positive(_as_float(d[key], f"{p}.{key}"), f"{p}.{key}")

    return SystemParams(
        n_mvd=n_mvd,
        sensing_time_s=pos("sensing_time_s"),
        sensing_rate_pps=pos("sensing_rate_pps"),
        packet_bits_choices=choices,
        distance_range_m=(d_lo, d_hi),
        tx_power_w=pos("tx_power_w"),
        mvd_bandwidth_hz=pos("mvd_bandwidth_hz"),
        mvap_bandwidth_hz=pos("mvap_bandwidth_hz"),
        pathloss_ref=pos("pathloss_ref"),
        pathloss_exponent=pos("pathloss_exponent"),
        noise_variance_w=pos("noise_variance_w"),
        capacity_gap=cap_gap,
        rice_k_factor=rice_k,
        complexity_cycles_per_bit=pos("complexity_cycles_per_bit"),
        f_mvap_mean_hz=pos("f_mvap_mean_hz"),
        f_ecs_mean_hz=pos("f_ecs_mean_hz"),
        cpu_std_frac=std,
        cpu_floor_frac=floor,
        delivery_time_s=pos("delivery_time_s"),
        interference=_as_float(d["interference"], f"{p}.interference"),
        user_count=user_count,
        t_require_range_s=(t_lo, t_hi),
    )


def _build_sinr(d: Mapping) -> SinrChainParams:
    states = tuple(_as_float(v, f"sinr.states_db[{i}]")
                   for i, v in enumerate(_as_seq(d["states_db"], "sinr.states_db")))
    rows = _as_seq(d["transition"], "sinr.transition")
    matrix = []
    for i, row in enumerate(rows):
        row = _as_seq(row, f"sinr.transition[{i}]")
        matrix.append(tuple(_as_float(v, f"sinr.transition[{i}][{j}]")
                            for j, v in enumerate(row)))
    params = SinrChainParams(states_db=states, transition=tuple(matrix))
    # Delegate the stochasticity invariants to the chain itself.
    from .sinr import SinrChain
    try:
        SinrChain(params.states_db, params.transition)
    except (NonStochasticRowError, ShapeMismatchError) as exc:
        raise _fail("sinr.transition", str(exc)) from exc
    return params


def _build_reward(d: Mapping) -> RewardParams:
    pos = _as_float(d["positive"], "reward.positive")
    neg = _as_float(d["negative"], "reward.negative")
    if not pos > neg:
        raise _fail("reward.positive", "must exceed reward.negative")
    return RewardParams(positive=pos, negative=neg)


def _build_agent(d: Mapping) -> AgentParams:
    p = "agent"
    decay = d["epsilon_decay"]
    if decay is not None:
        decay = _as_float(decay, f"{p}.epsilon_decay")
        if not 0 < decay < 1:
            raise _fail(f"{p}.epsilon_decay", "must lie in (0, 1)")
    eps0 = _as_float(d["epsilon_start"], f"{p}.epsilon_start")
    eps_min = _as_float(d["epsilon_min"], f"{p}.epsilon_min")
    if not 0 <= eps_min <= eps0 <= 1:
        raise _fail(f"{p}.epsilon_start", "need 0 <= epsilon_min <= epsilon_start <= 1")
    tau = _as_float(d["target_update_tau"], f"{p}.target_update_tau")
    if not 0 <= tau <= 1:
        raise _fail(f"{p}.target_update_tau", "must lie in [0, 1]")
    discount = _as_float(d["discount"], f"{p}.discount")
    if not 0 <= discount <= 1:
        raise _fail(f"{p}.discount", "must lie in [0, 1]")
    hidden = tuple(_as_int(v, f"{p}.hidden_sizes[{i}]")
                   for i, v in enumerate(_as_seq(d["hidden_sizes"],
                                                 f"{p}.hidden_sizes")))
    if not hidden or any(h < 1 for h in hidden):
        raise _fail(f"{p}.hidden_sizes", "needs at least one positive width")

    def posint(key):
        v = _as_int(d[key], f"{p}.{key}")
        if v < 1:
            raise _fail(f"{p}.{key}", "must be >= 1")
        return v

    return AgentParams(
        learning_rate=_positive(_as_float(d["learning_rate"], f"{p}.learning_rate"),
                                f"{p}.learning_rate"),
        batch_size=posint("batch_size"),
        discount=discount,
        epsilon_start=eps0,
        epsilon_min=eps_min,
        epsilon_decay=decay,
        replay_capacity=posint("replay_capacity"),
        target_update_period=posint("target_update_period"),
        target_update_tau=tau,
        hidden_sizes=hidden,
        ql_learning_rate=_positive(
            _as_float(d["ql_learning_rate"], f"{p}.ql_learning_rate"),
            f"{p}.ql_learning_rate"),
        ql_b_total_bins=posint("ql_b_total_bins"),
        ql_t_total_bins=posint("ql_t_total_bins"),
        ql_t_total_max_s=_positive(
            _as_float(d["ql_t_total_max_s"], f"{p}.ql_t_total_max_s"),
            f"{p}.ql_t_total_max_s"),
        ql_cpu_bins=posint("ql_cpu_bins"),
    )


def _build_campaign(d: Mapping) -> CampaignParams:
    p = "campaign"
    algos = tuple(str(a) for a in _as_seq(d["algorithms"], f"{p}.algorithms"))
    for a in algos:
        if a not in ALGORITHMS:
            raise _fail(f"{p}.algorithms", f"unknown algorithm {a!r}; "
                        f"choose from {', '.join(ALGORITHMS)}")
    if not algos:
        raise _fail(f"{p}.algorithms", "needs at least one algorithm")
    seeds = tuple(_as_int(v, f"{p}.seeds[{i}]")
                  for i, v in enumerate(_as_seq(d["seeds"], f"{p}.seeds")))
    if not seeds:
        raise _fail(f"{p}.seeds", "needs at least one seed")
    sweep_seeds = d["sweep_seeds"]
    if sweep_seeds is not None:
        sweep_seeds = tuple(_as_int(v, f"{p}.sweep_seeds[{i}]")
                            for i, v in enumerate(_as_seq(sweep_seeds,
                                                          f"{p}.sweep_seeds")))
        if not sweep_seeds:
            raise _fail(f"{p}.sweep_seeds", "needs at least one seed when given")
    sweep_ts = tuple(_as_float(v, f"{p}.sweep_t_require_s[{i}]")
                     for i, v in enumerate(_as_seq(d["sweep_t_require_s"],
                                                   f"{p}.sweep_t_require_s")))
    if not sweep_ts or any(t <= 0 for t in sweep_ts):
        raise _fail(f"{p}.sweep_t_require_s", "needs positive deadlines")
    frac = _as_float(d["plateau_fraction"], f"{p}.plateau_fraction")
    if not 0 < frac <= 1:
        raise _fail(f"{p}.plateau_fraction", "must lie in (0, 1]")

    def posint(key):
        v = _as_int(d[key], f"{p}.{key}")
        if v < 1:
            raise _fail(f"{p}.{key}", "must be >= 1")
        return v

    return CampaignParams(
        algorithms=algos,
        episodes=posint("episodes"),
        t_steps=posint("t_steps"),
        split_factor=posint("split_factor"),
        seeds=seeds,
        moving_average_window=posint("moving_average_window"),
        plateau_fraction=frac,
        sweep_t_require_s=sweep_ts,
        sweep_seeds=sweep_seeds,
        workers=posint("workers"),
    )


def config_from_dict(data: Mapping) -> ExperimentConfig:
    """Build a validated config from a nested mapping of every key."""
    override = _as_float(data["t_require_override_s"], "t_require_override_s") \
        if data["t_require_override_s"] is not None else None
    if override is not None and override <= 0:
        raise _fail("t_require_override_s", "must be > 0")
    out_dir = data["output_dir"]
    if not isinstance(out_dir, str) or not out_dir:
        raise _fail("output_dir", "must be a non-empty string")
    return ExperimentConfig(
        system=_build_system(data["system"]),
        sinr=_build_sinr(data["sinr"]),
        reward=_build_reward(data["reward"]),
        agent=_build_agent(data["agent"]),
        campaign=_build_campaign(data["campaign"]),
        t_require_override_s=override,
        output_dir=out_dir,
    )


def load_config(path: str | Path | None = None,
                overrides: Mapping | None = None) -> ExperimentConfig:
    """Load a config file (if any) and merge it over the shipped defaults.

    ``overrides`` is a nested mapping applied on top of the file, used by
    the CLI flags. Raises ConfigError with a dotted field path on any
    unknown key, bad type or out-of-range value.
    """
    merged = asdict(default_config())
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
        if data is None:
            data = {}
        if not isinstance(data, Mapping):
            raise ConfigError("config file must contain a mapping at top level")
        merged = _merge(merged, data)
    if overrides:
        merged = _merge(merged, overrides)
    return config_from_dict(merged)
