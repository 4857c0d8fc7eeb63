"""Scenario configuration: JSON file <-> nested frozen dataclasses."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from navigo_core.core.errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "NAVIGO_OUTPUT_DIR"
COLLISION_MODES = ("ideal", "destructive")


def _require(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(message, key=key)


def _resolve(base_dir: Path, name: str) -> Path:
    path = Path(name)
    return path if path.is_absolute() else base_dir / path


@dataclass(frozen=True)
class GridConfig:
    """
    Geo-area naming grid.

    Attributes:
        tag: Zone/grid tag heading every label
        base_extent_m: Side of the precision-0 square
        precision: Label digits per axis used for GeoFaces
        world_width_m: World bound along x
        world_height_m: World bound along y
    """

    tag: str = "11SLT"
    base_extent_m: float = 200_000.0
    precision: int = 3
    world_width_m: float = 2_100.0
    world_height_m: float = 2_100.0

    def __post_init__(self) -> None:
        _require(1 <= self.precision <= 5, "grid.precision", "must be in [1, 5]")
        _require(self.base_extent_m > 0, "grid.base_extent_m", "must be positive")
        _require(self.world_width_m > 0, "grid.world_width_m", "must be positive")
        _require(self.world_height_m > 0, "grid.world_height_m", "must be positive")


@dataclass(frozen=True)
class RoadConfig:
    lane_weights: dict[str, float] = field(
        default_factory=lambda: {"2": 1.0, "4": 0.7, "6": 0.25}
    )
    fp1_radius_m: float = 10.0
    fp2_radius_m: float = 30.0
    collinearity_tolerance_deg: float = 15.0
    dedup_distance_m: float = 1.0
    trace_tolerance_m: float = 5.0

    def __post_init__(self) -> None:
        _require(
            0 < self.fp1_radius_m < self.fp2_radius_m,
            "road.fp2_radius_m",
            "must exceed fp1_radius_m > 0",
        )
        for lanes, weight in self.lane_weights.items():
            _require(str(lanes).isdigit(), "road.lane_weights", f"bad lane count {lanes!r}")
            _require(weight > 0, f"road.lane_weights.{lanes}", "must be positive")

    def weights_by_lanes(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in self.lane_weights.items()}


@dataclass(frozen=True)
class RadioConfig:
    """
    Broadcast channel.

    Attributes:
        range_m: Unit-disk radio range
        bitrate_bps: Channel bitrate
        corner_mode: Block links that neither share a street nor cut a junction corner
        collision_mode: "ideal" or "destructive"
        carrier_sense: Defer while the medium is busy at the sender (no backoff)
        drop_threshold: MAC queue length at which new frames are dropped
        queue_sample_ms: Queue-depth sampling period
    """

    range_m: float = 250.0
    bitrate_bps: float = 24e6
    corner_mode: bool = True
    collision_mode: str = "ideal"
    carrier_sense: bool = False
    drop_threshold: int = 1000
    queue_sample_ms: float = 100.0

    def __post_init__(self) -> None:
        _require(self.range_m > 0, "radio.range_m", "must be positive")
        _require(self.bitrate_bps > 0, "radio.bitrate_bps", "must be positive")
        _require(
            self.collision_mode in COLLISION_MODES,
            "radio.collision_mode",
            f"must be one of {COLLISION_MODES}",
        )
        _require(self.drop_threshold > 0, "radio.drop_threshold", "must be positive")
        _require(self.queue_sample_ms > 0, "radio.queue_sample_ms", "must be positive")


@dataclass(frozen=True)
class NdnConfig:
    cs_capacity_bytes: int = 10 * 1024**3
    pit_lifetime_ms: float = 4_000.0
    purge_interval_ms: float = 1_000.0

    def __post_init__(self) -> None:
        _require(self.cs_capacity_bytes > 0, "ndn.cs_capacity_bytes", "must be positive")
        _require(self.pit_lifetime_ms > 0, "ndn.pit_lifetime_ms", "must be positive")
        _require(self.purge_interval_ms > 0, "ndn.purge_interval_ms", "must be positive")


@dataclass(frozen=True)
class LalConfig:
    """
    Link Adaptation Layer parameters. Timer values are milliseconds.

    Data timers must stay below every Interest timer and every timer within the hop
    budget; both are checked here.
    """

    data_fp1_ms: float = 1.0
    data_fp2_ms: float = 2.0
    data_per_100m_ms: float = 4.0
    data_jitter_ms: float = 0.5
    data_edge_min_ms: float = 3.0
    data_edge_max_ms: float = 23.0
    data_cap_ms: float = 24.0
    interest_fp1_ms: float = 26.0
    interest_fp2_ms: float = 28.0
    interest_per_100m_ms: float = 1.5
    interest_jitter_ms: float = 1.0
    interest_edge_min_ms: float = 34.0
    interest_edge_max_ms: float = 50.0
    far_threshold_m: float = 500.0
    hop_budget_ms: float = 50.0
    corridor_width_m: float = 20.0
    retries: int = 2
    ack_timeout_ms: float = 74.0
    geoface_idle_s: float = 30.0
    interest_table_size: int = 4096

    def __post_init__(self) -> None:
        _require(self.far_threshold_m > 0, "lal.far_threshold_m", "must be positive")
        interest_min = min(self.interest_fp1_ms, self.interest_fp2_ms, self.interest_edge_min_ms)
        _require(
            self.data_cap_ms < interest_min,
            "lal.data_cap_ms",
            f"largest Data timer {self.data_cap_ms} ms must stay below smallest Interest "
            f"timer {interest_min} ms",
        )
        _require(
            self.data_fp1_ms <= self.data_fp2_ms < self.data_edge_min_ms,
            "lal.data_edge_min_ms",
            "Data bases must satisfy fp1 <= fp2 < edge",
        )
        _require(
            self.interest_fp1_ms <= self.interest_fp2_ms < self.interest_edge_min_ms,
            "lal.interest_edge_min_ms",
            "Interest bases must satisfy fp1 <= fp2 < edge",
        )
        _require(self.data_cap_ms <= self.hop_budget_ms, "lal.data_cap_ms", "exceeds hop budget")
        _require(
            self.interest_edge_min_ms <= self.interest_edge_max_ms <= self.hop_budget_ms,
            "lal.interest_edge_max_ms",
            "edge band must be ordered and within hop_budget_ms",
        )
        _require(
            self.data_edge_min_ms <= self.data_edge_max_ms,
            "lal.data_edge_max_ms",
            "edge band must be ordered",
        )
        _require(self.retries >= 0, "lal.retries", "must be non-negative")
        _require(self.ack_timeout_ms > 0, "lal.ack_timeout_ms", "must be positive")
        _require(self.geoface_idle_s > 0, "lal.geoface_idle_s", "must be positive")
        _require(self.interest_table_size > 0, "lal.interest_table_size", "must be positive")
        _require(self.corridor_width_m >= 0, "lal.corridor_width_m", "must be non-negative")


@dataclass(frozen=True)
class StrategyConfig:
    """
    Attributes:
        exploit_probability: p, chance of using a lone GeoFace instead of flooding
        deadline_ms: T, time a GeoFace has to return Data before it is unbound
    """

    exploit_probability: float = 0.95
    deadline_ms: float = 300.0

    def __post_init__(self) -> None:
        _require(
            0 < self.exploit_probability <= 1, "strategy.exploit_probability", "must be in (0, 1]"
        )
        _require(self.deadline_ms > 0, "strategy.deadline_ms", "must be positive")


@dataclass(frozen=True)
class SessionSpec:
    """A scripted listening session: one song for one vehicle."""

    vehicle: str
    song: int
    start_s: float = 0.0
    prebind_area: str | None = None


@dataclass(frozen=True)
class WorkloadConfig:
    """
    Music-streaming workload.

    Attributes:
        n_songs: Catalog size
        chunks_per_song: Chunks per song
        song_duration_s: Play time of one song
        payload_bytes: Data payload per chunk
        pipeline_limit: Max pending Interests per session
        buffer_ms: Max content buffered ahead of playback
        consumer_fraction: Share of vehicles that stream, drawn by seed
        top_fraction: Popular share of the catalog for Zipf calibration
        top_mass: Request share carried by ``top_fraction``
        zipf_alpha: Fixed exponent; calibrated from top_fraction/top_mass when null
        start_stagger_s: Consumers start uniformly within this window after appearing
        provider: First name component of every chunk
        sessions: Scripted sessions; when present they replace random consumers
    """

    n_songs: int = 100
    chunks_per_song: int = 1700
    song_duration_s: float = 180.0
    payload_bytes: int = 1024
    pipeline_limit: int = 20
    buffer_ms: float = 30_000.0
    consumer_fraction: float = 0.2
    top_fraction: float = 0.12
    top_mass: float = 0.88
    zipf_alpha: float | None = None
    start_stagger_s: float = 5.0
    provider: str = "provider"
    sessions: tuple[SessionSpec, ...] = ()

    def __post_init__(self) -> None:
        _require(self.n_songs >= 1, "workload.n_songs", "must be at least 1")
        _require(self.chunks_per_song >= 1, "workload.chunks_per_song", "must be at least 1")
        _require(self.song_duration_s > 0, "workload.song_duration_s", "must be positive")
        _require(self.payload_bytes > 0, "workload.payload_bytes", "must be positive")
        _require(self.pipeline_limit >= 1, "workload.pipeline_limit", "must be at least 1")
        _require(self.buffer_ms > 0, "workload.buffer_ms", "must be positive")
        _require(
            0 <= self.consumer_fraction <= 1, "workload.consumer_fraction", "must be in [0, 1]"
        )
        _require(0 < self.top_fraction < 1, "workload.top_fraction", "must be in (0, 1)")
        _require(0 < self.top_mass < 1, "workload.top_mass", "must be in (0, 1)")
        _require(
            self.zipf_alpha is None or self.zipf_alpha > 0,
            "workload.zipf_alpha",
            "must be positive",
        )
        _require(self.start_stagger_s >= 0, "workload.start_stagger_s", "must be non-negative")
        _require(bool(self.provider) and "/" not in self.provider, "workload.provider", "bad")
        for spec in self.sessions:
            _require(0 <= spec.song < self.n_songs, "workload.sessions", "song out of catalog")

    @property
    def chunk_play_ms(self) -> float:
        return self.song_duration_s * 1000.0 / self.chunks_per_song


@dataclass(frozen=True)
class RsuConfig:
    """Static roadside unit with a wired link to the origin server."""

    rsu_id: str
    x: float
    y: float
    backhaul_latency_ms: float = 20.0
    backhaul_bps: float = 100e6


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "output"
    write_events: bool = True
    write_series: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    """
    One simulation scenario.

    Attributes:
        name: Scenario name, used in output file names
        seed: Seed of the single run-wide random generator
        duration_s: Simulated horizon
        strategy_name: Registered forwarding strategy
        road_file: Road CSV, resolved against the config file's directory
        trace_file: Mobility trace (CSV or SUMO FCD XML)
    """

    name: str = "scenario"
    seed: int = 1
    duration_s: float = 300.0
    strategy_name: str = "navigo"
    road_file: str = "roads.csv"
    trace_file: str = "trace.csv"
    grid: GridConfig = field(default_factory=GridConfig)
    road: RoadConfig = field(default_factory=RoadConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    ndn: NdnConfig = field(default_factory=NdnConfig)
    lal: LalConfig = field(default_factory=LalConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    rsus: tuple[RsuConfig, ...] = ()
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self) -> None:
        _require(self.duration_s > 0, "duration_s", "must be positive")
        ids = [r.rsu_id for r in self.rsus]
        _require(len(ids) == len(set(ids)), "rsus", "duplicate rsu_id")

    def road_path(self, base_dir: Path) -> Path:
        return _resolve(base_dir, self.road_file)

    def trace_path(self, base_dir: Path) -> Path:
        return _resolve(base_dir, self.trace_file)

    def output_dir(self, base_dir: Path) -> Path:
        env = os.environ.get(OUTPUT_DIR_ENV)
        return Path(env) if env else _resolve(base_dir, self.output.dir)


class ConfigService:
    """
    Loads, validates, overrides and saves scenario files.

    Unknown keys are logged and ignored, missing keys take their defaults, and
    invalid values raise ConfigError naming the dotted key.
    """

    DEFAULT_CONFIG = ScenarioConfig()

    def __init__(self, config_path: Path) -> None:
        self.config_path = Path(config_path)
        logger.debug(f"ConfigService initialized with path: {self.config_path}")

    @property
    def base_dir(self) -> Path:
        return self.config_path.resolve().parent

    def load_config(self, overrides: dict[str, Any] | None = None) -> ScenarioConfig:
        """
        Read the scenario file and apply dotted-key overrides.

        Raises:
            ConfigError: If the file is missing, not JSON, or holds invalid values
        """
        if not self.config_path.exists():
            raise ConfigError(f"Config file not found: {self.config_path}")
        try:
            with open(self.config_path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in {self.config_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("Top level of a scenario must be an object")
        for key, value in (overrides or {}).items():
            apply_override(data, key, value)
        config = self._validate_and_create_config(data)
        logger.info(f"Scenario '{config.name}' loaded from {self.config_path}")
        return config

    def save_config(self, config: ScenarioConfig) -> None:
        """Write ``config`` as pretty UTF-8 JSON, creating parent directories."""
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, "w", encoding="utf-8") as f:
            json.dump(config_to_dict(config), f, indent=2, ensure_ascii=False)
            f.write("\n")
        logger.info(f"Configuration saved to {self.config_path}")

    def _validate_and_create_config(self, data: dict[str, Any]) -> ScenarioConfig:
        return _build(ScenarioConfig, data, prefix="")

    def get_default_config(self) -> ScenarioConfig:
        return self.DEFAULT_CONFIG


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    data = dataclasses.asdict(config)
    data["rsus"] = [dict(r) for r in data["rsus"]]
    data["workload"]["sessions"] = [dict(s) for s in data["workload"]["sessions"]]
    return data


def parse_override(text: str) -> tuple[str, Any]:
    """
    Split ``section.key=value``; the value is read as JSON, else kept as a string.

    Raises:
        ConfigError: If there is no ``=`` or the key is empty
    """
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"Override must look like section.key=value: {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def apply_override(data: dict[str, Any], dotted_key: str, value: Any) -> None:
    parts = dotted_key.split(".")
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError("is not a section", key=".".join(parts[:-1]))
        node = child
    node[parts[-1]] = value


def _build(cls: type[Any], data: Any, prefix: str) -> Any:
    if not isinstance(data, dict):
        raise ConfigError("must be an object", key=prefix.rstrip(".") or None)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for unknown in sorted(set(data) - names):
        logger.warning(f"Ignoring unknown config key: {prefix}{unknown}")
    kwargs: dict[str, Any] = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        kwargs[f.name] = _coerce(data[f.name], hints[f.name], f"{prefix}{f.name}")
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(str(e), key=prefix.rstrip(".") or None) from e


def _coerce(value: Any, hint: Any, key: str) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is typing.Union or type(hint).__name__ == "UnionType":
        if value is None and type(None) in args:
            return None
        inner = next(a for a in args if a is not type(None))
        return _coerce(value, inner, key)
    if dataclasses.is_dataclass(hint):
        return _build(hint, value, prefix=f"{key}.")
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError("must be a list", key=key)
        return tuple(_coerce(v, args[0], f"{key}[{i}]") for i, v in enumerate(value))
    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigError("must be an object", key=key)
        return {str(k): _coerce(v, args[1], f"{key}.{k}") for k, v in value.items()}
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"must be true or false, got {value!r}", key=key)
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int | float) or value != int(value):
            raise ConfigError(f"must be an integer, got {value!r}", key=key)
        return int(value)
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise ConfigError(f"must be a number, got {value!r}", key=key)
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"must be a string, got {value!r}", key=key)
        return value
    return value
