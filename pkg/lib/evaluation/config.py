"""
Run configuration loading and saving.

Config files are flat ``key = value`` text, one key per line, ``#`` starts a
comment. Vectors are comma-separated numbers; lists of vectors separate the
vectors with ``;``. Files ending in .json or .yaml/.yml hold the same keys as a
flat mapping.

Keys
----
Run:       profile, modes, realizations, seed, output_dir, workers
Scenario:  anchors, passive_tx_anchor, passive_include_self_pair, num_steps,
           dt, semi_axes, extent_scale, bias, olos_window, ref_amplitude_db,
           beta_active, beta_passive, passive_offset_db, gamma, mu_meas,
           mu_clutter, d_max, rolloff, bandwidth_hz, waypoints, speed,
           distance_noise, fading_std_db
Filter:    particles, accel_std, bias_std, ess_threshold, jitter_std,
           prior_position_std, prior_velocity_std, prior_bias_std,
           detection_probability, ut_alpha, ut_beta, ut_kappa, min_speed,
           divergence_threshold_m, regularization, tempering_stages

Anchors are numbered 1..J in the order listed.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import yaml

from lib.data.schemas import Anchor
from lib.likelihood.association import EstimatorMode
from lib.simulation.config import ScenarioConfig
from lib.tracking.tracker import FilterConfig

logger = logging.getLogger(__name__)

PROFILES: Dict[str, Dict[str, int]] = {
    "full": {"realizations": 500, "particles": 5000},
    "desk": {"realizations": 50, "particles": 2000},
}

ALL_MODES: Tuple[EstimatorMode, ...] = (
    EstimatorMode.A_PDA,
    EstimatorMode.A_EOPDA,
    EstimatorMode.AP_EOPDA,
)


class ConfigError(ValueError):
    """Invalid configuration entry."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = f"line {line}: " if line is not None else ""
        prefix = f"{key}: " if key else ""
        super().__init__(f"{location}{prefix}{message}")
        self.key = key
        self.line = line


@dataclass
class RunSpec:
    """Full Monte Carlo experiment specification."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    modes: Tuple[EstimatorMode, ...] = ALL_MODES
    realizations: int = 500
    base_seed: int = 0
    output_dir: Path = Path("outputs")
    workers: int = 1
    profile: str = "full"

    def __post_init__(self):
        self.modes = tuple(EstimatorMode.parse(m) for m in self.modes)
        self.output_dir = Path(self.output_dir)
        if self.realizations < 1:
            raise ValueError(f"realizations must be at least 1, got {self.realizations}")
        if not self.modes:
            raise ValueError("modes must not be empty")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"modes must not repeat, got {[m.value for m in self.modes]}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        if not 0 <= self.base_seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.base_seed}")


# Parsers accept text (key = value files) or native values (JSON/YAML).

def _number_list(value: Any) -> List[float]:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        return [float(p) for p in parts]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(value)]


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "yes", "on", "1"):
        return True
    if text in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _parse_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    number = float(str(value).strip())
    if not number.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(number)


def _parse_float(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    return float(str(value).strip()) if isinstance(value, str) else float(value)


def _vector(size: Optional[int]) -> Callable[[Any], Tuple[float, ...]]:
    def parse(value: Any) -> Tuple[float, ...]:
        numbers = _number_list(value)
        if size is not None and len(numbers) != size:
            raise ValueError(f"expected {size} numbers, got {len(numbers)}")
        return tuple(numbers)
    return parse


def _int_vector(size: Optional[int]) -> Callable[[Any], Tuple[int, ...]]:
    def parse(value: Any) -> Tuple[int, ...]:
        numbers = tuple(_parse_int(v) for v in _number_list(value))
        if size is not None and len(numbers) != size:
            raise ValueError(f"expected {size} integers, got {len(numbers)}")
        return numbers
    return parse


def _point_list(value: Any) -> Tuple[Tuple[float, float], ...]:
    if isinstance(value, str):
        chunks = [c for c in value.split(";") if c.strip()]
    else:
        chunks = list(value)
    return tuple(_vector(2)(chunk) for chunk in chunks)


def _modes(value: Any) -> Tuple[EstimatorMode, ...]:
    items = value.split(",") if isinstance(value, str) else list(value)
    return tuple(EstimatorMode.parse(item) for item in items if str(item).strip())


def _text(value: Any) -> str:
    return str(value).strip()


# key -> (section, field name, parser); section "run" fields live on RunSpec.
_KEYS: Dict[str, Tuple[str, str, Callable[[Any], Any]]] = {
    "profile": ("run", "profile", _text),
    "modes": ("run", "modes", _modes),
    "realizations": ("run", "realizations", _parse_int),
    "seed": ("run", "base_seed", _parse_int),
    "output_dir": ("run", "output_dir", _text),
    "workers": ("run", "workers", _parse_int),
    "anchors": ("scenario", "anchors", _point_list),
    "passive_tx_anchor": ("scenario", "passive_tx_anchor_ids", _int_vector(None)),
    "passive_include_self_pair": ("scenario", "passive_include_self_pair", _parse_bool),
    "num_steps": ("scenario", "num_steps", _parse_int),
    "dt": ("scenario", "dt", _parse_float),
    "semi_axes": ("scenario", "semi_axes", _vector(2)),
    "extent_scale": ("scenario", "extent_scale", _parse_float),
    "bias": ("scenario", "bias", _vector(2)),
    "olos_window": ("scenario", "olos_window", _int_vector(2)),
    "ref_amplitude_db": ("scenario", "ref_amplitude_db", _parse_float),
    "beta_active": ("scenario", "beta_active", _parse_float),
    "beta_passive": ("scenario", "beta_passive", _parse_float),
    "passive_offset_db": ("scenario", "passive_offset_db", _parse_float),
    "gamma": ("scenario", "gamma", _parse_float),
    "mu_meas": ("scenario", "mu_meas", _parse_float),
    "mu_clutter": ("scenario", "mu_clutter", _parse_float),
    "d_max": ("scenario", "d_max", _parse_float),
    "rolloff": ("scenario", "rolloff", _parse_float),
    "bandwidth_hz": ("scenario", "bandwidth_hz", _parse_float),
    "waypoints": ("scenario", "waypoints", _point_list),
    "speed": ("scenario", "speed", _parse_float),
    "distance_noise": ("scenario", "distance_noise", _parse_bool),
    "fading_std_db": ("scenario", "fading_std_db", _parse_float),
    "particles": ("filter", "num_particles", _parse_int),
    "accel_std": ("filter", "accel_std", _parse_float),
    "bias_std": ("filter", "bias_std", _parse_float),
    "ess_threshold": ("filter", "ess_threshold", _parse_float),
    "jitter_std": ("filter", "jitter_std", _vector(6)),
    "prior_position_std": ("filter", "prior_position_std", _parse_float),
    "prior_velocity_std": ("filter", "prior_velocity_std", _parse_float),
    "prior_bias_std": ("filter", "prior_bias_std", _parse_float),
    "detection_probability": ("filter", "detection_probability", _parse_float),
    "ut_alpha": ("filter", "ut_alpha", _parse_float),
    "ut_beta": ("filter", "ut_beta", _parse_float),
    "ut_kappa": ("filter", "ut_kappa", _parse_float),
    "min_speed": ("filter", "min_speed", _parse_float),
    "divergence_threshold_m": ("filter", "divergence_threshold_m", _parse_float),
    "regularization": ("filter", "regularization", _parse_bool),
    "tempering_stages": ("filter", "tempering_stages", _parse_int),
}


def _read_entries(path: Path) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """Raw key -> value mapping plus the line of each key (text files only)."""
    suffix = path.suffix.lower()
    text = path.read_text()

    if suffix in (".json", ".yaml", ".yml"):
        try:
            data = json.loads(text) if suffix == ".json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as error:
            raise ConfigError(f"cannot parse {path}: {error}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must hold a flat mapping of keys")
        return dict(data), {}

    entries: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise ConfigError("duplicate key", key=key, line=number)
        entries[key] = value
        lines[key] = number
    return entries, lines


def build_run_spec(entries: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> RunSpec:
    """
    Validate raw entries into a RunSpec, filling defaults from the profile.

    Args:
        entries: Key -> raw value
        lines: Key -> 1-based line number, for error messages

    Returns:
        Validated run specification
    """
    lines = lines or {}
    sections: Dict[str, Dict[str, Any]] = {"run": {}, "scenario": {}, "filter": {}}
    owners: Dict[str, str] = {}

    for key, raw in entries.items():
        if key not in _KEYS:
            raise ConfigError("unknown key", key=key, line=lines.get(key))
        section, name, parse = _KEYS[key]
        try:
            sections[section][name] = parse(raw)
        except (TypeError, ValueError) as error:
            raise ConfigError(f"invalid value {raw!r} ({error})", key=key, line=lines.get(key)) from None
        owners[name] = key

    profile = sections["run"].get("profile", "full")
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}", key="profile", line=lines.get("profile"))
    sections["run"].setdefault("realizations", PROFILES[profile]["realizations"])
    sections["filter"].setdefault("num_particles", PROFILES[profile]["particles"])

    scenario_values = sections["scenario"]
    if "anchors" in scenario_values:
        # Without an explicit transmitter the last anchor transmits.
        scenario_values.setdefault("passive_tx_anchor_ids", (len(scenario_values["anchors"]),))
        scenario_values["anchors"] = tuple(
            Anchor(id=index, position=point)
            for index, point in enumerate(scenario_values["anchors"], start=1)
        )

    try:
        scenario = ScenarioConfig(**scenario_values)
        filter_config = FilterConfig(**sections["filter"])
        return RunSpec(scenario=scenario, filter=filter_config, **sections["run"])
    except ValueError as error:
        key = _blame(str(error), owners)
        raise ConfigError(str(error), key=key, line=lines.get(key) if key else None) from None


def _blame(message: str, owners: Dict[str, str]) -> Optional[str]:
    """Config key whose field is named in a validation message."""
    for name, key in owners.items():
        if message.startswith(name) or f" {name} " in f" {message} ":
            return key
    for key in owners.values():
        if key in message:
            return key
    return None


def load_config(path, profile: Optional[str] = None) -> RunSpec:
    """
    Load and validate a run configuration.

    Args:
        path: Config file (.conf/.txt key = value, .json or .yaml)
        profile: Preset replacing the file's profile key; like the file's
            own profile it only fills realizations and particles the file
            leaves unset

    Returns:
        RunSpec with published-scale defaults for missing keys
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    entries, lines = _read_entries(path)
    if profile is not None:
        entries["profile"] = profile
        lines.pop("profile", None)
    spec = build_run_spec(entries, lines)
    logger.info(f"Loaded config {path} ({len(entries)} keys, profile {spec.profile})")
    return spec


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        if value and isinstance(value[0], (list, tuple)):
            return "; ".join(_format(v) for v in value)
        if value and isinstance(value[0], EstimatorMode):
            return ", ".join(m.value for m in value)
        return ", ".join(_format(v) for v in value)
    return str(value)


def spec_entries(spec: RunSpec) -> Dict[str, str]:
    """Every config key of a spec, formatted for a key = value file."""
    values = {
        "run": {f.name: getattr(spec, f.name) for f in fields(spec)},
        "scenario": asdict(spec.scenario),
        "filter": asdict(spec.filter),
    }
    values["scenario"]["anchors"] = tuple(a.position for a in spec.scenario.anchors)
    entries = {}
    for key, (section, name, _) in _KEYS.items():
        entries[key] = _format(values[section][name])
    return entries


def save_config(spec: RunSpec, path) -> Path:
    """Write a spec as a key = value file that load_config reads back."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "\n".join(f"{key} = {value}" for key, value in spec_entries(spec).items())
    path.write_text(body + "\n")
    return path
