"""Scenario configuration and the flat ``key = value`` file format."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

ARCHITECTURES = ("fpfa", "pfa", "fixed")
SWEEP_AXES = {
    "transmit_power": "tx_power_dbm",
    "user_count": "n_users",
    "antenna_count": "n_antennas",
}


class ConfigError(ValueError):
    """Raised for invalid or inconsistent scenario parameters."""


@dataclass(frozen=True)
class ScenarioConfig:
    # carriers and antennas
    bands_ghz: tuple[float, ...] = (270.0, 300.0, 330.0, 360.0)
    bandwidth_fraction: float = 0.1
    n_antennas: int = 128
    n_users: int = 60
    n_ports: int = 500
    port_line_length: float = 15.0  # in wavelengths of the PFA's own band
    tx_power_dbm: float = 20.0
    # geometry
    r_min: float = 1.0
    r_max: float = 25.0
    sector_deg: float = 120.0
    h_bs: float = 20.0
    h_ue: float = 1.5
    n_paths: int = 2
    reflection_mag: float = 0.5
    reflection_phase_deg: float = 180.0
    link_gain_db: float = 70.0  # lumped antenna/link-budget gain on every path
    # receiver
    noise_figure_db: float = 7.0
    temperature_k: float = 290.0
    # algorithms
    pfa_band_index: int = 1
    alloc_band_index: int = 0
    user_order: str = "norm"
    port_metric: str = "residual"
    # Monte Carlo
    arch: tuple[str, ...] = ARCHITECTURES
    drops: int = 150
    seed: int = 0
    workers: int = 1
    sweep: str = "user_count"
    sweep_values: tuple[float, ...] = (16.0, 32.0, 48.0, 64.0)
    plots: bool = True

    def __post_init__(self) -> None:
        self.validate()

    @property
    def n_bands(self) -> int:
        return len(self.bands_ghz)

    @property
    def tx_power_w(self) -> float:
        return 10 ** (self.tx_power_dbm / 10) / 1000

    def rf_chains(self, arch: str) -> int:
        """RF chains per band: U/K for FPFA (rounded up), U for the baselines."""
        if arch == "fpfa":
            return math.ceil(self.n_users / self.n_bands)
        return self.n_users

    def validate(self) -> None:
        if not self.bands_ghz:
            raise ConfigError("at least one band is required")
        if any(f <= 0 for f in self.bands_ghz):
            raise ConfigError("band frequencies must be positive")
        if not 0 < self.bandwidth_fraction < 2:
            raise ConfigError("bandwidth_fraction must lie in (0, 2)")
        centers = sorted(self.bands_ghz)
        half = self.bandwidth_fraction / 2
        for lo_c, hi_c in zip(centers, centers[1:]):
            # the default 300/330 GHz pair shares 1.5 GHz of band edge; only
            # a carrier falling inside its neighbour's band is rejected
            if hi_c * (1 - half) <= lo_c or lo_c * (1 + half) >= hi_c:
                raise ConfigError(f"bands at {lo_c} and {hi_c} GHz overlap past their carriers")
            if hi_c * (1 - half) < lo_c * (1 + half):
                log.debug("band edges of %s and %s GHz overlap", lo_c, hi_c)
        if self.n_users <= 0:
            raise ConfigError("n_users must be positive")
        if self.n_antennas <= 0 or self.n_antennas % self.n_bands:
            raise ConfigError("n_antennas must be a positive multiple of the band count")
        if self.n_ports < 1:
            raise ConfigError("n_ports must be >= 1")
        if self.port_line_length < 0:
            raise ConfigError("port_line_length must be non-negative")
        if not 0 < self.r_min < self.r_max:
            raise ConfigError("need 0 < r_min < r_max")
        if not 0 < self.sector_deg <= 360:
            raise ConfigError("sector_deg must lie in (0, 360]")
        if self.h_bs <= 0 or self.h_ue <= 0 or self.h_ue >= self.h_bs:
            raise ConfigError("need 0 < h_ue < h_bs")
        if self.n_paths not in (1, 2):
            raise ConfigError("n_paths must be 1 (LoS) or 2 (LoS + ground reflection)")
        if self.reflection_mag < 0:
            raise ConfigError("reflection_mag must be non-negative")
        if not 0 <= self.pfa_band_index < self.n_bands:
            raise ConfigError("pfa_band_index out of range")
        if not 0 <= self.alloc_band_index < self.n_bands:
            raise ConfigError("alloc_band_index out of range")
        if self.user_order not in ("norm", "index"):
            raise ConfigError("user_order must be 'norm' or 'index'")
        if self.port_metric not in ("projection", "normalized", "residual"):
            raise ConfigError("port_metric must be 'projection', 'normalized' or 'residual'")
        unknown = set(self.arch) - set(ARCHITECTURES)
        if unknown or not self.arch:
            raise ConfigError(f"unknown architecture(s): {sorted(unknown)}")
        if self.drops < 1:
            raise ConfigError("drops must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.sweep not in SWEEP_AXES:
            raise ConfigError(f"sweep must be one of {sorted(SWEEP_AXES)}")
        for arch in self.arch:
            if self.rf_chains(arch) > self.n_antennas // (self.n_bands if arch == "fpfa" else 1):
                raise ConfigError(f"{arch}: more RF chains than antennas per subarray")

    def at_sweep_point(self, value: float) -> ScenarioConfig:
        name = SWEEP_AXES[self.sweep]
        return replace(self, **{name: _coerce(name, value)})

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(name: str, raw: Any) -> Any:
    kind = _FIELD_TYPES[name]
    if not isinstance(raw, str):
        if kind == "int":
            if float(raw) != int(raw):
                raise ConfigError(f"{name} must be an integer, got {raw}")
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    text = raw.strip()
    try:
        if kind == "int":
            return int(float(text)) if float(text).is_integer() else _bad(name, text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            return _bad(name, text)
        if kind == "str":
            return text.strip("\"'")
        if kind == "tuple[float, ...]":
            return tuple(float(x) for x in text.strip("[]()").split(",") if x.strip())
        if kind == "tuple[str, ...]":
            return tuple(x.strip().strip("\"'") for x in text.strip("[]()").split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {text!r}") from exc
    raise ConfigError(f"unsupported field type for {name}")


def _bad(name: str, text: str) -> Any:
    raise ConfigError(f"bad value for {name}: {text!r}")


def parse_overrides(pairs: dict[str, Any]) -> dict[str, Any]:
    out = {}
    for key, raw in pairs.items():
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key: {key}")
        out[name] = _coerce(name, raw)
    return out


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are rejected."""
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        pairs[key] = value
    return parse_overrides(pairs)


def load_config(path: str | Path | None = None, **overrides: Any) -> ScenarioConfig:
    values: dict[str, Any] = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    values.update(parse_overrides(overrides))
    return ScenarioConfig(**values)


def config_from_dict(values: dict[str, Any]) -> ScenarioConfig:
    return ScenarioConfig(**parse_overrides(values))


__all__ = [
    "ARCHITECTURES",
    "SWEEP_AXES",
    "ConfigError",
    "ScenarioConfig",
    "config_from_dict",
    "load_config",
    "parse_config_text",
]
