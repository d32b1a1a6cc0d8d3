"""Run configuration: defaults, INI config file, then command-line overrides.

The config file is a plain INI document. Section and key names mirror the
``dest`` names used by :meth:`RunConfig.from_sources`, e.g.::

    [ingest]
    tau_down = 0.5

    [scoring]
    tau_up = 0.95
    alpha = 0.1
    sigma = 0.1
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .baselines import ClodConfig, MapConfig, TileConfig
from .dataset import IngestConfig
from .geometry import SimilarityParams
from .injector import InjectionSpec
from .objectlab import ScoringConfig

__all__ = ["RunConfig", "ConfigError", "CONFIG_KEYS"]


class ConfigError(ValueError):
    pass


# section -> key -> parser
CONFIG_KEYS: dict[str, dict[str, Any]] = {
    "ingest": {"tau_down": float, "clip_boxes": "bool"},
    "scoring": {
        "alpha": float,
        "sigma": float,
        "tau_up": float,
        "softmin_temperature": float,
        "overlooked_mode": str,
    },
    "map": {"iou_thresholds": "floats", "interpolation_points": int},
    "tile": {"grid_size": int, "overlap_threshold": float, "background_prior_weight": float},
    "clod": {"linkage_cutoff": float},
    "injection": {
        "image_fraction": float,
        "drop_prob": float,
        "swap_prob": float,
        "shift_prob": float,
        "shift_range": "floats",
        "seed": int,
        "forbid_empty": "bool",
    },
}


def _parse(kind: Any, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {raw!r}")
    if kind == "floats":
        return tuple(float(v) for v in raw.replace(",", " ").split())
    return kind(raw)


@dataclass(frozen=True)
class RunConfig:
    ingest: IngestConfig = field(default_factory=IngestConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    map: MapConfig = field(default_factory=MapConfig)
    tile: TileConfig = field(default_factory=TileConfig)
    clod: ClodConfig = field(default_factory=ClodConfig)
    injection: InjectionSpec = field(default_factory=InjectionSpec)

    def __post_init__(self) -> None:
        if not self.ingest.tau_down < self.scoring.tau_up:
            raise ConfigError(f"tau_down ({self.ingest.tau_down}) must be below tau_up ({self.scoring.tau_up})")

    def to_dict(self) -> dict[str, Any]:
        s = self.scoring
        return {
            "ingest": asdict(self.ingest),
            "scoring": {
                "alpha": s.similarity.alpha,
                "sigma": s.similarity.sigma,
                "tau_up": s.tau_up,
                "softmin_temperature": s.softmin_temperature,
                "overlooked_mode": s.overlooked_mode,
            },
            "map": {"iou_thresholds": list(self.map.iou_thresholds),
                    "interpolation_points": self.map.interpolation_points},
            "tile": asdict(self.tile),
            "clod": asdict(self.clod),
            "injection": self.injection.to_dict(),
        }

    @classmethod
    def from_dict(cls, values: Mapping[str, Mapping[str, Any]]) -> "RunConfig":
        """Build from nested ``{section: {key: value}}``; missing keys keep defaults."""
        flat = cls().to_dict()
        for section, items in values.items():
            if section not in CONFIG_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in items.items():
                if key not in CONFIG_KEYS[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                try:
                    flat[section][key] = _parse(CONFIG_KEYS[section][key], raw)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"{section}.{key}: {exc}") from exc
        try:
            sc = flat["scoring"]
            inj = dict(flat["injection"])
            inj["shift_range"] = tuple(inj["shift_range"])
            if len(inj["shift_range"]) != 2:
                raise ConfigError("injection.shift_range needs two values")
            return cls(
                ingest=IngestConfig(**flat["ingest"]),
                scoring=ScoringConfig(
                    similarity=SimilarityParams(sc["alpha"], sc["sigma"]),
                    tau_up=sc["tau_up"],
                    softmin_temperature=sc["softmin_temperature"],
                    overlooked_mode=sc["overlooked_mode"],
                ),
                map=MapConfig(tuple(flat["map"]["iou_thresholds"]), flat["map"]["interpolation_points"]),
                tile=TileConfig(**flat["tile"]),
                clod=ClodConfig(**flat["clod"]),
                injection=InjectionSpec(**inj),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_sources(
        cls, path: str | Path | None = None, overrides: Mapping[str, Mapping[str, Any]] | None = None
    ) -> "RunConfig":
        """Defaults, then the INI file at ``path``, then ``overrides``."""
        merged: dict[str, dict[str, Any]] = {}
        if path is not None:
            parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
            try:
                with open(path, encoding="utf-8") as fh:
                    parser.read_file(fh)
            except configparser.Error as exc:
                raise ConfigError(f"{path}: {exc}") from exc
            for section in parser.sections():
                merged[section] = dict(parser[section])
        for section, items in (overrides or {}).items():
            merged.setdefault(section, {}).update({k: v for k, v in items.items() if v is not None})
        return cls.from_dict(merged)
