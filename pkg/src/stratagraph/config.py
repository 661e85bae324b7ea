"""Engine configuration shared by the chain, defense, and simulation engines."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .model import ConfigError

SEMANTICS_MODES = ("accumulated", "strict")
THREAT_AGGREGATIONS = ("sum", "max")
BUDGET_OBJECTIVES = ("threat", "count")


@dataclass(frozen=True)
class EngineConfig:
    # Chain semantics: "accumulated" keeps every grant won so far; "strict"
    # checks each condition against the entry grants plus the single pair
    # granted by the previous edge.
    semantics: str = "accumulated"
    max_len: int = 8
    threat_agg: str = "sum"
    budget_objective: str = "threat"
    # Above these sizes the defense planners switch from exact search to greedy.
    exact_defense_limit: int = 20
    exact_chain_limit: int = 64
    derived_detect_prob: float = 1.0
    survivor_sample: int = 5

    def check(self) -> "EngineConfig":
        if self.semantics not in SEMANTICS_MODES:
            raise ConfigError(f"semantics must be one of {SEMANTICS_MODES}, got {self.semantics!r}")
        if self.threat_agg not in THREAT_AGGREGATIONS:
            raise ConfigError(f"threat_agg must be one of {THREAT_AGGREGATIONS}, got {self.threat_agg!r}")
        if self.budget_objective not in BUDGET_OBJECTIVES:
            raise ConfigError(f"budget_objective must be one of {BUDGET_OBJECTIVES}, got {self.budget_objective!r}")
        if not isinstance(self.max_len, int) or self.max_len < 1:
            raise ConfigError(f"max_len must be a positive integer, got {self.max_len!r}")
        if not 0.0 <= float(self.derived_detect_prob) <= 1.0:
            raise ConfigError(f"derived_detect_prob must lie in [0,1], got {self.derived_detect_prob!r}")
        if self.exact_defense_limit < 0 or self.exact_chain_limit < 0 or self.survivor_sample < 0:
            raise ConfigError("limits must be non-negative")
        return self


DEFAULT_CONFIG = EngineConfig()

_FIELDS = set(EngineConfig.__dataclass_fields__)


def config_from_dict(data: dict) -> EngineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        cfg = replace(DEFAULT_CONFIG, **data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.check()


def load_config(path: str | Path) -> EngineConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
