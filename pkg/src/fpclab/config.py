"""Experiment configuration: validated construction and JSON round-trip.

Config files are JSON with the field names used here verbatim; unknown keys
fail validation outright so a typo can never silently change a run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .accumulate import PRECISIONS, AccumulationStrategy
from .errors import ConfigError, ParameterError
from .experiments import DEFAULT_F_GRID, DEFAULT_K, DEFAULT_NUMERICAL_CONFIGS, DEFAULT_R
from .population import PopulationSpec, pop_a_spec, spec_from_dict
from .theory import RegimeThresholds

_ALLOWED_KEYS = {
    "population",
    "f_grid",
    "R",
    "K",
    "strategies",
    "base_seed",
    "output_dir",
    "thresholds",
}
_THRESHOLD_KEYS = {"classical_max_f", "floor_margin"}
_MAX_U64 = 2**64 - 1


@dataclass
class ExperimentConfig:
    """Everything a full run needs; deterministic output is a function of this."""

    population: PopulationSpec | str = field(default_factory=pop_a_spec)
    f_grid: tuple[float, ...] = DEFAULT_F_GRID
    R: int = DEFAULT_R
    K: int = DEFAULT_K
    strategies: tuple[tuple[AccumulationStrategy, str], ...] = DEFAULT_NUMERICAL_CONFIGS
    base_seed: int = 1
    output_dir: str = "fpclab_out"
    thresholds: RegimeThresholds = field(default_factory=RegimeThresholds)

    def __post_init__(self):
        self.f_grid = tuple(float(f) for f in self.f_grid)
        if len(self.f_grid) == 0:
            raise ConfigError("f_grid must be non-empty")
        for f in self.f_grid:
            if not (0.0 < f <= 1.0):
                raise ConfigError(f"every f in f_grid must be in (0, 1], got {f}")
        if any(b <= a for a, b in zip(self.f_grid, self.f_grid[1:])):
            raise ConfigError("f_grid must be strictly ascending")
        if not (isinstance(self.R, int) and self.R >= 2):
            raise ConfigError("R must be an integer >= 2")
        if not (isinstance(self.K, int) and self.K >= 2):
            raise ConfigError("K must be an integer >= 2")
        self.strategies = tuple((s, p) for s, p in self.strategies)
        if len(self.strategies) == 0:
            raise ConfigError("strategies must be non-empty")
        for strategy, precision in self.strategies:
            if not isinstance(strategy, AccumulationStrategy):
                raise ConfigError("strategies must pair AccumulationStrategy with a precision")
            if precision not in PRECISIONS:
                raise ConfigError(f"precision must be one of {PRECISIONS}, got {precision!r}")
        if not (isinstance(self.base_seed, int) and 0 <= self.base_seed <= _MAX_U64):
            raise ConfigError("base_seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        population = (
            self.population
            if isinstance(self.population, str)
            else self.population.to_dict()
        )
        return {
            "population": population,
            "f_grid": list(self.f_grid),
            "R": self.R,
            "K": self.K,
            "strategies": [[s.token(), p] for s, p in self.strategies],
            "base_seed": self.base_seed,
            "output_dir": self.output_dir,
            "thresholds": {
                "classical_max_f": self.thresholds.classical_max_f,
                "floor_margin": self.thresholds.floor_margin,
            },
        }


def config_from_dict(d: Mapping[str, Any]) -> ExperimentConfig:
    unknown = set(d) - _ALLOWED_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    try:
        if "population" in d:
            pop = d["population"]
            if isinstance(pop, str):
                kwargs["population"] = pop
            elif isinstance(pop, Mapping):
                kwargs["population"] = spec_from_dict(pop)
            else:
                raise ConfigError("population must be a spec object or a file path")
        if "f_grid" in d:
            kwargs["f_grid"] = tuple(d["f_grid"])
        if "R" in d:
            kwargs["R"] = int(d["R"])
        if "K" in d:
            kwargs["K"] = int(d["K"])
        if "strategies" in d:
            pairs = []
            for entry in d["strategies"]:
                if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
                    raise ConfigError(
                        "each strategies entry must be [strategy_token, precision]"
                    )
                pairs.append((AccumulationStrategy.parse(str(entry[0])), str(entry[1])))
            kwargs["strategies"] = tuple(pairs)
        if "base_seed" in d:
            kwargs["base_seed"] = int(d["base_seed"])
        if "output_dir" in d:
            kwargs["output_dir"] = str(d["output_dir"])
        if "thresholds" in d:
            t = dict(d["thresholds"])
            bad = set(t) - _THRESHOLD_KEYS
            if bad:
                raise ConfigError(f"unknown thresholds keys {sorted(bad)}")
            kwargs["thresholds"] = RegimeThresholds(
                classical_max_f=float(t.get("classical_max_f", 0.1)),
                floor_margin=float(t.get("floor_margin", 10.0)),
            )
    except (ParameterError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kwargs)


def config_from_json_file(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(data)
