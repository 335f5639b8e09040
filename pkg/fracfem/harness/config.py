from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

from fracfem.core.analysis import MAX_LEVEL, METHODS, MIN_LEVEL, PROJECTIONS, default_projection
from fracfem.core.exact_solutions import EXAMPLES, InitialData
from fracfem.core.exceptions import ConfigError

FORMATS = ("csv", "markdown")


def parse_levels(value: Any) -> tuple[int, ...]:
    """Levels from "3:7" (inclusive), a single int or a list of ints."""
    if isinstance(value, str):
        s = value.strip()
        try:
            if ":" in s:
                lo, hi = s.split(":", 1)
                lo_i, hi_i = int(lo), int(hi)
                if hi_i < lo_i:
                    raise ConfigError("levels", f"empty range '{s}'")
                return tuple(range(lo_i, hi_i + 1))
            return (int(s),)
        except ValueError as e:
            raise ConfigError("levels", f"cannot parse '{s}'") from e
    if isinstance(value, bool):
        raise ConfigError("levels", "expected an int, a list or 'lo:hi'")
    if isinstance(value, int):
        return (value,)
    if isinstance(value, (list, tuple)):
        out = []
        for x in value:
            if isinstance(x, bool) or not isinstance(x, int):
                raise ConfigError("levels", f"level {x!r} is not an integer")
            out.append(x)
        return tuple(out)
    raise ConfigError("levels", "expected an int, a list or 'lo:hi'")


def parse_floats(name: str, value: Any) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        try:
            return tuple(float(p) for p in parts)
        except ValueError as e:
            raise ConfigError(name, f"cannot parse '{value}'") from e
    if isinstance(value, bool):
        raise ConfigError(name, "expected a number or a list of numbers")
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, (list, tuple)):
        out = []
        for x in value:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ConfigError(name, f"entry {x!r} is not a number")
            out.append(float(x))
        return tuple(out)
    raise ConfigError(name, "expected a number or a list of numbers")


@dataclass(frozen=True)
class ExperimentConfig:
    example: str = "a"
    method: str = "lumped"
    alphas: tuple[float, ...] = (0.5,)
    times: tuple[float, ...] = (1.0,)
    levels: tuple[int, ...] = (3, 4, 5, 6, 7)
    projection: str | None = None
    output_format: str = "csv"
    output_path: str | None = None
    l1_tau: float | None = None
    gauss_points: int = 5

    def validate(self) -> None:
        if self.example not in EXAMPLES:
            raise ConfigError("example", f"'{self.example}' is not one of {', '.join(EXAMPLES)}")
        if self.method not in METHODS:
            raise ConfigError("method", f"'{self.method}' is not one of {', '.join(METHODS)}")
        if self.output_format not in FORMATS:
            raise ConfigError("output_format", f"'{self.output_format}' is not one of {', '.join(FORMATS)}")

        if not self.alphas:
            raise ConfigError("alphas", "at least one alpha is required")
        for a in self.alphas:
            if not math.isfinite(a) or not 0.0 < a <= 1.0:
                raise ConfigError("alphas", f"alpha={a} must lie in (0, 1]")
            if a == 1.0 and (self.method == "l1" or self.example == "e"):
                raise ConfigError("alphas", "the L1 scheme needs alpha < 1")

        if not self.times:
            raise ConfigError("times", "at least one time is required")
        data = InitialData(EXAMPLES[self.example][0])
        for t in self.times:
            if not math.isfinite(t) or t < 0.0:
                raise ConfigError("times", f"t={t} must be finite and non-negative")
            if t == 0.0 and data.slow_series:
                raise ConfigError("times", f"example {self.example} needs t > 0")

        if not self.levels:
            raise ConfigError("levels", "at least one level is required")
        for k in self.levels:
            if not MIN_LEVEL <= k <= MAX_LEVEL:
                raise ConfigError("levels", f"level {k} outside [{MIN_LEVEL}, {MAX_LEVEL}]")

        projection = self.projection or default_projection(self.example)
        if projection not in PROJECTIONS:
            raise ConfigError("projection", f"'{projection}' is not one of {', '.join(PROJECTIONS)}")
        if (projection == "dirac") != data.is_dirac:
            raise ConfigError("projection", f"'{projection}' does not fit example {self.example}")
        if projection == "ritz" and (not data.in_h10 or self.example == "e"):
            raise ConfigError("projection", f"ritz projection needs smooth data, not example {self.example}")

        if isinstance(self.gauss_points, bool) or not isinstance(self.gauss_points, int) or not 1 <= self.gauss_points <= 20:
            raise ConfigError("gauss_points", f"{self.gauss_points!r} must be an integer in [1, 20]")

        if self.l1_tau is not None:
            if not math.isfinite(self.l1_tau) or self.l1_tau <= 0.0:
                raise ConfigError("l1_tau", f"{self.l1_tau} must be positive")
            if self.method == "l1":
                for t in self.times:
                    steps = t / self.l1_tau
                    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
                        raise ConfigError("l1_tau", f"t={t} is not an integer multiple of {self.l1_tau}")

    def pairs(self) -> list[tuple[float, float]]:
        return [(a, t) for a in self.alphas for t in self.times]


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def config_from_mapping(data: dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")

    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if value is None:
            continue
        if key == "alphas":
            kwargs[key] = parse_floats("alphas", value)
        elif key == "times":
            kwargs[key] = parse_floats("times", value)
        elif key == "levels":
            kwargs[key] = parse_levels(value)
        elif key == "l1_tau":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError("l1_tau", f"{value!r} is not a number")
            kwargs[key] = float(value)
        elif key == "gauss_points":
            kwargs[key] = value
        else:
            if not isinstance(value, str) or not value.strip():
                raise ConfigError(key, f"{value!r} is not a non-empty string")
            kwargs[key] = value.strip()
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config", f"cannot read {p}: {e.strerror or e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{p}: line {e.lineno} column {e.colno}: {e.msg}") from e
    return config_from_mapping(data)


def apply_overrides(cfg: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """CLI values win over the file; None means "not given"."""
    given = {k: v for k, v in overrides.items() if v is not None}
    unknown = sorted(set(given) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    return replace(cfg, **given)
