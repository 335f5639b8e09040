from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

try:
    import tomllib
except Exception:
    tomllib = None


_MISSING = object()

_ENV_OVERRIDES = {
    "FRACFEM_OUT": "OUT_DIR",
    "FRACFEM_CACHE": "CACHE_DIR",
    "FRACFEM_LOG_LEVEL": "LOG_LEVEL",
}

_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

_DEFAULT_LOG_FORMAT = "%(levelname)s %(asctime)s %(name)s %(message)s"


class SettingsLoader:
    _instance = None
    _loaded = False

    def __new__(cls, *args, **kwargs):
        # one settings object per process
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if self.__class__._loaded:
            return
        self._config: dict[str, Any] = {}
        self.reload()
        self.__class__._loaded = True

    def _project_root(self) -> Path:
        return Path(__file__).resolve().parents[2]

    def _read_pyproject(self) -> dict[str, Any]:
        path = self._project_root() / "pyproject.toml"
        if not path.exists() or tomllib is None:
            return {}
        data = tomllib.loads(path.read_text(encoding="utf-8"))
        tool = data.get("tool", {})
        if not isinstance(tool, dict):
            return {}
        cfg = tool.get("fracfem", {})
        if not isinstance(cfg, dict):
            return {}
        return cfg

    def _read_config_json(self, root: Path, cfg: dict[str, Any]) -> dict[str, Any]:
        candidate = cfg.get("CONFIG_JSON", None)
        if isinstance(candidate, str) and candidate.strip():
            p = Path(candidate.strip())
            path = p if p.is_absolute() else (root / p)
        else:
            path = root / "fracfem.json"

        if not path.exists():
            return {}

        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except Exception:
            return {}
        return data if isinstance(data, dict) else {}

    def _read_env(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for env_name, key in _ENV_OVERRIDES.items():
            value = os.getenv(env_name)
            if isinstance(value, str) and value.strip():
                out[key] = value.strip()
        return out

    def _normalize(self, cfg: dict[str, Any]) -> dict[str, Any]:
        root = self._project_root()

        def _as_dir(key: str, default: str) -> str:
            value = cfg.get(key, cfg.get(key.lower(), None))
            if not isinstance(value, str) or not value.strip():
                value = default
            p = Path(value.strip())
            return str(p if p.is_absolute() else (root / p))

        def _as_int(key: str, default: int, minimum: int) -> int:
            value = cfg.get(key, cfg.get(key.lower(), default))
            try:
                value = int(value)
            except Exception:
                return default
            return value if value >= minimum else default

        def _as_positive_float(key: str, default: float) -> float:
            value = cfg.get(key, cfg.get(key.lower(), default))
            try:
                value = float(value)
            except Exception:
                return default
            return value if value > 0 and value == value else default

        def _as_level(key: str, default: str) -> str:
            value = cfg.get(key, cfg.get(key.lower(), default))
            if not isinstance(value, str) or value.strip().upper() not in _LEVELS:
                return default
            return value.strip().upper()

        log_level = _as_level("LOG_LEVEL", "INFO")

        log_format = cfg.get("LOG_FORMAT", cfg.get("log_format", _DEFAULT_LOG_FORMAT))
        if not isinstance(log_format, str) or not log_format:
            log_format = _DEFAULT_LOG_FORMAT

        reference_alpha = _as_positive_float("REFERENCE_ALPHA", 0.5)
        if reference_alpha >= 1.0:
            reference_alpha = 0.5

        return {
            "PROJECT_ROOT": str(root),
            "OUT_DIR": _as_dir("OUT_DIR", "out"),
            "CACHE_DIR": _as_dir("CACHE_DIR", "cache"),
            "LOG_DIR": _as_dir("LOG_DIR", "logs"),
            "LOG_LEVEL": log_level,
            "LOG_FORMAT": log_format,
            "SOLVER_LOG_LEVEL": _as_level("SOLVER_LOG_LEVEL", "WARNING"),
            "MAX_WORKERS": _as_int("MAX_WORKERS", 1, 1),
            "REFERENCE_CELLS": _as_int("REFERENCE_CELLS", 512, 2),
            "REFERENCE_TAU": _as_positive_float("REFERENCE_TAU", 1e-5),
            "REFERENCE_T_END": _as_positive_float("REFERENCE_T_END", 0.01),
            "REFERENCE_ALPHA": reference_alpha,
            "L1_TAU": _as_positive_float("L1_TAU", 1e-3),
            "MAX_MODES": _as_int("MAX_MODES", 200_000, 64),
            "TAIL_TOL": _as_positive_float("TAIL_TOL", 1e-10),
            "DERIV_TAIL_TOL": _as_positive_float("DERIV_TAIL_TOL", 1e-8),
        }

    def reload(self) -> None:
        root_cfg = self._read_pyproject()
        root = self._project_root()
        json_cfg = self._read_config_json(root, root_cfg)
        merged: dict[str, Any] = {}
        if isinstance(json_cfg, dict):
            merged.update(json_cfg)
        if isinstance(root_cfg, dict):
            merged.update(root_cfg)
        merged.update(self._read_env())
        self._config = self._normalize(merged)

    def get(self, key: str, default: Any = _MISSING) -> Any:
        if not isinstance(key, str) or not key.strip():
            raise ValueError("key must be non-empty str")
        k = key.strip()
        if k in self._config:
            return self._config[k]
        if default is _MISSING:
            raise KeyError(k)
        return default
