"""Engine configuration: embedded defaults, overridable from a JSON file."""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import ConfigError

CONFIG_ENV = "MLCERT_CONFIG"

DEFAULTS: dict[str, Any] = {
    "thresholds": {
        # linear score maps: score 1 at <= pass, 0 at >= zero
        "class_balance": {"pass": 3.0, "zero": 10.0},
        "missing_labels": {"pass": 0.0, "zero": 0.05},
        "property_outliers": {"pass": 0.01, "zero": 0.10},
        "label_property_correlation": {"pass": 0.3, "zero": 0.8},
        "drift_pass_score": 0.5,
    },
    "iou_threshold": 0.5,
    "psi_max": 0.25,
    "tv_max": 0.30,
    "epsilon": 1e-4,
    "robustness_tolerance": 0.10,
    "performance_thresholds": {"precision": 0.75, "recall": 0.70, "map_50": 0.75},
    "resource_limits": {"latency_p95_ms": 50.0, "memory_mb": 1024.0},
    "blend_alpha": 0.5,
    "activity_alpha": {},
    "auto_activities": {
        "VandV/model_performance": ["ModelPerformance", "Resource"],
        "VandV/robustness_testing": ["ModelPerformance"],
        "VandV/dataset_certification": ["DataIntegrity", "TrainTest"],
    },
    "parallelism": 1,
}

# settings that change how the engine runs but never what it computes
EXECUTION_ONLY = frozenset({"parallelism"})

# sections whose keys are open-ended (user-named)
_OPEN_SECTIONS = {"activity_alpha", "auto_activities", "performance_thresholds"}


def _merge(base: dict, override: Mapping, path: str) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if k not in base and path.split(".")[-1] not in _OPEN_SECTIONS:
            raise ConfigError(f"unknown config key {path}.{k}".lstrip("."))
        if k in base and isinstance(base[k], dict) and isinstance(v, Mapping) and k not in _OPEN_SECTIONS:
            out[k] = _merge(base[k], v, f"{path}.{k}")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _num(x, name, lo=-math.inf, hi=math.inf, lo_open=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{name} must be a finite number")
    if x < lo or x > hi or (lo_open and x == lo):
        raise ConfigError(f"{name}={x} out of range")
    return float(x)


@dataclass(frozen=True)
class EngineConfig:
    raw: dict[str, Any] = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    def __post_init__(self):
        r = self.raw
        for name, m in r["thresholds"].items():
            if name == "drift_pass_score":
                _num(m, "thresholds.drift_pass_score", 0.0, 1.0, lo_open=True)
                continue
            p = _num(m.get("pass"), f"thresholds.{name}.pass")
            z = _num(m.get("zero"), f"thresholds.{name}.zero")
            if z <= p:
                raise ConfigError(f"thresholds.{name}: zero must exceed pass")
        _num(r["iou_threshold"], "iou_threshold", 0.0, 1.0, lo_open=True)
        _num(r["psi_max"], "psi_max", 0.0, lo_open=True)
        _num(r["tv_max"], "tv_max", 0.0, 1.0, lo_open=True)
        _num(r["epsilon"], "epsilon", 0.0, 1.0, lo_open=True)
        _num(r["robustness_tolerance"], "robustness_tolerance", 0.0, lo_open=True)
        _num(r["blend_alpha"], "blend_alpha", 0.0, 1.0)
        for k, v in r["performance_thresholds"].items():
            if k not in ("precision", "recall", "f1", "map_50"):
                raise ConfigError(f"unknown performance metric {k!r}")
            _num(v, f"performance_thresholds.{k}", 0.0, 1.0)
        for k, v in r["activity_alpha"].items():
            _num(v, f"activity_alpha.{k}", 0.0, 1.0)
        lim = r["resource_limits"]
        _num(lim["latency_p95_ms"], "resource_limits.latency_p95_ms", 0.0, lo_open=True)
        _num(lim["memory_mb"], "resource_limits.memory_mb", 0.0, lo_open=True)
        par = r["parallelism"]
        if isinstance(par, bool) or not isinstance(par, int) or par < 1:
            raise ConfigError("parallelism must be a positive integer")
        from .core import CheckCategory

        for act, cats in r["auto_activities"].items():
            if not isinstance(cats, list) or "/" not in act:
                raise ConfigError(f"auto_activities.{act} must map 'Process/activity' to a list of categories")
            for c in cats:
                try:
                    CheckCategory(c)
                except ValueError:
                    raise ConfigError(f"auto_activities.{act}: unknown category {c!r}") from None

    @classmethod
    def from_dict(cls, overrides: Mapping[str, Any] | None = None) -> EngineConfig:
        if overrides is None:
            return cls()
        if not isinstance(overrides, Mapping):
            raise ConfigError("config document must be a JSON object")
        try:
            return cls(_merge(DEFAULTS, overrides, ""))
        except (KeyError, AttributeError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None

    def __getattr__(self, name):
        try:
            return self.__dict__["raw"][name]
        except KeyError:
            raise AttributeError(name) from None

    def threshold(self, name: str) -> tuple[float, float]:
        m = self.raw["thresholds"][name]
        return float(m["pass"]), float(m["zero"])

    def result_settings(self) -> dict[str, Any]:
        """The config minus execution-only keys; this is what reports fingerprint."""
        return {k: v for k, v in self.raw.items() if k not in EXECUTION_ONLY}

    def with_overrides(self, **kw) -> EngineConfig:
        return EngineConfig.from_dict({**self.raw, **kw})


def load_config(path=None) -> EngineConfig:
    """Defaults, overridden by ``path`` or else the file named by ``$MLCERT_CONFIG``."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return EngineConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return EngineConfig.from_dict(doc)
