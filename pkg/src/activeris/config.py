"""Line-oriented ``key = value`` scenario files.

Blank lines and ``#`` comments are ignored.  Every key maps onto a
:class:`SystemConfig` field or a sweep setting; dB/dBm convenience keys are
converted to linear values while parsing::

    # elements sweep, K = 5
    p_max_dbm = 20
    sigma_n_sq_db = -60
    sweep = N
    sweep_values = 30, 60, 100
    plans = none, power_only, power_bf, passive_optimized, active_optimized

A JSON sidecar written by ``sweep`` is also accepted: its ``config`` object
is read as canonical keys.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .model import ConfigurationError, SystemConfig
from .orchestrator import PLANS, get_plan
from .simulation import DEFAULT_TRIALS, SWEEP_VARIABLES, ScenarioSpec

BASELINE_PLANS = ("none", "power_only", "power_bf", "passive_optimized", "active_optimized")

DEFAULTS: dict[str, Any] = {
    "M": 10,
    "N": 30,
    "K": 5,
    "p_max": 0.1,
    "a_max": 4.0,
    "sigma_n_sq": 1e-6,
    "sigma_0_sq": 1e-7,
    "sigma_d_sq": 1e-7,
    "sigma_r_sq": 1e-7,
    "sigma_G_sq": 1e-7,
    "step_p": 0.1,
    "step_a": 0.1,
    "step_theta": 0.1,
    "epsilon": 1e-2,
    "epsilon_gain": 5e-3,
    "delta": 0.9,
    "outer_max_iters": 50,
    "sweep": "N",
    "sweep_values": [30],
    "trials": DEFAULT_TRIALS,
    "seed": 0,
    "plans": list(BASELINE_PLANS),
    "plan": "active_optimized",
}

_INT_KEYS = {"M", "N", "K", "outer_max_iters", "trials", "seed"}
_FLOAT_KEYS = {k for k, v in DEFAULTS.items() if isinstance(v, float)}
_DB_KEYS = {f"{k}_db": k for k in ("sigma_n_sq", "sigma_0_sq", "sigma_d_sq", "sigma_r_sq", "sigma_G_sq")}


class ConfigParseError(ConfigurationError):
    def __init__(self, source: str, line: int | str, message: str):
        super().__init__(f"{source}:{line}: {message}")


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm: float) -> float:
    return db_to_linear(x_dbm) / 1000.0


def _number(text: str, integer: bool):
    text = text.strip()
    if integer:
        value = float(text)
        if value != int(value):
            raise ValueError(f"expected an integer, got {text!r}")
        return int(value)
    return float(text)


def _list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _apply(values: dict, key: str, raw: str) -> None:
    """Parse one textual assignment into canonical ``values``; raises ValueError."""
    if key in _INT_KEYS:
        values[key] = _number(raw, True)
    elif key in _FLOAT_KEYS:
        values[key] = _number(raw, False)
    elif key in _DB_KEYS:
        values[_DB_KEYS[key]] = db_to_linear(_number(raw, False))
    elif key == "p_max_dbm":
        values["p_max"] = dbm_to_watts(_number(raw, False))
    elif key == "step":
        v = _number(raw, False)
        values.update(step_p=v, step_a=v, step_theta=v)
    elif key == "csi_error_variance_db":
        v = db_to_linear(_number(raw, False))
        values.update(sigma_d_sq=v, sigma_r_sq=v, sigma_G_sq=v)
    elif key == "sweep":
        if raw.strip() not in SWEEP_VARIABLES:
            raise ValueError(f"sweep must be one of {', '.join(SWEEP_VARIABLES)}")
        values["sweep"] = raw.strip()
    elif key == "sweep_values":
        values["sweep_values"] = [float(t) for t in _list(raw)]
    elif key == "sweep_values_db":
        values["sweep_values"] = [db_to_linear(float(t)) for t in _list(raw)]
    elif key == "plans":
        names = _list(raw)
        for n in names:
            get_plan(n)
        values["plans"] = names
    elif key == "plan":
        get_plan(raw.strip())
        values["plan"] = raw.strip()
    else:
        raise KeyError(key)


def _assign(values: dict, key: str, raw: str, source: str, line) -> None:
    try:
        _apply(values, key, raw)
    except KeyError:
        raise ConfigParseError(source, line, f"unknown key {key!r}") from None
    except (ValueError, ConfigurationError) as exc:
        raise ConfigParseError(source, line, f"bad value for {key!r}: {exc}") from None


def parse_text(text: str, source: str = "<config>") -> dict:
    values: dict[str, Any] = {}
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError(source, lineno, f"expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key in seen:
            raise ConfigParseError(source, lineno, f"key {key!r} already set on line {seen[key]}")
        seen[key] = lineno
        _assign(values, key, raw, source, lineno)
    return values


def _parse_json(text: str, source: str) -> dict:
    try:
        doc = json.loads(text)
        cfg = doc["config"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigParseError(source, 1, f"not a result sidecar: {exc}") from None
    values: dict[str, Any] = {}
    for key, val in cfg.items():
        if key not in DEFAULTS:
            raise ConfigParseError(source, "config", f"unknown key {key!r}")
        values[key] = val
    return values


@dataclass(frozen=True)
class ConfigFile:
    """Canonical, fully-defaulted scenario description."""

    values: dict

    @classmethod
    def load(cls, path: str | Path | None, overrides: Iterable[str] = ()) -> "ConfigFile":
        values: dict[str, Any] = {}
        if path is not None:
            path = Path(path)
            text = path.read_text()
            if text.lstrip().startswith("{"):
                values = _parse_json(text, str(path))
            else:
                values = parse_text(text, str(path))
        for item in overrides:
            if "=" not in item:
                raise ConfigParseError("--set", item, "expected key=value")
            key, raw = (s.strip() for s in item.split("=", 1))
            _assign(values, key, raw, "--set", key)
        sweep = values.get("sweep", DEFAULTS["sweep"])
        if "sweep_values" not in values and sweep in values:
            # an explicit N or K is the one-point grid when none is given
            values["sweep_values"] = [values[sweep]]
        merged = {**DEFAULTS, **values}
        conf = cls(merged)
        try:
            conf.system()
            conf.scenario()
        except (ConfigurationError, TypeError, ValueError) as exc:
            src = str(path) if path is not None else "<defaults>"
            raise ConfigParseError(src, 0, str(exc)) from None
        return conf

    def with_values(self, **kw) -> "ConfigFile":
        return ConfigFile({**self.values, **kw})

    def system(self) -> SystemConfig:
        names = {f.name for f in dataclasses.fields(SystemConfig)}
        return SystemConfig(**{k: v for k, v in self.values.items() if k in names})

    def scenario(self) -> ScenarioSpec:
        v = self.values
        values = tuple(int(x) if v["sweep"] in ("N", "K") else float(x) for x in v["sweep_values"])
        plans = tuple(dataclasses.replace(get_plan(n), outer_max_iters=int(v["outer_max_iters"]))
                      for n in v["plans"])
        return ScenarioSpec(self.system(), v["sweep"], values, plans, int(v["trials"]), int(v["seed"]))

    def echo(self) -> dict:
        """JSON-safe canonical values (re-readable by :meth:`load`)."""
        out = {}
        for k, val in self.values.items():
            out[k] = list(val) if isinstance(val, (list, tuple)) else val
        return out


__all__ = ["ConfigFile", "ConfigParseError", "DEFAULTS", "BASELINE_PLANS", "PLANS", "parse_text"]
