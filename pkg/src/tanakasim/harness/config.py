"""Scenario configuration: defaults, an INI-style file, then command-line flags.

File layout::

    [DEFAULT]
    seed = 7

    [remark1-hitting]
    lambda = 1.0
    x0 = 0.5
    paths = 20000
    tol.truncation = 1e-3

Keys ``lambda``, ``kappa``, ``eta``, ``x0`` (alias ``zeta``), ``horizon``,
``dt``, ``n_paths`` (alias ``paths``) and ``seed`` map to fields; keys
prefixed ``tol.`` go to ``tol``; anything else lands in ``extra``.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path


class ConfigError(ValueError):
    """Invalid scenario parameters or configuration file."""


_FIELD_KEYS = {
    "lambda": "lam",
    "lam": "lam",
    "kappa": "kappa",
    "eta": "eta",
    "x0": "x0",
    "zeta": "x0",
    "horizon": "horizon",
    "dt": "dt",
    "n_paths": "n_paths",
    "paths": "n_paths",
    "seed": "seed",
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    lam: float = 1.0
    kappa: float | None = None
    eta: float | None = None
    x0: float = 0.0
    horizon: float = 1.0
    dt: float = 1e-3
    n_paths: int = 1000
    seed: int = 20240917
    tol: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.horizon <= 0 or self.dt <= 0:
            raise ConfigError("horizon and dt must be positive")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def tolerance(self, key: str, default: float) -> float:
        return float(self.tol.get(key, default))

    def param(self, key: str, default):
        return type(default)(self.extra.get(key, default)) if default is not None else self.extra.get(key)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    def updated(self, **changes) -> "ScenarioConfig":
        tol = {**self.tol, **changes.pop("tol", {})}
        extra = {**self.extra, **changes.pop("extra", {})}
        try:
            return replace(self, tol=tol, extra=extra, **changes)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _coerce(name: str, raw: str):
    if name in ("n_paths", "seed"):
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    if name in ("kappa", "eta") and raw.strip().lower() in ("", "none"):
        return None
    return float(raw)


def parse_section(items) -> dict:
    """Turn ``key = value`` pairs into ``ScenarioConfig`` keyword changes."""
    changes: dict = {"tol": {}, "extra": {}}
    for key, raw in items:
        key = key.strip().lower()
        try:
            if key in _FIELD_KEYS:
                name = _FIELD_KEYS[key]
                changes[name] = _coerce(name, raw)
            elif key.startswith("tol."):
                changes["tol"][key[4:]] = float(raw)
            else:
                changes["extra"][key] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return changes


def load_config(path: str | Path, scenario: str) -> dict:
    """Read the ``[DEFAULT]`` and ``[scenario]`` sections of ``path``."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    items = list(parser.defaults().items())
    if parser.has_section(scenario):
        items = list(parser.items(scenario))
    return parse_section(items)
