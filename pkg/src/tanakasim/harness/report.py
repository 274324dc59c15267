from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..lawcheck import TestVerdict

CSV_COLUMNS = ("path_index", "terminal_value", "occupation_at_zero", "weight")


@dataclass(frozen=True)
class Estimate:
    name: str
    value: float
    stderr: float | None = None
    ess: float | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "stderr": self.stderr, "ess": self.ess}


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


@dataclass
class Report:
    scenario: str
    config: dict
    estimates: list[Estimate] = field(default_factory=list)
    verdicts: list[TestVerdict] = field(default_factory=list)
    duration_s: float = 0.0
    version: str = __version__
    per_path: dict | None = None

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def estimate(self, name: str) -> Estimate:
        for e in self.estimates:
            if e.name == name:
                return e
        raise KeyError(name)

    def verdict(self, name: str) -> TestVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return _clean({
            "scenario": self.scenario,
            "config": self.config,
            "estimates": [e.to_dict() for e in self.estimates],
            "verdicts": [v.to_dict() for v in self.verdicts],
            "passed": self.passed,
            "duration_s": self.duration_s,
            "version": self.version,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write_csv(self, path) -> None:
        if not self.per_path:
            raise ValueError(f"scenario {self.scenario!r} has no per-path summaries")
        cols = {k: np.asarray(v) for k, v in self.per_path.items()}
        n = len(next(iter(cols.values())))
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(CSV_COLUMNS)
            for i in range(n):
                out.writerow([i if c == "path_index" else
                              ("" if c not in cols else repr(float(cols[c][i])))
                              for c in CSV_COLUMNS])
