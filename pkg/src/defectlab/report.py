"""Check records and the JSON/CSV report format shared by the CLI and the tests.

Every check stores ``lhs``, ``rhs``, ``rel_err`` and ``tol`` and passes iff
``rel_err <= tol``.  ``metric`` says how ``rel_err`` was formed:

* ``rel``      |lhs - rhs| / max(|rhs|, tiny)
* ``abs``      |lhs - rhs|
* ``floor``    rhs / lhs, with tol = 1, i.e. passes iff lhs >= rhs > 0
* ``exact``    0 if lhs == rhs else 1, with tol = 0
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .quad import TINY, IdentityReport

CSV_FIELDS = ("command", "name", "metric", "lhs", "rhs", "rel_err", "tol", "pass")


def _num(x) -> float:
    if isinstance(x, bool):
        return 1.0 if x else 0.0
    if isinstance(x, complex):
        return x.real if x.imag == 0 else abs(x)
    return float(x)


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    rel_err: float
    tol: float
    metric: str = "rel"
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.rel_err <= self.tol)

    @classmethod
    def relative(cls, name, lhs, rhs, tol, **params) -> "Check":
        lhs, rhs = _num(lhs), _num(rhs)
        return cls(name, lhs, rhs, abs(lhs - rhs) / max(abs(rhs), TINY), tol, "rel", params)

    @classmethod
    def absolute(cls, name, lhs, tol, rhs=0.0, **params) -> "Check":
        lhs, rhs = _num(lhs), _num(rhs)
        return cls(name, lhs, rhs, abs(lhs - rhs), tol, "abs", params)

    @classmethod
    def at_least(cls, name, lhs, floor, **params) -> "Check":
        lhs = _num(lhs)
        ratio = floor / lhs if lhs > 0 else math.inf
        return cls(name, lhs, float(floor), ratio, 1.0, "floor", params)

    @classmethod
    def exact(cls, name, lhs, rhs, **params) -> "Check":
        return cls(name, _num(lhs), _num(rhs), 0.0 if lhs == rhs else 1.0, 0.0, "exact", params)

    @classmethod
    def from_identity(cls, rep: IdentityReport) -> "Check":
        return cls(rep.name, rep.lhs, rep.rhs, rep.rel_err, rep.tol, "rel", dict(rep.params))

    def as_record(self) -> dict[str, Any]:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "rel_err": self.rel_err,
                "tol": self.tol, "pass": self.passed, "metric": self.metric, "params": self.params}


@dataclass
class Report:
    command: str
    params: dict[str, Any]
    checks: list[Check] = field(default_factory=list)
    elapsed_ms: float = 0.0
    data: Any = None
    timing: dict[str, Any] | None = None

    @property
    def passed(self) -> bool:
        ok = all(c.passed for c in self.checks)
        if self.timing:
            ok = ok and all(t["within_budget"] for t in self.timing.values())
        return ok

    def as_dict(self) -> dict[str, Any]:
        out = {"command": self.command, "params": self.params,
               "checks": [c.as_record() for c in self.checks],
               "pass": self.passed, "elapsed_ms": self.elapsed_ms}
        if self.timing is not None:
            out["timing"] = self.timing
        if self.data is not None:
            out["data"] = self.data
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, default=_json_default) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for c in self.checks:
            w.writerow([self.command, c.name, c.metric, repr(c.lhs), repr(c.rhs),
                        repr(c.rel_err), repr(c.tol), c.passed])
        return buf.getvalue()


def _json_default(obj):
    # numpy scalars and arrays sneak into params/data
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_columns(path, header: tuple[str, ...], columns) -> None:
    """Plot-ready CSV: one row per sample."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([int(v) if isinstance(v, (int, np.integer)) else repr(float(v)) for v in row])
