"""Check results and their JSON serialization."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if hasattr(v, "to_json"):
        return v.to_json()
    if isinstance(v, float) and v != v:
        return None
    if hasattr(v, "item"):  # numpy scalars
        return v.item()
    return v


@dataclass
class CheckResult:
    name: str
    status: str
    residual: float | None = None
    witness: object = None
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self, timing: bool = False) -> dict:
        out = {"name": self.name, "status": self.status}
        if self.residual is not None:
            out["residual"] = float(self.residual)
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.details:
            out["details"] = _jsonable(self.details)
        if timing:
            out["wall_time"] = round(self.wall_time, 6)
        return out


@dataclass
class CheckReport:
    title: str
    params: dict = field(default_factory=dict)
    results: list = field(default_factory=list)

    def add(self, result: CheckResult) -> CheckResult:
        if any(r.name == result.name for r in self.results):
            raise ValueError(f"duplicate check name {result.name!r}")
        self.results.append(result)
        return result

    def record(self, name: str, ok, residual=None, witness=None, **details) -> CheckResult:
        status = ok if isinstance(ok, str) else (PASS if ok else FAIL)
        return self.add(CheckResult(name, status, residual, witness, details))

    @contextmanager
    def timed(self):
        """Attribute elapsed time to every result added inside the block."""
        start = len(self.results)
        t0 = time.perf_counter()
        yield
        dt = time.perf_counter() - t0
        for r in self.results[start:]:
            r.wall_time += dt

    def merge(self, other: "CheckReport", prefix: str = "") -> "CheckReport":
        for r in other.results:
            self.add(CheckResult(prefix + r.name, r.status, r.residual, r.witness, r.details, r.wall_time))
        return self

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self) -> list:
        return [r.name for r in self.results]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def to_json(self, timing: bool = False) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "title": self.title,
            "params": _jsonable(self.params),
            "passed": self.passed,
            "checks": [r.to_json(timing) for r in self.results],
        }

    def dumps(self, timing: bool = False) -> str:
        return json.dumps(self.to_json(timing), indent=2, sort_keys=False, ensure_ascii=False) + "\n"

    def summary_lines(self) -> list:
        out = []
        for r in self.results:
            res = "" if r.residual is None else f"  residual={r.residual:.3e}"
            out.append(f"[{r.status.upper():7}] {r.name}{res}")
        return out
