"""Law check outcomes and their JSON form."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

LAW_REPORT_SCHEMA = "effectus-lab/law-report/1"


@dataclass(frozen=True)
class LawReport:
    law: str
    instance: str
    passed: bool
    residual: float
    counterexample: dict[str, Any] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema": LAW_REPORT_SCHEMA,
            "law": self.law,
            "instance": self.instance,
            "pass": self.passed,
            "residual": _finite(self.residual),
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.details:
            out["details"] = self.details
        return out

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        text = f"{verdict} {self.law} [{self.instance}] residual={self.residual:.3e}"
        if self.counterexample is not None:
            text += f" counterexample={self.counterexample}"
        return text


def _finite(x: float) -> float | str:
    if math.isfinite(x):
        return float(x)
    return "inf" if x > 0 else "nan"


class Residual:
    """Running worst-case residual with the first failing witness."""

    def __init__(self, tol: float):
        self.tol = tol
        self.worst = 0.0
        self.witness: dict[str, Any] | None = None
        self.count = 0

    def add(self, value: float, witness: Any = None) -> None:
        value = float(value)
        self.count += 1
        if not math.isfinite(value):
            value = math.inf
        if value > self.worst:
            self.worst = value
        if value > self.tol and self.witness is None:
            self.witness = witness() if callable(witness) else witness

    def flag(self, ok: bool, witness: Any = None) -> None:
        """Record a boolean condition as residual 0 or 1."""
        self.add(0.0 if ok else 1.0, witness)

    def report(self, law: str, instance: str, **details: Any) -> LawReport:
        passed = self.worst <= self.tol
        cex = None if passed else (self.witness or {"note": "residual above tolerance"})
        details = {k: v for k, v in details.items() if v is not None}
        details.setdefault("samples", self.count)
        return LawReport(law, instance, passed, self.worst, cex, details)


def law_rng(seed: int, law_id: str) -> np.random.Generator:
    """Independent generator per (seed, law) so results do not depend on run order."""
    return np.random.default_rng([int(seed), zlib.crc32(law_id.encode())])
