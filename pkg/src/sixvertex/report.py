"""Verification records and reports.

Every ``verify_*``/``check_*`` routine in the package returns a
:class:`VerificationReport`; the CLI merges them and serializes to JSON.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__


def fmt_real(x: float) -> str:
    """Decimal string with 17 significant digits (lossless for doubles)."""
    return format(float(x), ".17g")


def jsonable(value: Any) -> Any:
    """Convert numpy/complex values into plain JSON types.

    Complex scalars become ``[re, im]`` pairs.
    """
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "to_json"):
        return value.to_json()
    return value


@dataclass
class CheckRecord:
    identifier: str
    residual: float
    tolerance: float
    parameters: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual < self.tolerance

    def to_json(self) -> dict[str, Any]:
        return {
            "identifier": self.identifier,
            "parameters": jsonable(self.parameters),
            "residual": fmt_real(self.residual),
            "tolerance": fmt_real(self.tolerance),
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    suite: str
    records: list[CheckRecord] = field(default_factory=list)
    timings_ms: dict[str, float] = field(default_factory=dict)
    seed: int | None = None
    values: dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def add(self, identifier: str, residual: float, tolerance: float, **parameters: Any) -> CheckRecord:
        rec = CheckRecord(identifier, float(residual), float(tolerance), parameters)
        self.records.append(rec)
        return rec

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for rec in other.records:
            self.records.append(
                CheckRecord(prefix + rec.identifier, rec.residual, rec.tolerance, dict(rec.parameters))
            )
        for key, ms in other.timings_ms.items():
            self.timings_ms[prefix + key] = ms
        for key, val in other.values.items():
            self.values[prefix + key] = val

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.records)

    def failures(self) -> list[CheckRecord]:
        return [rec for rec in self.records if not rec.passed]

    def record(self, identifier: str) -> CheckRecord:
        for rec in self.records:
            if rec.identifier == identifier:
                return rec
        raise KeyError(identifier)

    def max_residual(self) -> float:
        return max((rec.residual for rec in self.records), default=0.0)

    def to_json(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "version": self.version,
            "seed": self.seed,
            "pass": self.passed,
            "records": [rec.to_json() for rec in self.records],
            "values": jsonable(self.values),
            "timings_ms": {k: fmt_real(v) for k, v in sorted(self.timings_ms.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)
