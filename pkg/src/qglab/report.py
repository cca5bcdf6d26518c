"""Verification reports: named residual checks with a pass/fail verdict."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

SCHEMA_ID = "qgl-report-1"


@dataclass
class Check:
    id: str
    anchor: str
    residual: float | None
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual is not None and math.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "anchor": self.anchor,
            "residual": None if self.residual is None or not math.isfinite(self.residual) else float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
        }
        if self.detail:
            d["detail"] = self.detail
        return d


def undefined(id: str, anchor: str, tolerance: float, why: str) -> Check:
    """A check that could not be evaluated; it always fails."""
    return Check(id, anchor, None, tolerance, detail=why)


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, checks: Iterable[Check]) -> "VerificationReport":
        self.checks.extend(checks)
        return self

    def __getitem__(self, id: str) -> Check:
        for c in self.checks:
            if c.id == id:
                return c
        raise KeyError(id)

    def __contains__(self, id: str) -> bool:
        return any(c.id == id for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_ID,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": bool(self.verdict),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            r = "undefined" if c.to_dict()["residual"] is None else f"{c.residual:.3e}"
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark}  {c.id:<40s} residual={r:<10s} tol={c.tolerance:.0e}  [{c.anchor}]")
            if c.detail and not c.passed:
                lines.append(f"      {c.detail}")
        lines.append(f"verdict: {'PASS' if self.verdict else 'FAIL'} "
                     f"({len(self.checks) - len(self.failed())}/{len(self.checks)} checks)")
        return "\n".join(lines)


def report_schema() -> dict:
    return json.loads(resources.files("qglab").joinpath("report_schema.json").read_text())


def validate_report(data: dict) -> None:
    """Raise jsonschema.ValidationError if `data` is not a qgl-report-1 document."""
    import jsonschema

    jsonschema.validate(instance=data, schema=report_schema())
