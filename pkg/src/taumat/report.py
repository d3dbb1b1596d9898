"""Structured verification results shared by the library and the CLI."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


@dataclass
class CheckResult:
    """Outcome of one identity check."""

    check_id: str
    residual: float
    tolerance: float
    detail: str = ""
    inputs_digest: str = ""
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self, timestamps: bool = True) -> dict:
        out = {
            "id": self.check_id,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
            "detail": self.detail,
            "inputs": self.inputs_digest,
        }
        if timestamps:
            out["wall_time"] = round(self.wall_time, 6)
        return out


def digest_inputs(payload) -> str:
    """Deterministic short digest of the inputs that produced a check."""
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, check: CheckResult) -> None:
        self.checks.append(check)

    def extend(self, checks) -> None:
        self.checks.extend(checks)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> dict:
        return {
            "checks": len(self.checks),
            "passed": sum(c.passed for c in self.checks),
            "failed": sum(not c.passed for c in self.checks),
            "max_residual": max((c.residual for c in self.checks), default=0.0),
        }

    def as_dict(self, timestamps: bool = True) -> dict:
        rows = sorted((c.as_dict(timestamps) for c in self.checks),
                      key=lambda r: r["id"])
        return {"summary": self.summary(), "checks": rows}

    def to_json(self, timestamps: bool = True) -> str:
        return json.dumps(self.as_dict(timestamps), indent=2)

    def to_csv(self, timestamps: bool = True) -> str:
        cols = ["id", "residual", "tolerance", "passed", "detail", "inputs"]
        if timestamps:
            cols.append("wall_time")
        lines = [",".join(cols)]
        for row in sorted((c.as_dict(timestamps) for c in self.checks),
                          key=lambda r: r["id"]):
            lines.append(",".join(
                f"\"{row[c]}\"" if c == "detail" else str(row[c])
                for c in cols))
        return "\n".join(lines) + "\n"
