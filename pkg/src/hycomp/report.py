"""Validation reports shared by every checker."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

STRUCTURAL = "structural"
SEMANTIC = "semantic"
RUNTIME = "runtime"


@dataclass
class Issue:
    kind: str
    where: str
    message: str
    residual: float | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "where": self.where, "message": self.message}
        if self.residual is not None:
            d["residual"] = self.residual
        return d


@dataclass
class Report:
    """Outcome of a check: a list of issues plus the worst residual seen."""

    name: str
    issues: list[Issue] = field(default_factory=list)
    worst: float = 0.0
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.issues

    @property
    def structural_ok(self) -> bool:
        return not any(i.kind == STRUCTURAL for i in self.issues)

    def add(self, kind: str, where: str, message: str, residual: float | None = None) -> None:
        self.issues.append(Issue(kind, where, message, residual))

    def structural(self, where: str, message: str) -> None:
        self.add(STRUCTURAL, where, message)

    def semantic(self, where: str, message: str, residual: float | None = None) -> None:
        self.add(SEMANTIC, where, message, residual)

    def residual(self, value: float, tol: float, where: str, message: str = "residual above tolerance") -> bool:
        """Record a residual; adds a semantic issue when it exceeds ``tol``."""
        self.checked += 1
        if math.isnan(value):
            self.semantic(where, "residual is NaN", value)
            self.worst = math.inf
            return False
        self.worst = max(self.worst, value)
        if value > tol:
            self.semantic(where, message, value)
            return False
        return True

    def extend(self, other: "Report", prefix: str = "") -> "Report":
        for i in other.issues:
            self.issues.append(Issue(i.kind, f"{prefix}{i.where}", i.message, i.residual))
        self.worst = max(self.worst, other.worst)
        self.checked += other.checked
        return self

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "checked": self.checked,
            "worst_residual": self.worst if math.isfinite(self.worst) else str(self.worst),
            "issues": [i.to_dict() for i in self.issues],
        }

    def summary(self) -> str:
        head = f"{self.name}: {'PASS' if self.ok else 'FAIL'} ({self.checked} checks, worst residual {self.worst:.3g})"
        lines = [head] + [f"  [{i.kind}] {i.where}: {i.message}"
                          + (f" (residual {i.residual:.3g})" if i.residual is not None else "")
                          for i in self.issues[:20]]
        if len(self.issues) > 20:
            lines.append(f"  ... {len(self.issues) - 20} more")
        return "\n".join(lines)

    def __str__(self):
        return self.summary()
