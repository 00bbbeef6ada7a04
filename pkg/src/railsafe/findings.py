"""Validation findings shared by the ontology, sheet, net and document checkers.

Checkers collect every violation instead of stopping at the first one, so a
whole file can be fixed in a single editing pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    """One validation finding: a severity, the location it concerns, a message."""

    severity: str  # ERROR or WARNING
    where: str  # parameter id, element id, file position, ... ("" if global)
    message: str

    def __str__(self) -> str:
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.severity}{loc}: {self.message}"


@dataclass
class ValidationReport:
    """An ordered collection of findings."""

    findings: list[Finding] = field(default_factory=list)

    def error(self, where: str, message: str) -> None:
        self.findings.append(Finding(ERROR, where, message))

    def warning(self, where: str, message: str) -> None:
        self.findings.append(Finding(WARNING, where, message))

    def extend(self, other: "ValidationReport | Iterable[Finding]") -> None:
        items = other.findings if isinstance(other, ValidationReport) else other
        self.findings.extend(items)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == ERROR]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == WARNING]

    @property
    def ok(self) -> bool:
        """True when the report carries no errors (warnings allowed)."""
        return not self.errors

    def __iter__(self) -> Iterator[Finding]:
        return iter(self.findings)

    def __len__(self) -> int:
        return len(self.findings)

    def __str__(self) -> str:
        if not self.findings:
            return "0 errors, 0 warnings"
        lines = [str(f) for f in self.findings]
        lines.append(f"{len(self.errors)} errors, {len(self.warnings)} warnings")
        return "\n".join(lines)

    def to_json(self) -> list[dict]:
        return [
            {"severity": f.severity, "where": f.where, "message": f.message}
            for f in self.findings
        ]
