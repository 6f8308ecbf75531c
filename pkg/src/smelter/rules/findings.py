"""Finding records and diagnostics produced by a scan."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from smelter.syntax.spans import SourceSpan

Scalar = Union[str, int, float, bool, None]
Evidence = Union[Scalar, list]


@dataclass(frozen=True)
class Finding:
    rule_id: str
    severity: str
    span: SourceSpan
    target: tuple[str | None, str | None, int | None]  # (module, function, arity)
    message: str
    evidence: dict[str, Evidence] = field(default_factory=dict, compare=False)
    confidence: str = "certain"  # certain | heuristic

    @property
    def file(self) -> str:
        return self.span.file

    def sort_key(self) -> tuple:
        s = self.span
        return (s.file, s.start_line, self.rule_id, s.start_col, self.message)

    def to_dict(self) -> dict:
        s = self.span
        module, function, arity = self.target
        return {
            "rule_id": self.rule_id,
            "severity": self.severity,
            "confidence": self.confidence,
            "file": s.file,
            "start_line": s.start_line,
            "start_col": s.start_col,
            "end_line": s.end_line,
            "end_col": s.end_col,
            "target": {"module": module, "function": function, "arity": arity},
            "message": self.message,
            "evidence": dict(sorted(self.evidence.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Finding:
        t = d["target"]
        span = SourceSpan(d["file"], d["start_line"], d["start_col"], d["end_line"], d["end_col"])
        return cls(
            d["rule_id"], d["severity"], span, (t["module"], t["function"], t["arity"]),
            d["message"], dict(d["evidence"]), d["confidence"],
        )


@dataclass(frozen=True)
class Diagnostic:
    """A non-finding message about the scan itself (parse recovery, I/O, ...)."""

    file: str
    line: int
    col: int
    severity: str
    source: str  # parse | io | encoding | suppression | history
    message: str

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "col": self.col,
            "severity": self.severity,
            "source": self.source,
            "message": self.message,
        }


def span_text(span: SourceSpan) -> str:
    return f"{span.file}:{span.start_line}:{span.start_col}-{span.end_line}:{span.end_col}"
