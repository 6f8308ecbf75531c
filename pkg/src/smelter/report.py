"""Text and JSON rendering of scan results."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from smelter import __version__
from smelter.rules.engine import ScanStats
from smelter.rules.findings import Finding
from smelter.rules.registry import SEVERITIES, inventory_counts

TOOL_NAME = "smelter"
_COLORS = {"error": "\x1b[31m", "warning": "\x1b[33m", "info": "\x1b[36m"}
_RESET = "\x1b[0m"


def tool_info() -> dict:
    return {"name": TOOL_NAME, "version": __version__, "rule_inventory_counts": inventory_counts()}


@dataclass
class Report:
    findings: list[Finding]
    stats: ScanStats = field(default_factory=ScanStats)
    tool: dict = field(default_factory=tool_info)

    def __post_init__(self) -> None:
        self.findings = sorted(self.findings, key=Finding.sort_key)

    def severity_counts(self) -> dict[str, int]:
        counts = {s: 0 for s in reversed(SEVERITIES)}
        for f in self.findings:
            counts[f.severity] += 1
        return counts


def render_text(report: Report, color: bool = False) -> str:
    """One line per finding, then a summary footer."""
    lines = []
    for f in report.findings:
        sev = f.severity.upper()
        if color:
            sev = f"{_COLORS[f.severity]}{sev}{_RESET}"
        lines.append(f"{f.file}:{f.span.start_line}:{f.span.start_col}  {sev}  {f.rule_id}  {f.message}")
    n = len(report.findings)
    footer = f"{n} finding{'' if n == 1 else 's'}"
    if n:
        footer += ": " + ", ".join(f"{c} {s}" for s, c in report.severity_counts().items())
    s = report.stats
    footer += f" ({s.files_scanned} files scanned, {s.suppressed_count} suppressed"
    if s.parse_diagnostics:
        footer += f", {s.parse_diagnostics} parse diagnostics"
    footer += ")"
    lines.append(footer)
    return "\n".join(lines) + "\n"


def report_to_dict(report: Report) -> dict:
    s = report.stats
    return {
        "tool": report.tool,
        "stats": {
            "files_scanned": s.files_scanned,
            "parse_diagnostics": s.parse_diagnostics,
            "suppressed_count": s.suppressed_count,
        },
        "findings": [f.to_dict() for f in report.findings],
    }


def render_json(report: Report) -> str:
    """Deterministic JSON; wall-clock duration is left out so reruns are byte-identical."""
    return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"


def parse_json_report(text: str) -> tuple[dict, dict, list[Finding]]:
    """Inverse of :func:`render_json`: (tool, stats, findings)."""
    data = json.loads(text)
    return data["tool"], data["stats"], [Finding.from_dict(d) for d in data["findings"]]
