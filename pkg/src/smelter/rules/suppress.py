"""Inline suppression comments: ``# smelter:disable EX1001,EX1002``."""

from __future__ import annotations

import re
from typing import Iterable, Mapping

from smelter.rules.findings import Diagnostic, Finding
from smelter.rules.registry import get_rule
from smelter.syntax.nodes import SyntaxTree

DIRECTIVE_RE = re.compile(r"smelter:disable (EX\d{4}(?:,EX\d{4})*)")
_MARKER_RE = re.compile(r"^\s*smelter:")


def suppression_map(tree: SyntaxTree) -> tuple[dict[int, set[str]], list[Diagnostic]]:
    """Rule ids disabled per line of one file, plus diagnostics for bad directives."""
    lines: dict[int, set[str]] = {}
    diags: list[Diagnostic] = []
    for c in tree.comments:
        if c.kind != "line" or not _MARKER_RE.match(c.text):
            continue
        m = DIRECTIVE_RE.fullmatch(c.text.strip())
        ids = m.group(1).split(",") if m else []
        unknown = [i for i in ids if get_rule(i) is None]
        if m is None or unknown:
            reason = f"unknown rule {', '.join(unknown)}" if unknown else "malformed directive"
            diags.append(Diagnostic(
                tree.file, c.span.start_line, c.span.start_col, "info", "suppression",
                f"ignored suppression comment ({reason}); expected '# smelter:disable EX1234[,EX5678]'",
            ))
            continue
        lines.setdefault(c.span.start_line, set()).update(ids)
    return lines, diags


def apply_suppressions(
    findings: Iterable[Finding], trees: Mapping[str, SyntaxTree]
) -> tuple[list[Finding], int, list[Diagnostic]]:
    """Drop findings disabled on their first line or the line above it.

    Returns (kept findings, number suppressed, diagnostics).
    """
    maps: dict[str, dict[int, set[str]]] = {}
    diags: list[Diagnostic] = []
    for file in sorted(trees):
        maps[file], d = suppression_map(trees[file])
        diags.extend(d)
    kept: list[Finding] = []
    suppressed = 0
    for f in findings:
        lines = maps.get(f.file, {})
        line = f.span.start_line
        if f.rule_id in lines.get(line, ()) or f.rule_id in lines.get(line - 1, ()):
            suppressed += 1
        else:
            kept.append(f)
    return kept, suppressed, diags
