"""The analysis driver: parse, index, measure, detect, suppress, sort."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from smelter.metrics import FunctionMetrics, ModuleMetrics, function_metrics, module_metrics
from smelter.model import ProjectModel, build_model
from smelter.rules.config import AnalysisConfig
from smelter.rules.findings import Diagnostic, Finding
from smelter.rules.registry import TRADITIONAL_HISTORY, get_rule, registry
from smelter.rules.suppress import apply_suppressions
from smelter.syntax import ParseError, SyntaxTree, desugar_pipes, parse_source
from smelter.syntax.spans import SourceSpan

SOURCE_SUFFIXES = (".ex", ".exs")

Detector = Callable[["AnalysisContext", dict], list[Finding]]
DETECTORS: dict[str, Detector] = {}


def rule(rule_id: str) -> Callable[[Detector], Detector]:
    """Register a detector function for ``rule_id``."""

    def register(fn: Detector) -> Detector:
        if get_rule(rule_id) is None:
            raise ValueError(f"detector for unknown rule {rule_id}")
        DETECTORS[rule_id] = fn
        return fn

    return register


def load_detectors() -> dict[str, Detector]:
    import smelter.detectors  # noqa: F401  (registers on import)

    return DETECTORS


@dataclass
class ScanStats:
    files_scanned: int = 0
    parse_diagnostics: int = 0
    suppressed_count: int = 0
    duration: float = 0.0
    parse_errors: int = 0  # strict-mode failures
    skipped_rules: tuple[str, ...] = ()


@dataclass
class AnalysisResult:
    findings: list[Finding]
    stats: ScanStats
    model: ProjectModel
    diagnostics: list[Diagnostic] = field(default_factory=list)


class AnalysisContext:
    """Everything a detector may read; shared, read-only."""

    def __init__(self, model: ProjectModel, config: AnalysisConfig, history: Any = None) -> None:
        self.model = model
        self.config = config
        self.history = history

    @property
    def trees(self) -> dict[str, SyntaxTree]:
        return self.model.trees

    @cached_property
    def function_metrics(self) -> dict[tuple[str, str, int], FunctionMetrics]:
        return {m.target: m for m in function_metrics(self.model)}

    @cached_property
    def module_metrics(self) -> dict[str, ModuleMetrics]:
        return {m.module: m for m in module_metrics(self.model)}

    def finding(
        self,
        rule_id: str,
        span: SourceSpan,
        target: tuple[str | None, str | None, int | None],
        message: str,
        evidence: dict | None = None,
        heuristic: bool = False,
    ) -> Finding:
        desc = get_rule(rule_id)
        confidence = "heuristic" if desc.heuristic or heuristic else "certain"
        return Finding(
            rule_id,
            self.config.severity.get(rule_id, desc.default_severity),
            span,
            target,
            message,
            dict(evidence or {}),
            confidence,
        )


def parse_file(name: str, data: str | bytes, strict: bool = False) -> tuple[SyntaxTree | None, list[Diagnostic]]:
    """Decode and parse one file; returns (desugared tree or None, diagnostics)."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as err:
            return None, [Diagnostic(name, 1, 1, "error", "encoding", f"not valid UTF-8: {err.reason}")]
    else:
        text = data
    if text.startswith("﻿"):
        text = text[1:]
    try:
        tree, diags = parse_source(text, mode="strict" if strict else "tolerant", file=name)
    except ParseError as err:
        s = err.span
        return None, [Diagnostic(name, s.start_line, s.start_col, "error", "parse", err.message)]
    out = [
        Diagnostic(name, d.span.start_line, d.span.start_col, "warning", "parse", d.message) for d in diags
    ]
    return desugar_pipes(tree, strict=False), out


def analyze_sources(
    sources: Mapping[str, str | bytes],
    config: AnalysisConfig | None = None,
    *,
    history: Any = None,
    strict: bool = False,
    jobs: int = 1,
    extra_diagnostics: Iterable[Diagnostic] = (),
) -> AnalysisResult:
    """Run the whole pipeline over in-memory sources keyed by display path."""
    started = time.perf_counter()
    config = config or AnalysisConfig.defaults()
    strict = strict or not config.tolerant
    names = sorted(sources)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parsed = list(pool.map(lambda n: parse_file(n, sources[n], strict), names))
    else:
        parsed = [parse_file(n, sources[n], strict) for n in names]

    diagnostics: list[Diagnostic] = list(extra_diagnostics)
    trees: list[tuple[str, SyntaxTree]] = []
    stats = ScanStats(files_scanned=len(names))
    for name, (tree, diags) in zip(names, parsed):
        diagnostics.extend(diags)
        stats.parse_diagnostics += sum(1 for d in diags if d.source == "parse")
        if strict:
            stats.parse_errors += sum(1 for d in diags if d.source == "parse")
        if tree is not None:
            trees.append((name, tree))

    model = build_model(trees)
    ctx = AnalysisContext(model, config, history)
    detectors = load_detectors()
    findings: list[Finding] = []
    skipped = []
    for desc in registry():
        if not config.is_enabled(desc.id):
            continue
        if desc.category == TRADITIONAL_HISTORY and history is None:
            skipped.append(desc.id)
            continue
        params = {**desc.defaults(), **config.rule_params(desc.id)}
        findings.extend(detectors[desc.id](ctx, params))
    if skipped:
        diagnostics.append(Diagnostic(
            "", 0, 0, "info", "history",
            f"skipped {', '.join(skipped)}: pass --history <changelog> to enable change-history rules",
        ))
    kept, suppressed, sup_diags = apply_suppressions(findings, model.trees)
    diagnostics.extend(sup_diags)
    kept.sort(key=Finding.sort_key)
    stats.suppressed_count = suppressed
    stats.skipped_rules = tuple(skipped)
    stats.duration = time.perf_counter() - started
    return AnalysisResult(kept, stats, model, diagnostics)


def discover_files(paths: Iterable[str | Path], config: AnalysisConfig, root: str | Path | None = None) -> list[tuple[str, Path]]:
    """(display name, path) of every included source file under ``paths``.

    Display names are posix paths relative to ``root`` (default: the
    current directory), which is also what include/exclude globs match.
    """
    base = Path(root if root is not None else os.getcwd()).resolve()
    found: dict[str, Path] = {}
    for p in paths:
        p = Path(p)
        candidates = [p] if p.is_file() else sorted(q for q in p.rglob("*") if q.is_file())
        for f in candidates:
            if f.suffix not in SOURCE_SUFFIXES:
                continue
            name = display_name(f, base)
            if config.included(name):
                found[name] = f
    return sorted(found.items())


def display_name(path: Path, base: Path) -> str:
    resolved = path.resolve()
    try:
        return resolved.relative_to(base).as_posix()
    except ValueError:
        return resolved.as_posix()


def run_analysis(
    files: Iterable[str | Path],
    config: AnalysisConfig | None = None,
    *,
    root: str | Path | None = None,
    history: Any = None,
    strict: bool = False,
    jobs: int = 1,
) -> tuple[list[Finding], ScanStats]:
    """Analyze the given source files; returns sorted findings and scan stats."""
    result = analyze_files(files, config, root=root, history=history, strict=strict, jobs=jobs)
    return result.findings, result.stats


def analyze_files(
    files: Iterable[str | Path],
    config: AnalysisConfig | None = None,
    *,
    root: str | Path | None = None,
    history: Any = None,
    strict: bool = False,
    jobs: int = 1,
) -> AnalysisResult:
    base = Path(root if root is not None else os.getcwd()).resolve()
    sources: dict[str, bytes] = {}
    io_diags: list[Diagnostic] = []
    for f in files:
        path = Path(f)
        name = display_name(path, base)
        try:
            sources[name] = path.read_bytes()
        except OSError as err:
            io_diags.append(Diagnostic(name, 0, 0, "error", "io", f"cannot read file: {err.strerror or err}"))
    return analyze_sources(
        sources, config, history=history, strict=strict, jobs=jobs, extra_diagnostics=io_diags
    )
