"""Change-log ingestion and the two evolutionary smells (EX1101, EX1102).

The log format is a plain-text export: records separated by blank lines,
each starting with ``commit <id>`` followed by one changed path per line.
``git log --name-only --pretty=format:"commit %H" > changes.log``
produces it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from smelter.rules.engine import AnalysisContext, rule
from smelter.rules.findings import Finding
from smelter.rules.registry import get_rule
from smelter.syntax.spans import SourceSpan

SOURCE_SUFFIXES = (".ex", ".exs")
Pair = tuple[str, str]


class LogParseError(Exception):
    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class Commit:
    id: str
    files: frozenset[str]


@dataclass
class ChangeLog:
    commits: list[Commit] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.commits)


@dataclass
class CoChangeMatrix:
    support: dict[Pair, int]  # keys are sorted (a, b) with a < b
    changes: dict[str, int]

    def pair(self, a: str, b: str) -> int:
        return self.support.get((a, b) if a < b else (b, a), 0)


def parse_change_log(text: str) -> ChangeLog:
    """Parse log text; non-source paths and commits left empty are dropped."""
    commits: list[Commit] = []
    seen: set[str] = set()
    current: tuple[str, list[str]] | None = None

    def flush() -> None:
        if current is not None:
            files = frozenset(f for f in current[1] if f.endswith(SOURCE_SUFFIXES))
            if files:
                commits.append(Commit(current[0], files))

    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            flush()
            current = None
            continue
        if line.startswith("commit "):
            flush()
            cid = line[len("commit "):].strip()
            if not cid or " " in cid:
                raise LogParseError(no, f"malformed commit header {raw!r}")
            if cid in seen:
                raise LogParseError(no, f"duplicate commit id {cid}")
            seen.add(cid)
            current = (cid, [])
            continue
        if current is None:
            raise LogParseError(no, f"expected 'commit <id>', found {raw!r}")
        current[1].append(line)
    flush()
    return ChangeLog(commits)


def ingest_change_log(path: str | Path) -> ChangeLog:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as err:
        raise LogParseError(1, f"not valid UTF-8: {err.reason}") from None
    return parse_change_log(text)


def cochange(log: ChangeLog) -> CoChangeMatrix:
    support: Counter[Pair] = Counter()
    changes: Counter[str] = Counter()
    for commit in log.commits:
        files = sorted(commit.files)
        changes.update(files)
        support.update(combinations(files, 2))
    return CoChangeMatrix(dict(support), dict(changes))


def _partners(matrix: CoChangeMatrix) -> dict[str, dict[str, int]]:
    out: dict[str, dict[str, int]] = {}
    for (a, b), n in matrix.support.items():
        out.setdefault(a, {})[b] = n
        out.setdefault(b, {})[a] = n
    return out


def shotgun_surgery(
    matrix: CoChangeMatrix, min_support: int = 5, min_confidence: float = 0.6, min_fanout: int = 3
) -> list[tuple[str, list[str]]]:
    """(file, coupled files) for every file whose edits drag others along."""
    out = []
    partners = _partners(matrix)
    for f in sorted(partners):
        coupled = sorted(
            g for g, n in partners[f].items()
            if n >= min_support and n / matrix.changes[g] >= min_confidence
        )
        if len(coupled) >= min_fanout:
            out.append((f, coupled))
    return out


def _find(parent: dict[str, str], x: str) -> str:
    """Union-find root of ``x`` with path halving."""
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def divergent_change(
    matrix: CoChangeMatrix, log: ChangeLog, min_changes: int = 10, min_cluster: int = 2, min_clusters: int = 2
) -> list[tuple[str, list[list[str]]]]:
    """(file, partner clusters) for files changed together with unrelated groups."""
    out = []
    for f in sorted(matrix.changes):
        if matrix.changes[f] < min_changes:
            continue
        parent: dict[str, str] = {}
        for commit in log.commits:
            if f not in commit.files:
                continue
            others = sorted(commit.files - {f})
            for g in others:
                parent.setdefault(g, g)
            for g in others[1:]:
                ra, rb = _find(parent, others[0]), _find(parent, g)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: dict[str, list[str]] = {}
        for g in sorted(parent):
            groups.setdefault(_find(parent, g), []).append(g)
        clusters = sorted(c for c in groups.values() if len(c) >= min_cluster)
        if len(clusters) >= min_clusters:
            out.append((f, clusters))
    return out


def _file_span(path: str) -> SourceSpan:
    return SourceSpan(path, 1, 1, 1, 1)


def _make(ctx: AnalysisContext | None, rule_id: str, path: str, message: str, evidence: dict) -> Finding:
    if ctx is not None:
        return ctx.finding(rule_id, _file_span(path), (None, None, None), message, evidence)
    desc = get_rule(rule_id)
    return Finding(rule_id, desc.default_severity, _file_span(path), (None, None, None), message,
                   evidence, "heuristic" if desc.heuristic else "certain")


def detect_shotgun_surgery(
    matrix: CoChangeMatrix, min_support: int = 5, min_confidence: float = 0.6, min_fanout: int = 3,
    ctx: AnalysisContext | None = None,
) -> list[Finding]:
    return [
        _make(ctx, "EX1101", f,
              f"changing {f} usually forces changes in {len(coupled)} other files",
              {"coupled_files": coupled, "changes": matrix.changes[f]})
        for f, coupled in shotgun_surgery(matrix, min_support, min_confidence, min_fanout)
    ]


def detect_divergent_change(
    matrix: CoChangeMatrix, log: ChangeLog, min_changes: int = 10, min_cluster: int = 2,
    min_clusters: int = 2, ctx: AnalysisContext | None = None,
) -> list[Finding]:
    return [
        _make(ctx, "EX1102", f,
              f"{f} changes together with {len(clusters)} unrelated groups of files",
              {"clusters": [", ".join(c) for c in clusters], "changes": matrix.changes[f]})
        for f, clusters in divergent_change(matrix, log, min_changes, min_cluster, min_clusters)
    ]


@rule("EX1101")
def _shotgun_rule(ctx: AnalysisContext, params: dict) -> list[Finding]:
    return detect_shotgun_surgery(cochange(ctx.history), ctx=ctx, **params)


@rule("EX1102")
def _divergent_rule(ctx: AnalysisContext, params: dict) -> list[Finding]:
    return detect_divergent_change(cochange(ctx.history), ctx.history, ctx=ctx, **params)
