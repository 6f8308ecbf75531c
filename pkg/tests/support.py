"""Shared test helpers: corpus access, brute-force oracles, generators."""

from __future__ import annotations

import random
from itertools import combinations
from pathlib import Path

from smelter.history import ChangeLog, ingest_change_log
from smelter.metrics import clone_stream
from smelter.rules.config import AnalysisConfig
from smelter.rules.registry import registry
from smelter.rules.engine import AnalysisResult, analyze_files, analyze_sources, discover_files
from smelter.syntax import parse_source
from smelter.syntax.nodes import SyntaxTree

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
LISTINGS = FIXTURES / "listings"
HISTORY = FIXTURES / "history"
GOLDEN = FIXTURES / "golden"

RULE_DIRS = sorted(p for p in CORPUS.iterdir() if p.is_dir())

# criterion number -> "PASS/FAIL criterion N: ..." line, filled by test_acceptance
ACCEPTANCE: dict[int, str] = {}


def config_with(rule_id: str | None = None, **params) -> AnalysisConfig:
    cfg = AnalysisConfig.defaults()
    if rule_id is not None:
        cfg.params[rule_id].update(params)
    return cfg


def scan_dir(directory: Path, config: AnalysisConfig | None = None, history: ChangeLog | None = None) -> AnalysisResult:
    """Analyze one fixture project, picking up its ``changes.log`` if present."""
    config = config or AnalysisConfig.defaults()
    files = [p for _, p in discover_files([directory], config, directory)]
    log = directory / "changes.log"
    if history is None and log.exists():
        history = ingest_change_log(log)
    return analyze_files(files, config, root=directory, history=history)


def analyze(sources: dict[str, str], rules: list[str] | None = None, config: AnalysisConfig | None = None,
            history: ChangeLog | None = None) -> AnalysisResult:
    config = config or AnalysisConfig.defaults()
    if rules is not None:
        config = config.restricted_to(rules)
    return analyze_sources(sources, config, history=history)


def rule_findings(result: AnalysisResult, rule_id: str):
    return [f for f in result.findings if f.rule_id == rule_id]


def parse(source: str, file: str = "t.ex", mode: str = "strict") -> SyntaxTree:
    tree, _ = parse_source(source, mode=mode, file=file)
    return tree


def corpus_sources() -> dict[str, str]:
    """Every .ex/.exs file of the fixture corpus and listings, keyed by relative path."""
    out = {}
    for base in (CORPUS, LISTINGS):
        for p in sorted(base.rglob("*")):
            if p.suffix in (".ex", ".exs"):
                out[p.relative_to(FIXTURES).as_posix()] = p.read_text(encoding="utf-8")
    return out


# --- threshold sweeps --------------------------------------------------------

THRESHOLDS = [
    (r.id, name, p.default)
    for r in registry()
    for name, p in r.params.items()
    if p.type in ("int", "float") and name.startswith(("max_", "min_", "window", "undocumented_"))
]


def sweep_values(default: int | float) -> list:
    """Five increasing values around a threshold's default."""
    if isinstance(default, float):
        return [round(default + d, 2) for d in (-0.4, -0.2, 0.0, 0.2, 0.4)]
    values = {max(1, default // 2), max(1, default - 1), default, default + 1, default * 2}
    step = 2
    while len(values) < 5:
        values.add(default + step)
        step += 1
    return sorted(values)


def corpus_count(rule_id: str, config: AnalysisConfig) -> int:
    """Findings of ``rule_id`` over its positive and negative fixture projects."""
    return sum(len(rule_findings(scan_dir(CORPUS / rule_id / kind, config), rule_id))
               for kind in ("positive", "negative"))


# --- brute-force oracles ---------------------------------------------------


def brute_force_clones(trees: list[tuple[str, SyntaxTree]], window: int, normalize: bool) -> set[tuple]:
    """Every maximal common token run >= ``window``, by direct pairwise comparison.

    A run starts at a pair of positions whose preceding tokens differ (or
    that begin a file); runs overlapping their own copy are ignored.
    Returns {(file_a, index_a, file_b, index_b, length)}.
    """
    streams = [(f, clone_stream(t, normalize)[1]) for f, t in sorted(trees, key=lambda ft: ft[0])]
    positions = [(fi, i) for fi, (_, seq) in enumerate(streams) for i in range(len(seq))]
    out = set()
    for (fa, i), (fb, j) in combinations(positions, 2):
        sa, sb = streams[fa][1], streams[fb][1]
        if i > 0 and j > 0 and sa[i - 1] == sb[j - 1]:
            continue
        n = 0
        while i + n < len(sa) and j + n < len(sb) and sa[i + n] == sb[j + n]:
            n += 1
        if n < window or (fa == fb and abs(i - j) < n):
            continue
        out.add((streams[fa][0], i, streams[fb][0], j, n))
    return out


def brute_force_cochange(commits: list[set[str]]) -> tuple[dict, dict]:
    """Pair support and per-file change counts by scanning every commit for every pair."""
    files = sorted({f for c in commits for f in c})
    support = {}
    for a, b in combinations(files, 2):
        n = sum(1 for c in commits if a in c and b in c)
        if n:
            support[(a, b)] = n
    changes = {f: sum(1 for c in commits if f in c) for f in files}
    return support, changes


# --- generators ------------------------------------------------------------

MUTATION_SNIPPETS = [
    "do", "end", "(", ")", "[", "]", "{", "}", "%{", "<<", ">>", '"', "'", "#", "\n", "|>", "->",
    "<-", "fn", "&", "?", "~s(", "@", ":", "::", ",", "\\\\", "when", "def ", "\"\"\"", "#{", "%",
    ".", "=", "|", "\t", "\x00", "é", "x" * 3,
]


def mutate(source: str, rng: random.Random) -> str:
    """One random structural edit: delete, insert, duplicate or truncate."""
    n = len(source)
    op = rng.randrange(4)
    i = rng.randrange(n + 1)
    if op == 0 and n:
        j = min(n, i + rng.randint(1, 12))
        return source[:i] + source[j:]
    if op == 1:
        return source[:i] + rng.choice(MUTATION_SNIPPETS) + source[i:]
    if op == 2 and n:
        j = min(n, i + rng.randint(1, 40))
        k = rng.randrange(n + 1)
        return source[:k] + source[i:j] + source[k:]
    return source[:i]


def perf_project(directory: Path, target_lines: int = 10_000) -> int:
    """Write a synthetic project of about ``target_lines`` lines; returns the line count."""
    rng = random.Random(7)
    lines_total = 0
    m = 0
    lib = directory / "lib"
    lib.mkdir(parents=True, exist_ok=True)
    while lines_total < target_lines:
        out = [f"defmodule Perf.Mod{m} do", f"  alias Perf.Mod{max(m - 1, 0)}, as: Prev", ""]
        for f in range(12):
            a, b = rng.sample(["x", "y", "acc", "opts", "items", "state", "count"], 2)
            k = rng.randint(1, 99)
            out += [
                f"  @doc \"Step {f} of module {m}.\"",
                f"  def step{f}({a}, {b}) do",
                f"    value = {a} * {k} + {b}",
                f"    case Prev.step{(f + 1) % 12}(value, {k}) do",
                f"      {{:ok, r{f}}} -> r{f} + {rng.randint(1, 9)}",
                f"      {{:error, reason}} -> {{:failed, reason, {m}}}",
                "    end",
                "  end",
                "",
            ]
        out += [f"  defp helper_{m}(n) when is_integer(n), do: n * {m + 1}", "end", ""]
        (lib / f"mod{m}.ex").write_text("\n".join(out), encoding="utf-8")
        lines_total += len(out)
        m += 1
    return lines_total
