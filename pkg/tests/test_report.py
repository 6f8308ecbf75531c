from __future__ import annotations

import os
import random

from smelter.report import Report, parse_json_report, render_json, render_text, report_to_dict
from smelter.rules.config import AnalysisConfig
from smelter.rules.engine import ScanStats, analyze_files, discover_files
from support import CORPUS, GOLDEN, analyze

GOLDEN_FILE = GOLDEN / "corpus.json"


def corpus_report(order: str = "sorted", jobs: int = 1) -> str:
    cfg = AnalysisConfig.defaults()
    files = [p for _, p in discover_files([CORPUS], cfg, CORPUS)]
    if order == "reversed":
        files.reverse()
    elif order == "shuffled":
        random.Random(11).shuffle(files)
    res = analyze_files(files, cfg, root=CORPUS, jobs=jobs)
    return render_json(Report(res.findings, res.stats))


def test_corpus_matches_golden_json():
    text = corpus_report()
    if os.environ.get("SMELTER_UPDATE_GOLDEN"):
        GOLDEN.mkdir(parents=True, exist_ok=True)
        GOLDEN_FILE.write_text(text, encoding="utf-8")
    assert text == GOLDEN_FILE.read_text(encoding="utf-8")


def test_corpus_json_is_independent_of_order_and_threads():
    base = corpus_report()
    assert corpus_report("reversed") == base
    assert corpus_report("shuffled") == base
    assert corpus_report(jobs=4) == base


def test_json_round_trip():
    text = corpus_report()
    tool, stats, findings = parse_json_report(text)
    assert tool["rule_inventory_counts"]["total"] == 29
    assert "duration" not in stats
    rebuilt = Report(findings, ScanStats(files_scanned=stats["files_scanned"],
                                         parse_diagnostics=stats["parse_diagnostics"],
                                         suppressed_count=stats["suppressed_count"]))
    assert render_json(rebuilt) == text
    assert [f.evidence for f in findings] == [d["evidence"] for d in report_to_dict(rebuilt)["findings"]]


SMELLY = {"lib/a.ex": "defmodule A do\n  def f(a, b, c, d, e, f), do: a\nend\n"}


def test_text_report_lines_and_footer():
    res = analyze(SMELLY, ["EX1002", "EX1304"])
    text = render_text(Report(res.findings, res.stats))
    first, footer = text.splitlines()
    assert first.startswith("lib/a.ex:2:3  WARNING  EX1002  ")
    assert footer == "1 finding: 0 error, 1 warning, 0 info (1 files scanned, 0 suppressed)"
    assert "\x1b[" not in text


def test_text_report_empty():
    res = analyze({"lib/a.ex": "defmodule A do\nend\n"})
    assert render_text(Report(res.findings, res.stats)) == "0 findings (1 files scanned, 0 suppressed)\n"


def test_text_report_color():
    res = analyze(SMELLY, ["EX1002"])
    assert "\x1b[33mWARNING\x1b[0m" in render_text(Report(res.findings, res.stats), color=True)


def test_parse_diagnostics_appear_in_footer():
    res = analyze({"lib/a.ex": "defmodule A do\n  def f( do\nend\n"})
    assert "parse diagnostics" in render_text(Report(res.findings, res.stats))
