"""End-to-end acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL criterion N: ...`` line; the lines are
echoed at the end of the pytest run (see conftest.py).
"""

from __future__ import annotations

import io
import json
import random
import time

from smelter.cli import main
from smelter.history import ChangeLog, Commit, cochange, divergent_change, ingest_change_log, shotgun_surgery
from smelter.metrics import clone_index
from smelter.report import Report, render_json
from smelter.rules.config import AnalysisConfig
from smelter.rules.engine import analyze_files, discover_files
from smelter.syntax import desugar_pipes, parse_source, tokenize
from smelter.syntax.lexer import gaps_are_whitespace
from smelter.syntax.nodes import FUNCTION_DEF, MODULE_DEF, STRUCT_DEF, iter_nodes
from support import (
    ACCEPTANCE,
    CORPUS,
    GOLDEN,
    HISTORY,
    LISTINGS,
    RULE_DIRS,
    THRESHOLDS,
    brute_force_clones,
    brute_force_cochange,
    config_with,
    corpus_count,
    corpus_sources,
    mutate,
    parse,
    perf_project,
    rule_findings,
    scan_dir,
    sweep_values,
)


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line


# 1 ---------------------------------------------------------------------------------


def test_criterion_1_catalog_fidelity():
    t0 = time.perf_counter()
    out = io.StringIO()
    code = main(["list-rules", "--format", "json"], out, io.StringIO())
    rules = json.loads(out.getvalue())
    elapsed = time.perf_counter() - t0
    cats = [r["category"] for r in rules]
    counts = {
        "total": len(rules),
        "traditional": sum(c.startswith("traditional") for c in cats),
        "elixir_specific": sum(c.startswith("elixir") for c in cats),
        "design_related": cats.count("elixir-design"),
        "low_level": cats.count("elixir-lowlevel"),
    }
    want = {"total": 29, "traditional": 11, "elixir_specific": 18, "design_related": 10, "low_level": 8}
    verdict(1, code == 0 and counts == want and elapsed < 1.0,
            f"list-rules counts {counts} (want {want}) in {elapsed:.3f}s (<1s)")


# 2 ---------------------------------------------------------------------------------


def test_criterion_2_coverage_beyond_credo():
    fired = [d.name for d in RULE_DIRS if rule_findings(scan_dir(d / "positive"), d.name)]
    credo = {"EX1005", "EX1002", "EX1307"}  # duplicated code, long parameter list, compile-time config
    extra = len(set(fired) - credo)
    ok = len(fired) == 29 and credo <= set(fired) and extra >= 20
    verdict(2, ok, f"{len(fired)}/29 rules fire on their positive fixtures "
                   f"(Credo's 3 covered: {credo <= set(fired)}; {extra} additional, need >= 20)")


# 3 ---------------------------------------------------------------------------------


def _corpus_json(files) -> str:
    cfg = AnalysisConfig.defaults()
    res = analyze_files(files, cfg, root=CORPUS)
    return render_json(Report(res.findings, res.stats))


def test_criterion_3_fixture_corpus_correctness():
    t0 = time.perf_counter()
    wrong = []
    for d in RULE_DIRS:
        for kind, want in (("positive", 1), ("negative", 0)):
            got = len(rule_findings(scan_dir(d / kind), d.name))
            if got != want:
                wrong.append(f"{d.name}/{kind}={got}")
    files = [p for _, p in discover_files([CORPUS], AnalysisConfig.defaults(), CORPUS)]
    golden = (GOLDEN / "corpus.json").read_text(encoding="utf-8")
    runs = [_corpus_json(files), _corpus_json(files), _corpus_json(list(reversed(files)))]
    shuffled = list(files)
    random.Random(5).shuffle(shuffled)
    runs.append(_corpus_json(shuffled))
    identical = all(r == golden for r in runs)
    elapsed = time.perf_counter() - t0
    verdict(3, not wrong and identical and elapsed < 10.0,
            f"{2 * len(RULE_DIRS) - len(wrong)}/{2 * len(RULE_DIRS)} fixtures give 1/0 findings"
            f"{' ' + str(wrong) if wrong else ''}; "
            f"golden JSON byte-identical over {len(runs)} runs/orderings: {identical}; {elapsed:.2f}s (<10s)")


# 4 ---------------------------------------------------------------------------------


def _inventory(tree):
    mods = {}
    for n in tree.walk():
        if n.kind == MODULE_DEF:
            fns = sorted({(d.form, d.meta["arity"]) for d in iter_nodes(n) if d.kind == FUNCTION_DEF})
            struct = [tuple(d.meta["fields"]) for d in iter_nodes(n) if d.kind == STRUCT_DEF]
            mods[n.form] = (fns, struct)
    return mods


def _nested(node, lo, hi) -> bool:
    if not lo <= node.start <= node.end <= hi:
        return False
    return all(c.meta.get("synthetic") or _nested(c, node.start, node.end) for c in node.children)


def test_criterion_4_parser_acceptance():
    circle = _inventory(parse((LISTINGS / "circle.ex").read_text(), mode="strict"))
    point = _inventory(parse((LISTINGS / "point.ex").read_text(), mode="strict"))
    listings_ok = (circle == {"Circle": ([("area", 1), ("circumference", 1)], [])}
                   and point == {"Point": ([("distance", 2), ("move", 3)], [("x", "y")])})
    pipe_ok = desugar_pipes(parse("f() |> g(p)")) == desugar_pipes(parse("g(f(), p)"))

    sources = corpus_sources()
    lossless = spans = True
    for name, src in sources.items():
        toks = tokenize(src, file=name)
        lossless &= gaps_are_whitespace(src, toks) and all(src[t.start:t.end] == t.text for t in toks)
        tree, _ = parse_source(src, mode="strict", file=name)
        spans &= all(_nested(r, 0, len(src)) for r in desugar_pipes(tree).root)

    rng = random.Random(2024)
    pool = list(sources.values())
    crashes = 0
    for _ in range(10_000):
        src = rng.choice(pool)
        for _ in range(rng.randint(1, 3)):
            src = mutate(src, rng)
        try:
            tree, _ = parse_source(src, mode="tolerant")
            desugar_pipes(tree, strict=False)
        except Exception:  # any escape from tolerant mode is a crash
            crashes += 1
    verdict(4, listings_ok and pipe_ok and lossless and spans and crashes == 0,
            f"listing inventories exact: {listings_ok}; pipe desugaring equal: {pipe_ok}; "
            f"lossless lexing on {len(sources)} files: {lossless}; span containment: {spans}; "
            f"10000 tolerant fuzz mutations, {crashes} crashes")


# 5 ---------------------------------------------------------------------------------


def test_criterion_5_clone_oracle():
    small = []
    for name, src in sorted(corpus_sources().items()):
        tree = parse(src, file=name)
        if sum(t.kind.value not in ("comment", "newline") for t in tree.tokens) <= 200:
            small.append((name, tree))
    groups = {}
    for name, tree in small:
        groups.setdefault(name.rsplit("/", 2)[0], []).append((name, tree))
    checks = mismatches = 0
    for normalize in (True, False):
        for window in (10, 20, 40):
            for trees in [small, *groups.values()]:
                got = {(f.a[0], f.a_index, f.b[0], f.b_index, f.token_length)
                       for f in clone_index(trees, window, normalize)}
                checks += 1
                mismatches += got != brute_force_clones(trees, window, normalize)
    verdict(5, mismatches == 0 and len(small) > 0,
            f"clone_index == brute force on {len(small)} fixtures of <=200 tokens, "
            f"{checks} (project, window, normalization) cases, {mismatches} mismatches")


# 6 ---------------------------------------------------------------------------------


def test_criterion_6_history_oracle():
    rng = random.Random(6)
    files = [f"lib/f{i}.ex" for i in range(8)]
    mismatches = 0
    for _ in range(300):
        commits = [frozenset(rng.sample(files, rng.randint(1, 5))) for _ in range(rng.randint(0, 30))]
        m = cochange(ChangeLog([Commit(f"c{i}", c) for i, c in enumerate(commits)]))
        support, changes = brute_force_cochange([set(c) for c in commits])
        mismatches += (m.support, m.changes) != (support, changes)

    hub = ingest_change_log(HISTORY / "hub_log.txt")
    router = ingest_change_log(HISTORY / "router_log.txt")
    hm, rm = cochange(hub), cochange(router)
    hub_ok = (len(hub) == 20
              and shotgun_surgery(hm) == [("lib/hub.ex", ["lib/x1.ex", "lib/x2.ex", "lib/x3.ex"])]
              and divergent_change(hm, hub) == [])
    router_ok = (len(router) == 20 and shotgun_surgery(rm) == []
                 and divergent_change(rm, router) == [("lib/router.ex", [["lib/a.ex", "lib/b.ex"],
                                                                         ["lib/c.ex", "lib/d.ex"]])])
    verdict(6, mismatches == 0 and hub_ok and router_ok,
            f"cochange == brute force on 300 synthetic logs ({mismatches} mismatches); "
            f"hub log -> EX1101 only: {hub_ok}; router log -> EX1102 only: {router_ok}")


# 7 ---------------------------------------------------------------------------------


def test_criterion_7_performance(tmp_path):
    lines = perf_project(tmp_path, 10_000)
    cfg = AnalysisConfig.defaults()
    t0 = time.perf_counter()
    files = [p for _, p in discover_files([tmp_path], cfg, tmp_path)]
    res = analyze_files(files, cfg, root=tmp_path, jobs=1)
    elapsed = time.perf_counter() - t0
    verdict(7, elapsed < 5.0 and res.stats.files_scanned == len(files),
            f"scanned {lines} lines in {len(files)} files single-threaded in {elapsed:.2f}s (<5s), "
            f"{len(res.findings)} findings")


# 8 ---------------------------------------------------------------------------------


def test_criterion_8_threshold_monotonicity():
    violations = []
    for rule_id, name, default in THRESHOLDS:
        values = sweep_values(default)
        counts = [corpus_count(rule_id, config_with(rule_id, **{name: v})) for v in values]
        if counts != sorted(counts, reverse=True):
            violations.append(f"{rule_id}.{name}={counts}")
    verdict(8, not violations,
            f"{len(THRESHOLDS)} numeric thresholds swept over 5 values each on the corpus; "
            f"{len(violations)} monotonicity violations{' ' + str(violations) if violations else ''}")
