"""Detectors for the statically checkable traditional smells (EX1001-EX1009)."""

from __future__ import annotations

from collections import Counter

from smelter.detectors._common import (
    fn_span,
    fn_target,
    live_clauses,
    mod_target,
    sorted_functions,
    sorted_modules,
)
from smelter.metrics import clone_index, data_clumps
from smelter.model import ModuleInfo
from smelter.rules.engine import AnalysisContext, rule
from smelter.rules.findings import Finding, span_text


@rule("EX1001")
def detect_comments(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    limit = params["max_body_comment_lines"]
    for fn in sorted_functions(ctx.model):
        for i, clause in live_clauses(fn):
            n = clause.comment_line_count
            if n >= limit:
                out.append(ctx.finding(
                    "EX1001", clause.span, fn_target(fn),
                    f"{fn.name}/{fn.arity} explains itself with {n} comment lines; "
                    "prefer clearer code, smaller functions or @doc with doctests",
                    {"comment_lines": n, "clause": i},
                ))
    for mod in sorted_modules(ctx.model):
        public = [f for f in mod.functions.values() if f.kind == "function" and f.visibility == "public"]
        if not public:
            continue
        undocumented = sum(1 for f in public if not f.doc_present)
        ratio = undocumented / len(public)
        comments = ctx.module_metrics[mod.name].body_comment_lines
        if ratio >= params["undocumented_public_ratio"] and comments >= params["min_module_comment_lines"]:
            out.append(ctx.finding(
                "EX1001", mod.span, mod_target(mod),
                f"{mod.name} documents with comments instead of @doc "
                f"({undocumented}/{len(public)} public functions lack @doc, {comments} comment lines)",
                {"undocumented_public": undocumented, "public_functions": len(public), "comment_lines": comments},
            ))
    return out


@rule("EX1002")
def detect_long_parameter_list(ctx: AnalysisContext, params: dict) -> list[Finding]:
    limit = params["max_params"]
    return [
        ctx.finding(
            "EX1002", fn_span(fn), fn_target(fn),
            f"{fn.name}/{fn.arity} takes {fn.arity} parameters (limit {limit})",
            {"params": fn.arity, "max_params": limit},
        )
        for fn in sorted_functions(ctx.model)
        if fn.arity >= limit
    ]


@rule("EX1003")
def detect_long_function(ctx: AnalysisContext, params: dict) -> list[Finding]:
    limit = params["max_lines"]
    out = []
    for fn in sorted_functions(ctx.model):
        m = ctx.function_metrics[fn.target]
        if m.max_clause_lines >= limit:
            out.append(ctx.finding(
                "EX1003", fn_span(fn), fn_target(fn),
                f"{fn.name}/{fn.arity} has a {m.max_clause_lines}-line clause (limit {limit})",
                {"lines": m.max_clause_lines, "max_lines": limit},
            ))
    return out


@rule("EX1004")
def detect_large_module(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for mod in sorted_modules(ctx.model):
        m = ctx.module_metrics[mod.name]
        reasons = []
        if m.total_lines >= params["max_module_lines"]:
            reasons.append(f"{m.total_lines} lines")
        if m.public_function_count >= params["max_public_functions"]:
            reasons.append(f"{m.public_function_count} public functions")
        if reasons:
            out.append(ctx.finding(
                "EX1004", mod.span, mod_target(mod),
                f"module {mod.name} is large ({', '.join(reasons)})",
                {"lines": m.total_lines, "public_functions": m.public_function_count},
            ))
    return out


def _module_at_line(modules: list[ModuleInfo], line: int) -> ModuleInfo | None:
    """Innermost module of one file whose span covers ``line``."""
    best = None
    for mod in modules:
        s = mod.span
        if s.start_line <= line <= s.end_line:
            if best is None or s.start_line >= best.span.start_line:
                best = mod
    return best


@rule("EX1005")
def detect_duplicated_code(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    trees = sorted(ctx.trees.items())
    by_file: dict[str, list[ModuleInfo]] = {}
    for mod in ctx.model.modules.values():
        by_file.setdefault(mod.file, []).append(mod)
    for frag in clone_index(trees, params["window"], params["normalize"]):
        (fa, sa), (fb, sb) = frag.a, frag.b
        mod = _module_at_line(by_file.get(fa, []), sa.start_line)
        out.append(ctx.finding(
            "EX1005", sa, (mod.name if mod else None, None, None),
            f"{frag.token_length} tokens duplicated at {fb}:{sb.start_line}",
            {"tokens": frag.token_length, "first": span_text(sa), "second": span_text(sb),
             "normalized": frag.normalized},
        ))
    return out


@rule("EX1006")
def detect_feature_envy(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    modules = ctx.model.modules
    for fn in sorted_functions(ctx.model):
        calls = ctx.function_metrics[fn.target].outbound_calls_by_module
        own = calls.get(fn.module, 0)
        foreign = sorted(
            ((n, m) for m, n in calls.items() if m != fn.module and m in modules),
            key=lambda nm: (-nm[0], nm[1]),
        )
        if not foreign:
            continue
        count, other = foreign[0]
        if count >= params["min_foreign_calls"] and count > own:
            out.append(ctx.finding(
                "EX1006", fn_span(fn), fn_target(fn),
                f"{fn.name}/{fn.arity} calls {other} {count} times but its own module {own} times",
                {"envied_module": other, "foreign_calls": count, "own_calls": own},
            ))
    return out


@rule("EX1007")
def detect_inappropriate_intimacy(ctx: AnalysisContext, params: dict) -> list[Finding]:
    modules = ctx.model.modules
    pairs: Counter[tuple[str, str]] = Counter()
    for site in ctx.model.call_sites:
        a, b = site.caller_module, site.target_module
        if a in modules and b in modules and a != b:
            pairs[(a, b)] += 1
    limit = params["min_mutual_calls"]
    out = []
    for (a, b), ab in sorted(pairs.items()):
        if a > b:
            continue
        ba = pairs.get((b, a), 0)
        if ab >= limit and ba >= limit:
            mod = modules[a]
            out.append(ctx.finding(
                "EX1007", mod.span, mod_target(mod),
                f"{a} and {b} call each other heavily ({ab} and {ba} calls)",
                {"other_module": b, "calls_out": ab, "calls_in": ba},
            ))
    return out


@rule("EX1008")
def detect_speculative_generalization(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for mod in sorted_modules(ctx.model):
        metrics = ctx.module_metrics[mod.name]
        for name, arity in sorted(metrics.uncalled_private_functions):
            fn = mod.functions.get((name, arity, "function")) or mod.functions.get((name, arity, "macro"))
            out.append(ctx.finding(
                "EX1008", fn_span(fn), fn_target(fn),
                f"private {name}/{arity} is never called",
                {"kind": "uncalled_private"},
            ))
        for target, ci, pi in metrics.unused_params:
            fn = next(
                f for f in mod.functions.values() if f.target == target and ci < len(f.clauses)
            )
            clause = fn.clauses[ci]
            if clause.partial:
                continue
            param = clause.params[pi]
            out.append(ctx.finding(
                "EX1008", param.node.span, target,
                f"parameter {param.name} of {fn.name}/{fn.arity} is never used",
                {"kind": "unused_param", "clause": ci, "param": pi, "name": param.name},
            ))
    return out


@rule("EX1009")
def detect_primitive_obsession(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for mod in sorted_modules(ctx.model):
        for names, occ in data_clumps(mod, params["min_clump_size"], params["min_clump_occurrences"]):
            out.append(ctx.finding(
                "EX1009", mod.span, mod_target(mod),
                f"parameters ({', '.join(names)}) travel together through {occ} functions; "
                "consider a struct",
                {"names": list(names), "occurrences": occ},
            ))
    return out
