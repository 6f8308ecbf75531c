"""Detectors for low-level Elixir-specific smells (EX1301-EX1308)."""

from __future__ import annotations

from fnmatch import fnmatchcase

from smelter.detectors._common import (
    DEF_CALL_FORMS,
    fn_target,
    is_op,
    live_clauses,
    mod_target,
    sorted_functions,
    sorted_modules,
)
from smelter.model import ClauseInfo, ModuleInfo, ProjectModel, expand_alias, using_macro_summary
from smelter.rules.engine import AnalysisContext, rule
from smelter.rules.findings import Finding, span_text
from smelter.syntax.nodes import (
    ALIAS,
    ATTRIBUTE,
    CALL,
    CASE,
    CLAUSE,
    DEF_KINDS,
    DIRECTIVE,
    MATCH,
    QUALIFIED_CALL,
    STRUCT,
    VARIABLE,
    WITH,
    Node,
    atom_name,
    iter_nodes,
    quote_body,
    walk_with_parents,
)

_CONFIG_READS = frozenset({"get_env", "fetch_env", "fetch_env!"})
_COMPILE_CONFIG = _CONFIG_READS | {"compile_env", "compile_env!"}
_NON_CONFIG_ATTRIBUTES = frozenset({
    "doc", "moduledoc", "typedoc", "spec", "type", "typep", "opaque", "callback",
    "macrocallback", "impl", "behaviour", "behavior", "derive", "enforce_keys",
})


def _is_access(node: Node) -> bool:
    return node.kind == QUALIFIED_CALL and bool(node.meta.get("access"))


def _remote(node: Node, module: str, names) -> bool:
    return (
        node.kind == QUALIFIED_CALL
        and node.children[0].kind == ALIAS
        and node.children[0].form == module
        and node.form in names
    )


# --- EX1301 -------------------------------------------------------------------

_CRASHING = frozenset({"raise", "reraise", "throw", "exit"})
_ARITH = ("+", "-", "*", "/", "<>", "++")


def _unsafe_use(clause: ClauseInfo, names: set[str]) -> tuple[str, str] | None:
    """(param, how) for the first raw use of an unvalidated parameter."""
    for node in iter_nodes(clause.body):
        if is_op(node, *_ARITH) and len(node.children) == 2:
            for c in node.children:
                if c.kind == VARIABLE and c.form in names:
                    return c.form, f"operator {node.form}"
        elif _is_access(node):
            subject = node.children[1]
            if subject.kind == VARIABLE and subject.form in names:
                return subject.form, "indexed access"
    return None


@rule("EX1301")
def detect_invalid_data(ctx: AnalysisContext, params: dict) -> list[Finding]:
    globs = params["boundary_globs"]
    out = []
    for fn in sorted_functions(ctx.model):
        if fn.visibility != "public" or fn.kind != "function":
            continue
        if not any(fnmatchcase(fn.module, g) or fnmatchcase(fn.file, g) for g in globs):
            continue
        for ci, clause in live_clauses(fn):
            names = {
                p.name for i, p in enumerate(clause.params)
                if p.kind == "bare" and i not in clause.guarded_params
            }
            hit = _unsafe_use(clause, names) if names else None
            if hit:
                param, how = hit
                out.append(ctx.finding(
                    "EX1301", clause.span, fn_target(fn),
                    f"{fn.name}/{fn.arity} uses boundary input {param} unvalidated ({how})",
                    {"param": param, "use": how, "clause": ci},
                ))
    return out


# --- EX1302 -------------------------------------------------------------------


def _struct_bindings(clause: ClauseInfo, mod: ModuleInfo, model: ProjectModel) -> dict[str, str]:
    bound: dict[str, str] = {}
    roots = [p.node for p in clause.params if p.node is not None]
    if clause.body is not None:
        roots.append(clause.body)
    for root in roots:
        for n in iter_nodes(root):
            if n.kind != MATCH:
                continue
            left, right = n.children
            for s, v in ((left, right), (right, left)):
                if s.kind == STRUCT and v.kind == VARIABLE and not s.meta.get("update"):
                    bound[v.form] = expand_alias(s.form, mod, model.modules)
    return bound


@rule("EX1302")
def detect_dynamic_struct_access(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    out = []
    for fn in sorted_functions(model):
        mod = model.modules[fn.module]
        for _, clause in live_clauses(fn):
            bound = _struct_bindings(clause, mod, model)
            if not bound:
                continue
            for node in iter_nodes(clause.body):
                if _is_access(node):
                    subject = node.children[1]
                    if subject.kind == VARIABLE and subject.form in bound:
                        out.append(ctx.finding(
                            "EX1302", node.span, fn_target(fn),
                            f"{subject.form} is a %{bound[subject.form]}{{}} struct; "
                            f"use static field access instead of {subject.form}[...]",
                            {"variable": subject.form, "struct": bound[subject.form], "kind": "bracket_access"},
                        ))
                elif node.kind == QUALIFIED_CALL and node.meta.get("no_parens") and len(node.children) == 1:
                    subject = node.children[0]
                    if subject.kind != VARIABLE or subject.form not in bound:
                        continue
                    struct = model.modules.get(bound[subject.form])
                    if struct is None or struct.struct_def is None or node.form in struct.struct_def:
                        continue
                    out.append(ctx.finding(
                        "EX1302", node.span, fn_target(fn),
                        f"struct {struct.name} has no field {node.form}",
                        {"variable": subject.form, "struct": struct.name, "field": node.form,
                         "kind": "unknown_field"},
                    ))
    return out


# --- EX1303 -------------------------------------------------------------------


def _catch_all(clause: Node) -> bool:
    """A ``_ -> default`` clause; one that raises or exits is not a silent default."""
    if clause.kind != CLAUSE or clause.meta.get("npatterns") != 1 or clause.meta.get("guard"):
        return False
    if clause.children[0].kind != VARIABLE:
        return False
    return not any(
        n.kind in (CALL, QUALIFIED_CALL) and n.form in _CRASHING for n in iter_nodes(clause.clause_body)
    )


def _handles_error(clauses) -> bool:
    return any(c.kind == CLAUSE and c.children and atom_name(c.children[0]) == "error" for c in clauses)


def _silenced(node: Node, parents: tuple[Node, ...]) -> str | None:
    parent = parents[-1] if parents else None
    if parent is None:
        return None
    if is_op(parent, "||") and parent.children[0] is node:
        return "|| fallback"
    if parent.kind == CASE and parent.children[0] is node:
        block = parent.section("do")
        clauses = block.children if block is not None else ()
        if any(_catch_all(c) for c in clauses) and not _handles_error(clauses):
            return "catch-all case clause"
    if parent.kind == CLAUSE and parent.form == "<-" and parent.children[-1] is node and len(parents) >= 2:
        with_node = parents[-2]
        if with_node.kind == WITH:
            block = with_node.section("else")
            clauses = block.children if block is not None else ()
            if any(_catch_all(c) for c in clauses) and not _handles_error(clauses):
                return "catch-all with/else clause"
    return None


@rule("EX1303")
def detect_unplanned_extraction(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    wanted = set(params["parse_functions"])
    out = []
    for file in sorted(model.trees):
        for root in model.trees[file].root:
            for node, parents in walk_with_parents(root):
                site = model.call_site_for(node)
                if site is None or node.kind != QUALIFIED_CALL:
                    continue
                name = f"{site.target_module}.{site.target_name}"
                if name not in wanted:
                    continue
                how = _silenced(node, parents)
                if how:
                    out.append(ctx.finding(
                        "EX1303", node.span, site.caller,
                        f"failure of {name} is silently replaced by a default ({how})",
                        {"call": name, "fallback": how},
                    ))
    return out


# --- EX1304 -------------------------------------------------------------------


@rule("EX1304")
def detect_duplicate_module_names(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for name, spans in ctx.model.duplicate_module_names:
        ordered = sorted(spans)
        out.append(ctx.finding(
            "EX1304", ordered[0], (name, None, None),
            f"module {name} is defined {len(ordered)} times",
            {"definitions": [span_text(s) for s in ordered]},
        ))
    return out


# --- EX1305 -------------------------------------------------------------------


def _injects_code(node: Node) -> bool:
    """Whether a quoted expression defines things in, or splices AST into, the caller."""
    for n in iter_nodes(node):
        if n.kind in DEF_KINDS or n.kind == DIRECTIVE:
            return True
        if n.kind == CALL and (n.form in DEF_CALL_FORMS or n.form in ("var!", "unquote_splicing")):
            return True
        if n.kind == ATTRIBUTE and n.children:
            return True
    return False


def _value_unquotes_only(body: list[Node], params: set[str]) -> bool:
    for expr in body:
        for n, parents in walk_with_parents(expr):
            if n.kind != CALL or n.form != "unquote":
                continue
            args = n.children
            if len(args) != 1 or args[0].kind != VARIABLE or args[0].form not in params:
                return False
            parent = parents[-1] if parents else None
            if parent is not None and (parent.kind == MATCH and parent.children[0] is n):
                return False  # used as a pattern
            if parent is not None and parent.kind == CALL and parent.form == ".()" and parent.children[0] is n:
                return False  # used as a function name
    return True


@rule("EX1305")
def detect_unnecessary_macro(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for fn in sorted_functions(ctx.model):
        if fn.kind != "macro" or fn.name.startswith("__"):
            continue
        clauses = list(live_clauses(fn))
        if not clauses:
            continue
        ok = True
        for _, clause in clauses:
            exprs = clause.body.children
            inner = quote_body(exprs[0]) if len(exprs) == 1 else None
            names = {p.name for p in clause.params if p.kind == "bare"}
            if (
                inner is None
                or clause.partial
                or any(_injects_code(e) for e in inner)
                or not _value_unquotes_only(inner, names)
            ):
                ok = False
                break
        if ok:
            out.append(ctx.finding(
                "EX1305", fn.clauses[0].span, fn_target(fn),
                f"macro {fn.name}/{fn.arity} only computes with its arguments' values; "
                "a function would do",
                {"clauses": len(clauses)},
            ))
    return out


# --- EX1306 / EX1307 ----------------------------------------------------------


def _is_application_module(mod: ModuleInfo) -> bool:
    return mod.uses("Application") or "Application" in mod.behaviours


@rule("EX1306")
def detect_app_config_in_lib(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    globs = params["lib_globs"]
    out = []
    for site in model.call_sites:
        if site.target_module != "Application" or site.target_name not in _CONFIG_READS:
            continue
        if site.caller_name is None or site.caller_module not in model.modules:
            continue
        mod = model.modules[site.caller_module]
        if _is_application_module(mod) or not any(fnmatchcase(site.file, g) for g in globs):
            continue
        out.append(ctx.finding(
            "EX1306", site.span, site.caller,
            f"library code reads global configuration via Application.{site.target_name}; "
            "accept it as an option instead",
            {"call": f"Application.{site.target_name}"},
        ))
    return out


@rule("EX1307")
def detect_compile_time_config(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for mod in sorted_modules(ctx.model):
        for name in sorted(mod.attributes):
            if name in _NON_CONFIG_ATTRIBUTES:
                continue
            for attr in mod.attributes[name]:
                call = next(
                    (n for n in iter_nodes(attr) if _remote(n, "Application", _COMPILE_CONFIG)), None
                )
                if call is not None:
                    out.append(ctx.finding(
                        "EX1307", attr.span, mod_target(mod),
                        f"@{name} freezes Application.{call.form} at compile time",
                        {"attribute": name, "call": f"Application.{call.form}"},
                    ))
    return out


# --- EX1308 -------------------------------------------------------------------


@rule("EX1308")
def detect_use_vs_import(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    out = []
    for mod in sorted_modules(model):
        for d in mod.directives:
            if d.kind != "use" or d.target not in model.modules:
                continue
            if using_macro_summary(model.modules[d.target]) == "only_imports_aliases":
                out.append(ctx.finding(
                    "EX1308", d.node.span, mod_target(mod),
                    f"use {d.target} only imports or aliases; write the import/alias directly",
                    {"used_module": d.target},
                ))
    return out
