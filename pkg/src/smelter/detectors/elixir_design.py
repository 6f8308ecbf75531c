"""Detectors for design-related Elixir-specific smells (EX1201-EX1210)."""

from __future__ import annotations

import re

from smelter.detectors._common import (
    fn_span,
    fn_target,
    live_clauses,
    mod_target,
    sorted_functions,
    sorted_modules,
)
from smelter.metrics import message_payload_size
from smelter.model import CallSite, ModuleInfo, ProjectModel, expand_alias
from smelter.rules.engine import AnalysisContext, rule
from smelter.rules.findings import Finding
from smelter.syntax.nodes import (
    ALIAS,
    CALL,
    CASE,
    COND,
    FN,
    IF,
    QUALIFIED_CALL,
    RECEIVE,
    TRY,
    TUPLE,
    UNLESS,
    VARIABLE,
    WITH,
    Node,
    atom_name,
    iter_nodes,
    keyword_get,
    string_value,
    walk_with_parents,
)


def _site_name(site: CallSite) -> str:
    """``Module.fun`` for remote calls, ``fun`` for local/Kernel ones."""
    if site.target_module in (None, "Kernel") and site.node.kind == CALL:
        return site.target_name
    return f"{site.target_module}.{site.target_name}"


def _sites_in(model: ProjectModel, node: Node | None):
    if node is None:
        return
    for n in iter_nodes(node):
        site = model.call_site_for(n)
        if site is not None:
            yield site


# --- EX1201 -------------------------------------------------------------------

_BARE_SPAWNS = frozenset({"spawn", "spawn_link", "spawn_monitor"})


def _module_arg(site: CallSite, mod: ModuleInfo | None, model: ProjectModel) -> str | None:
    if not site.argument_nodes:
        return None
    first = site.argument_nodes[0]
    if first.kind == ALIAS and not first.meta.get("multi"):
        return expand_alias(first.form, mod, model.modules)
    return None


@rule("EX1201")
def detect_unsupervised_process(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    starts = set(params["start_functions"])
    supervised = model.supervised_child_specs
    dynamic = bool(model.dynamic_children_files)
    out = []
    for site in model.call_sites:
        name = _site_name(site)
        if name not in starts or site.capture:
            continue
        if site.target_module is not None and site.target_module in model.modules:
            continue  # a project function that happens to share the name
        caller = model.modules.get(site.caller_module) if site.caller_module else None
        if name in _BARE_SPAWNS:
            started = None
        else:
            started = _module_arg(site, caller, model)
            if started in supervised or site.caller_module in supervised:
                continue
        what = f"{name} of {started}" if started else name
        out.append(ctx.finding(
            "EX1201", site.span, site.caller,
            f"{what} starts a process outside any supervision tree",
            {"call": name, "started_module": started, "dynamic_children": dynamic},
            heuristic=dynamic,
        ))
    return out


# --- EX1202 -------------------------------------------------------------------

_GENSERVER_CALLBACKS = (("handle_call", 3), ("handle_cast", 2), ("handle_info", 2))


def _module_sites(model: ProjectModel, mod: ModuleInfo) -> list[CallSite]:
    return [s for s in model.call_sites if s.caller_module == mod.name]


@rule("EX1202")
def detect_genserver_envy(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    model = ctx.model
    for mod in sorted_modules(model):
        sites = _module_sites(model, mod)
        apis = sorted({s.target_module for s in sites if s.target_module in ("Task", "Agent")})
        if not apis:
            continue
        is_genserver = mod.uses("GenServer") or "GenServer" in mod.behaviours
        callbacks = [
            f"{n}/{a}" for n, a in _GENSERVER_CALLBACKS if mod.function(n, a) is not None
        ]
        reason = None
        if callbacks and not is_genserver:
            reason = f"defines {', '.join(callbacks)} without use GenServer"
        else:
            for fn in mod.functions.values():
                if any(
                    n.kind == RECEIVE for _, c in live_clauses(fn) for n in iter_nodes(c.body)
                ) and any(s.target_module == "Agent" and s.caller_name == fn.name for s in sites):
                    reason = f"wraps Agent calls in a hand-written receive loop in {fn.name}/{fn.arity}"
                    break
        if reason:
            out.append(ctx.finding(
                "EX1202", mod.span, mod_target(mod),
                f"{mod.name} uses {'/'.join(apis)} like a GenServer: {reason}",
                {"apis": apis, "callbacks": callbacks},
            ))
    return out


# --- EX1203 -------------------------------------------------------------------

_AGENT_ACCESS = frozenset({"get", "update", "get_and_update", "cast"})


def _agent_name(node: Node, mod: ModuleInfo | None, model: ProjectModel) -> str | None:
    if node.kind == ALIAS and not node.meta.get("multi"):
        return expand_alias(node.form, mod, model.modules)
    name = atom_name(node)
    if name is not None and node.form.startswith(":"):
        return ":" + name
    return None


@rule("EX1203")
def detect_agent_obsession(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    clients: dict[str, set[str]] = {}
    first_access: dict[str, CallSite] = {}
    start_sites: dict[str, CallSite] = {}
    for site in model.call_sites:
        if site.target_module != "Agent" or not site.argument_nodes:
            continue
        mod = model.modules.get(site.caller_module) if site.caller_module else None
        if site.target_name in ("start", "start_link"):
            opts = site.argument_nodes[-1]
            name_node = keyword_get(opts, "name")
            if name_node is not None:
                name = _agent_name(name_node, mod, model)
                if name is not None:
                    start_sites.setdefault(name, site)
            continue
        if site.target_name not in _AGENT_ACCESS or site.caller_module is None:
            continue
        name = _agent_name(site.argument_nodes[0], mod, model)
        if name is None:
            continue
        clients.setdefault(name, set()).add(site.caller_module)
        first_access.setdefault(name, site)
    out = []
    for name in sorted(clients):
        users = sorted(clients[name])
        if len(users) >= params["min_client_modules"]:
            anchor = start_sites.get(name) or first_access[name]
            out.append(ctx.finding(
                "EX1203", anchor.span, anchor.caller,
                f"agent {name} is read and written directly from {len(users)} modules",
                {"agent": name, "client_modules": users},
            ))
    return out


# --- EX1204 -------------------------------------------------------------------

_MESSAGE_CALLS = {"send": 1, "GenServer.call": 1, "GenServer.cast": 1, "Process.send": 1}


@rule("EX1204")
def detect_large_messages(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    limit = params["max_payload_nodes"]
    for site in ctx.model.call_sites:
        idx = _MESSAGE_CALLS.get(_site_name(site))
        if idx is None or len(site.argument_nodes) <= idx or site.target_module in ctx.model.modules:
            continue
        size = message_payload_size(site.argument_nodes[idx])
        if size >= limit:
            out.append(ctx.finding(
                "EX1204", site.span, site.caller,
                f"{_site_name(site)} sends a message literal of {size} syntax nodes (limit {limit})",
                {"payload_nodes": size, "max_payload_nodes": limit},
            ))
    return out


# --- EX1205 / EX1206 ----------------------------------------------------------


@rule("EX1205")
def detect_complex_multiclause(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for fn in sorted_functions(ctx.model):
        m = ctx.function_metrics[fn.target]
        if m.clause_count < params["max_clauses"]:
            continue
        if m.total_guard_count >= params["min_guards"] or m.pattern_clause_count >= params["min_pattern_clauses"]:
            out.append(ctx.finding(
                "EX1205", fn_span(fn), fn_target(fn),
                f"{fn.name}/{fn.arity} spreads its logic over {m.clause_count} clauses "
                f"with {m.total_guard_count} guards and {m.pattern_clause_count} pattern clauses",
                {"clauses": m.clause_count, "guards": m.total_guard_count,
                 "pattern_clauses": m.pattern_clause_count},
            ))
    return out


@rule("EX1206")
def detect_complex_api_error_handling(ctx: AnalysisContext, params: dict) -> list[Finding]:
    out = []
    for fn in sorted_functions(ctx.model):
        n = ctx.function_metrics[fn.target].distinct_error_shapes_handled
        if n >= params["max_error_shapes"]:
            out.append(ctx.finding(
                "EX1206", fn_span(fn), fn_target(fn),
                f"{fn.name}/{fn.arity} handles {n} distinct error shapes in one place",
                {"error_shapes": n, "max_error_shapes": params["max_error_shapes"]},
            ))
    return out


# --- EX1207 -------------------------------------------------------------------

_BRANCHING = frozenset({CASE, COND, WITH, IF, UNLESS})


def _is_raise(node: Node, model: ProjectModel) -> bool:
    if node.kind == CALL and node.form in ("raise", "throw") and not node.meta.get("op"):
        site = model.call_site_for(node)
        return site is None or site.target_module is None
    return node.kind == QUALIFIED_CALL and node.form in ("raise", "throw") \
        and node.children[0].kind == ALIAS and node.children[0].form == "Kernel"


@rule("EX1207")
def detect_exceptions_control_flow(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    out = []
    for fn in sorted_functions(model):
        if fn.kind != "function":
            continue
        flagged_fn = False
        for _, clause in live_clauses(fn):
            for node, parents in walk_with_parents(clause.body):
                if (
                    not flagged_fn
                    and fn.visibility == "public"
                    and not fn.name.endswith("!")
                    and _is_raise(node, model)
                    and any(p.kind in _BRANCHING for p in parents)
                ):
                    flagged_fn = True
                    out.append(ctx.finding(
                        "EX1207", fn_span(fn), fn_target(fn),
                        f"{fn.name}/{fn.arity} raises on an ordinary branch; return "
                        f"{{:error, reason}} or name it {fn.name}!",
                        {"kind": "raise_in_branch", "line": node.span.start_line},
                    ))
                if node.kind == TRY and node.section("rescue") is not None:
                    internal = sorted({
                        f"{s.target_module}.{s.target_name}"
                        for s in _sites_in(model, node.section("do"))
                        if s.target_module in model.modules
                    })
                    if internal:
                        out.append(ctx.finding(
                            "EX1207", node.span, fn_target(fn),
                            f"rescue around project code ({', '.join(internal)}) used as control flow",
                            {"kind": "rescue_project_call", "calls": internal},
                        ))
    return out


# --- EX1208 -------------------------------------------------------------------


@rule("EX1208")
def detect_untested_polymorphism(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    protocols = model.protocols
    out = []
    for fn in sorted_functions(model):
        mod = model.modules[fn.module]
        if fn.visibility != "public" or fn.kind != "function" or mod.impl_of or mod.is_protocol:
            continue
        for ci, clause in live_clauses(fn):
            unguarded = {
                p.name: i for i, p in enumerate(clause.params)
                if p.kind == "bare" and i not in clause.guarded_params
            }
            hit = None
            for site in _sites_in(model, clause.body):
                proto = site.target_module
                if proto not in protocols or site.target_name not in protocols[proto]:
                    continue
                first = site.argument_nodes[0] if site.argument_nodes else None
                if first is not None and first.kind == VARIABLE and first.form in unguarded:
                    hit = (site, first.form)
                    break
            if hit:
                site, var = hit
                out.append(ctx.finding(
                    "EX1208", clause.span, fn_target(fn),
                    f"{fn.name}/{fn.arity} passes unguarded parameter {var} to protocol "
                    f"{site.target_module}.{site.target_name}",
                    {"param": var, "protocol": site.target_module, "clause": ci},
                ))
    return out


# --- EX1209 -------------------------------------------------------------------

_STATE_CALLBACKS = {("handle_call", 3): 2, ("handle_cast", 2): 1, ("handle_info", 2): 1}
_AGENT_STATE_CALLS = frozenset({"get", "update", "get_and_update", "cast"})


def _state_untouched(body: Node, state: str) -> bool:
    """True when ``state`` only appears as the unchanged last element of a reply tuple."""
    for node, parents in walk_with_parents(body):
        if node.kind != VARIABLE or node.form != state:
            continue
        parent = parents[-1] if parents else None
        if (
            parent is None
            or parent.kind != TUPLE
            or parent.children[-1] is not node
            or atom_name(parent.children[0]) not in ("reply", "noreply", "stop")
        ):
            return False
    return True


def _genserver_stateless(mod: ModuleInfo) -> bool | None:
    """None when the module has no handle_call; else whether state is never used."""
    seen_call = False
    for (name, arity, kind), fn in mod.functions.items():
        idx = _STATE_CALLBACKS.get((name, arity))
        if idx is None or kind != "function":
            continue
        for _, clause in live_clauses(fn):
            if clause.partial:
                return False
            if name == "handle_call":
                seen_call = True
            p = clause.params[idx]
            if p.kind == "ignored":
                continue
            if p.kind != "bare" or not _state_untouched(clause.body, p.name):
                return False
    return True if seen_call else None


def _fn_ignores_state(node: Node) -> bool:
    if node.kind != FN:
        return False
    for clause in node.children:
        params = clause.params if clause.kind == "clause" else ()
        if not params:
            return False
        if any(not (p.kind == VARIABLE and p.form.startswith("_")) for p in params):
            return False
    return True


@rule("EX1209")
def detect_code_by_process(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    out = []
    for mod in sorted_modules(model):
        stateless = _genserver_stateless(mod)
        if stateless:
            out.append(ctx.finding(
                "EX1209", mod.span, mod_target(mod),
                f"{mod.name} is a GenServer whose callbacks never read or change their state; "
                "plain functions would do",
                {"process_kind": "GenServer"},
            ))
            continue
        if stateless is not None:
            continue
        accesses = [
            s for s in _module_sites(model, mod)
            if s.target_module == "Agent" and s.target_name in _AGENT_STATE_CALLS and len(s.argument_nodes) >= 2
        ]
        if accesses and all(_fn_ignores_state(s.argument_nodes[1]) for s in accesses):
            out.append(ctx.finding(
                "EX1209", mod.span, mod_target(mod),
                f"{mod.name} wraps an Agent whose functions ignore the stored state; "
                "plain functions would do",
                {"process_kind": "Agent", "accesses": len(accesses)},
            ))
    return out


# --- EX1210 -------------------------------------------------------------------

_DDL = frozenset({
    "create", "create_if_not_exists", "alter", "drop", "drop_if_exists",
    "table", "index", "unique_index", "rename", "add", "remove", "modify",
})
_DML_SQL = re.compile(r"\b(insert|update|delete)\b", re.IGNORECASE)


def _is_repo(node: Node) -> bool:
    return node.kind == ALIAS and (node.form == "Repo" or node.form.endswith(".Repo"))


def _is_dml(site: CallSite) -> bool:
    node = site.node
    if node.kind == QUALIFIED_CALL and _is_repo(node.children[0]):
        return site.target_name == "all" or site.target_name.startswith(("insert", "update", "delete"))
    if node.kind == CALL and site.target_name == "execute" and site.argument_nodes:
        text = string_value(site.argument_nodes[0])
        return text is not None and bool(_DML_SQL.search(text))
    return False


@rule("EX1210")
def detect_data_migration(ctx: AnalysisContext, params: dict) -> list[Finding]:
    model = ctx.model
    out = []
    for mod in sorted_modules(model):
        if not mod.is_migration:
            continue
        sites = _module_sites(model, mod)
        ddl = sorted({s.target_name for s in sites if s.node.kind == CALL and s.target_name in _DDL
                      and s.target_module is None})
        dml = [s for s in sites if _is_dml(s)]
        if ddl and dml:
            out.append(ctx.finding(
                "EX1210", mod.span, mod_target(mod),
                f"migration {mod.name} mixes schema changes ({', '.join(ddl)}) with data changes",
                {"ddl": ddl, "dml_calls": len(dml)},
            ))
    return out

