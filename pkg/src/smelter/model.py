"""Cross-file semantic index of an Elixir project.

:func:`build_model` walks every (pipe-desugared) tree twice.  The first pass
registers modules, functions, structs, directives and attributes; the
second records one :class:`CallSite` per call node and resolves its target
against the complete module inventory, so call order across files does not
matter.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from smelter.syntax.nodes import (
    ALIAS,
    ATTRIBUTE,
    BLOCK,
    CALL,
    CALL_KINDS,
    DEF_KINDS,
    DIRECTIVE,
    KEYWORD_LIST,
    LIST,
    LITERAL,
    MACRO_DEF,
    MAP,
    MATCH,
    MODULE_DEF,
    OPAQUE,
    PROTOCOL_DEF,
    PROTOCOL_IMPL,
    QUALIFIED_CALL,
    STRUCT,
    STRUCT_DEF,
    TUPLE,
    VARIABLE,
    Node,
    SyntaxTree,
    atom_name,
    call_args,
    iter_nodes,
    keyword_get,
    keyword_pairs,
    quote_body,
)
from smelter.syntax.spans import SourceSpan

MIGRATION_MODULE = "Ecto.Migration"
SUPPRESSION_RE = re.compile(r"^\s*smelter:")
_GUARD_JOINERS = {"and", "or", "&&", "||", "when"}


@dataclass(frozen=True)
class ParamPattern:
    """Shape of one parameter pattern in a clause head."""

    kind: str  # bare | literal | struct | map | tuple | list | ignored
    names: tuple[str, ...] = ()  # variables bound by the pattern
    struct_name: str | None = None
    node: Node | None = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str | None:
        """The variable name of a bare parameter."""
        return self.names[0] if self.kind == "bare" and self.names else None


@dataclass
class ClauseInfo:
    params: tuple[ParamPattern, ...]
    guard_count: int
    guarded_params: frozenset[int]
    body: Node | None
    node: Node
    guard: Node | None
    line_count: int
    comment_line_count: int
    bodiless: bool = False
    partial: bool = False

    @property
    def span(self) -> SourceSpan:
        return self.node.span


@dataclass
class FunctionInfo:
    module: str
    name: str
    arity: int
    visibility: str  # public | private
    kind: str  # function | macro
    clauses: list[ClauseInfo]
    span: SourceSpan
    doc_present: bool
    file: str
    min_arity: int
    keyword: str = "def"

    @property
    def target(self) -> tuple[str, str, int]:
        return (self.module, self.name, self.arity)

    @property
    def body_clauses(self) -> list[ClauseInfo]:
        """Clauses with a body; bodiless heads only declare defaults."""
        real = [c for c in self.clauses if not c.bodiless]
        return real or self.clauses


@dataclass(frozen=True)
class Directive:
    kind: str  # use | import | alias | require
    target: str  # expanded module name
    node: Node = field(compare=False, repr=False)
    options: Node | None = field(default=None, compare=False, repr=False)


@dataclass
class ModuleInfo:
    name: str
    file: str
    span: SourceSpan
    node: Node = field(repr=False)
    parent: str | None = None
    functions: dict[tuple[str, int, str], FunctionInfo] = field(default_factory=dict)
    struct_def: tuple[str, ...] | None = None
    attributes: dict[str, tuple[Node, ...]] = field(default_factory=dict)
    directives: list[Directive] = field(default_factory=list)
    aliases: dict[str, str] = field(default_factory=dict)
    behaviours: list[str] = field(default_factory=list)
    is_migration: bool = False
    is_protocol: bool = False
    impl_of: str | None = None
    defines_using_macro: bool = False
    using_macro_body: Node | None = field(default=None, repr=False)

    @property
    def line_count(self) -> int:
        return self.span.end_line - self.span.start_line + 1

    def function(self, name: str, arity: int) -> FunctionInfo | None:
        for kind in ("function", "macro"):
            fn = self.functions.get((name, arity, kind))
            if fn is not None:
                return fn
        for fn in self.functions.values():
            if fn.name == name and fn.min_arity <= arity <= fn.arity:
                return fn
        return None

    def uses(self, target: str) -> bool:
        return any(d.kind == "use" and d.target == target for d in self.directives)


@dataclass
class CallSite:
    caller_module: str | None
    caller_name: str | None
    caller_arity: int | None
    target_module: str | None  # None means unresolved
    target_name: str
    target_arity: int | None  # None means unknown
    span: SourceSpan
    argument_nodes: tuple[Node, ...] = field(repr=False)
    node: Node = field(repr=False)
    file: str
    external: bool = False
    capture: bool = False

    @property
    def caller(self) -> tuple[str | None, str | None, int | None]:
        return (self.caller_module, self.caller_name, self.caller_arity)

    @property
    def resolved(self) -> bool:
        return self.target_module is not None


@dataclass(frozen=True)
class ChildSpecs:
    modules: frozenset[str]
    dynamic_files: frozenset[str]


@dataclass
class ProjectModel:
    modules: dict[str, ModuleInfo] = field(default_factory=dict)
    protocols: dict[str, frozenset[str]] = field(default_factory=dict)
    protocol_impls: dict[str, set[str]] = field(default_factory=dict)
    duplicate_module_names: list[tuple[str, tuple[SourceSpan, ...]]] = field(default_factory=list)
    call_sites: list[CallSite] = field(default_factory=list)
    supervised_child_specs: frozenset[str] = frozenset()
    dynamic_children_files: frozenset[str] = frozenset()
    trees: dict[str, SyntaxTree] = field(default_factory=dict)
    _by_node: dict[int, CallSite] = field(default_factory=dict, repr=False)
    # every module definition node, including duplicates that were not kept
    _module_nodes: dict[int, ModuleInfo] = field(default_factory=dict, repr=False)

    def functions(self) -> Iterator[FunctionInfo]:
        for mod in self.modules.values():
            yield from mod.functions.values()

    def call_site_for(self, node: Node) -> CallSite | None:
        return self._by_node.get(id(node))

    def module_at(self, file: str, offset: int) -> ModuleInfo | None:
        """Innermost module of ``file`` whose definition spans ``offset``."""
        best = None
        for mod in self.modules.values():
            if mod.file == file and mod.node.start <= offset < mod.node.end:
                if best is None or mod.node.start >= best.node.start:
                    best = mod
        return best


# --- helpers --------------------------------------------------------------


def expand_alias(name: str, module: ModuleInfo | None, modules: dict[str, ModuleInfo]) -> str:
    """Expand a (possibly aliased) module reference as seen from ``module``."""
    if name.startswith("Elixir."):
        name = name[len("Elixir."):]
    if module is None:
        return name
    if name == "__MODULE__":
        return module.name
    if name.startswith("__MODULE__."):
        return module.name + name[len("__MODULE__"):]
    first, _, rest = name.partition(".")
    scope: ModuleInfo | None = module
    while scope is not None:
        if first in scope.aliases:
            full = scope.aliases[first]
            return f"{full}.{rest}" if rest else full
        scope = modules.get(scope.parent) if scope.parent else None
    return name


def classify_param(node: Node) -> ParamPattern:
    if node.kind == CALL and node.form == "\\\\" and node.meta.get("op"):
        return classify_param(node.children[0])
    names = tuple(_bound_names(node))
    kind = node.kind
    if kind == MATCH:
        left, right = node.children
        inner = right if left.kind == VARIABLE else left
        if left.kind == VARIABLE and right.kind == VARIABLE:
            inner = left
        sub = classify_param(inner)
        if sub.kind in ("bare", "ignored"):
            return ParamPattern(sub.kind, names, None, node)
        return ParamPattern(sub.kind, names, sub.struct_name, node)
    if kind == VARIABLE:
        if node.form.startswith("_"):
            return ParamPattern("ignored", (), None, node)
        return ParamPattern("bare", (node.form,), None, node)
    if kind == STRUCT:
        return ParamPattern("struct", names, node.form, node)
    if kind == MAP:
        return ParamPattern("map", names, None, node)
    if kind == TUPLE:
        return ParamPattern("tuple", names, None, node)
    if kind in (LIST, KEYWORD_LIST):
        return ParamPattern("list", names, None, node)
    return ParamPattern("literal", names, None, node)


def _bound_names(node: Node) -> Iterator[str]:
    stack = [node]
    while stack:
        n = stack.pop()
        if n.kind == CALL and n.form == "^" and n.meta.get("op"):
            continue  # pinned: a read, not a binding
        if n.kind == CALL and n.form == "\\\\" and n.meta.get("op"):
            stack.append(n.children[0])
            continue
        if n.kind == VARIABLE and not n.form.startswith("_"):
            yield n.form
        stack.extend(reversed(n.children))


def guard_conditions(guard: Node | None) -> list[Node]:
    """Atomic conditions of a guard, split on and/or/when."""
    if guard is None:
        return []
    out, stack = [], [guard]
    while stack:
        n = stack.pop()
        if n.kind == CALL and n.meta.get("op") and n.form in _GUARD_JOINERS and len(n.children) == 2:
            stack.extend(reversed(n.children))
        else:
            out.append(n)
    return out


def has_opaque(node: Node | None) -> bool:
    if node is None:
        return False
    return any(n.kind == OPAQUE and not n.meta.get("typespec") for n in iter_nodes(node))


def def_body(node: Node) -> Node | None:
    """The ``do`` section of a definition (None for bodiless heads)."""
    return node.section("do")


class _CommentLines:
    """Line numbers of ``#`` comments in one file, for range counting."""

    def __init__(self, tree: SyntaxTree) -> None:
        lines = {
            c.span.start_line
            for c in tree.comments
            if c.kind == "line" and not SUPPRESSION_RE.match(c.text)
        }
        self.lines = sorted(lines)

    def count(self, first: int, last: int) -> int:
        return bisect.bisect_right(self.lines, last) - bisect.bisect_left(self.lines, first)


# --- pass 1: declarations -------------------------------------------------


class _Builder:
    def __init__(self) -> None:
        self.model = ProjectModel()
        self.seen_spans: dict[str, list[SourceSpan]] = {}
        self.protocol_functions: dict[str, set[str]] = {}

    def register_module(self, name: str, file: str, node: Node, parent: ModuleInfo | None) -> ModuleInfo | None:
        self.seen_spans.setdefault(name, []).append(node.span)
        if name in self.model.modules:
            return None
        mod = ModuleInfo(name, file, node.span, node, parent.name if parent else None)
        self.model.modules[name] = mod
        return mod

    def declarations(self, file: str, tree: SyntaxTree) -> None:
        comments = _CommentLines(tree)
        # stack entries: (node, enclosing module, inside a quote block)
        stack: list[tuple[Node, ModuleInfo | None, bool]] = [
            (n, None, False) for n in reversed(tree.root)
        ]
        docs: dict[str, bool] = {}
        modules = self.model.modules
        while stack:
            node, mod, in_quote = stack.pop()
            kind = node.kind
            if in_quote:
                stack.extend((c, mod, True) for c in reversed(node.children))
                continue
            if kind in (MODULE_DEF, PROTOCOL_DEF):
                name = self._module_name(node.form, mod)
                if mod is not None and "." not in node.form and not node.form.startswith("__MODULE__"):
                    mod.aliases.setdefault(node.form, name)
                elif mod is not None and not node.form.startswith("__MODULE__"):
                    head = node.form.split(".")[0]
                    mod.aliases.setdefault(head, f"{mod.name}.{head}")
                new = self.register_module(name, file, node, mod)
                if new is not None and kind == PROTOCOL_DEF:
                    new.is_protocol = True
                    self.protocol_functions.setdefault(name, set())
                inner = new if new is not None else _Shadow.of(name, file, node, mod)
                self.model._module_nodes[id(node)] = inner
                stack.extend((c, inner, False) for c in reversed(node.children[1:]))
                continue
            if kind == PROTOCOL_IMPL:
                proto = expand_alias(node.form, mod, modules)
                types = [expand_alias(t, mod, modules) for t in node.meta.get("for_types", ())]
                if not types and mod is not None:
                    types = [mod.name]
                for t in types:
                    self.model.protocol_impls.setdefault(proto, set()).add(t)
                name = f"{proto}.{types[0]}" if types else proto
                new = self.register_module(name, file, node, mod)
                if new is not None:
                    new.impl_of = proto
                inner = new if new is not None else _Shadow.of(name, file, node, mod)
                self.model._module_nodes[id(node)] = inner
                body = [c for c in node.children if c.kind == BLOCK and c.meta.get("section")]
                stack.extend((c, inner, False) for c in reversed(body))
                continue
            if mod is None:
                stack.extend((c, None, False) for c in reversed(node.children))
                continue
            if kind in DEF_KINDS:
                self._add_def(file, node, mod, docs, comments)
                stack.extend((c, mod, False) for c in reversed(node.children))
                continue
            if kind == CALL and node.form == "quote":
                stack.extend((c, mod, True) for c in reversed(node.children))
                continue
            if kind == DIRECTIVE:
                self._add_directive(node, mod)
                continue
            if kind == STRUCT_DEF:
                if mod.struct_def is None:
                    mod.struct_def = tuple(node.meta.get("fields", ()))
                continue
            if kind == ATTRIBUTE and node.children:
                mod.attributes[node.form] = mod.attributes.get(node.form, ()) + (node,)
                if node.form == "doc":
                    docs[mod.name] = True
                elif node.form in ("behaviour", "behavior") and node.children[0].kind == ALIAS:
                    mod.behaviours.append(expand_alias(node.children[0].form, mod, modules))
                continue
            stack.extend((c, mod, False) for c in reversed(node.children))

    def _module_name(self, form: str, parent: ModuleInfo | None) -> str:
        if parent is None:
            return expand_alias(form, None, self.model.modules)
        if form.startswith("__MODULE__"):
            return expand_alias(form, parent, self.model.modules)
        return f"{parent.name}.{form}"

    def _add_directive(self, node: Node, mod: ModuleInfo) -> None:
        args = call_args(node)
        target_node = args[0]
        options = args[1] if len(args) > 1 and args[1].kind == KEYWORD_LIST else None
        if target_node.kind == ALIAS and target_node.meta.get("multi"):
            base = expand_alias(target_node.form[: -len(".{}")], mod, self.model.modules)
            for child in target_node.children:
                if child.kind == ALIAS:
                    full = f"{base}.{child.form}"
                    mod.directives.append(Directive(node.form, full, node, options))
                    if node.form == "alias":
                        mod.aliases[child.form.split(".")[-1]] = full
            return
        raw = node.meta.get("target", "")
        target = expand_alias(raw, mod, self.model.modules) if target_node.kind == ALIAS else ":" + raw
        mod.directives.append(Directive(node.form, target, node, options))
        if node.form == "alias" and target_node.kind == ALIAS:
            as_node = keyword_get(options, "as")
            short = as_node.form if as_node is not None and as_node.kind == ALIAS else target.split(".")[-1]
            mod.aliases[short] = target
        if node.form == "use" and target == MIGRATION_MODULE:
            mod.is_migration = True

    def _add_def(self, file: str, node: Node, mod: ModuleInfo, docs: dict[str, bool], comments: _CommentLines) -> None:
        head = node.head
        params = head.children if head is not None else ()
        kind = "macro" if node.kind == MACRO_DEF else "function"
        arity = node.meta.get("arity", len(params))
        defaults = sum(1 for p in params if p.kind == CALL and p.form == "\\\\" and p.meta.get("op"))
        key = (node.form, arity, kind)
        body = def_body(node)
        patterns = tuple(classify_param(p) for p in params)
        guard = node.guard
        conds = guard_conditions(guard)
        guard_vars = {v.form for c in conds for v in iter_nodes(c) if v.kind == VARIABLE}
        guarded = frozenset(i for i, p in enumerate(patterns) if set(p.names) & guard_vars)
        span = node.span
        clause = ClauseInfo(
            params=patterns,
            guard_count=len(conds),
            guarded_params=guarded,
            body=body,
            node=node,
            guard=guard,
            line_count=span.end_line - span.start_line + 1,
            comment_line_count=comments.count(span.start_line, span.end_line),
            bodiless=body is None and node.meta.get("keyword") != "defdelegate",
            partial=has_opaque(node),
        )
        fn = mod.functions.get(key)
        if fn is None:
            fn = FunctionInfo(
                module=mod.name,
                name=node.form,
                arity=arity,
                visibility=node.meta.get("visibility", "public"),
                kind=kind,
                clauses=[clause],
                span=span,
                doc_present=docs.pop(mod.name, False),
                file=file,
                min_arity=arity - defaults,
                keyword=node.meta.get("keyword", "def"),
            )
            mod.functions[key] = fn
        else:
            fn.clauses.append(clause)
            fn.min_arity = min(fn.min_arity, arity - defaults)
            docs.pop(mod.name, None)
        if mod.is_protocol:
            self.protocol_functions.setdefault(mod.name, set()).add(node.form)
        if kind == "macro" and node.form == "__using__" and not mod.defines_using_macro:
            mod.defines_using_macro = True
            mod.using_macro_body = body


class _Shadow(ModuleInfo):
    """Stand-in for a duplicate module: its body is walked but not recorded."""

    @classmethod
    def of(cls, name: str, file: str, node: Node, parent: ModuleInfo | None) -> _Shadow:
        return cls(name, file, node.span, node, parent.name if parent else None)


# --- pass 2: call sites ---------------------------------------------------


def _target_arity(node: Node) -> int:
    if "capture_arity" in node.meta:
        return node.meta["capture_arity"]
    return len(call_args(node))


def _resolve(node: Node, mod: ModuleInfo | None, model: ProjectModel) -> tuple[str | None, bool]:
    """(target module or None, external?) for one call node."""
    modules = model.modules
    if node.kind == QUALIFIED_CALL:
        recv = node.children[0]
        if recv.kind == ALIAS and not recv.meta.get("multi"):
            target = expand_alias(recv.form, mod, modules)
            return target, target not in modules
        name = atom_name(recv)
        if name is not None and recv.form.startswith(":"):
            return ":" + name, True
        return None, False
    if node.meta.get("op") or node.form in (".()", "<<>>"):
        return None, False
    if mod is None:
        return None, False
    arity = _target_arity(node)
    if mod.function(node.form, arity) is not None:
        return mod.name, False
    for d in mod.directives:
        if d.kind != "import" or d.target not in modules:
            continue
        if _import_allows(d, node.form, arity):
            fn = modules[d.target].function(node.form, arity)
            if fn is not None and fn.visibility == "public":
                return d.target, False
    return None, False


def _import_allows(d: Directive, name: str, arity: int) -> bool:
    only = keyword_get(d.options, "only")
    exclude = keyword_get(d.options, "except")

    def listed(spec: Node | None) -> bool:
        if spec is None or spec.kind != KEYWORD_LIST:
            return False
        for k, v in keyword_pairs(spec):
            if atom_name(k) == name and v.kind == LITERAL and v.meta.get("value") == arity:
                return True
        return False

    if only is not None and only.kind == KEYWORD_LIST and not listed(only):
        return False
    return not listed(exclude)


def _call_sites(file: str, tree: SyntaxTree, model: ProjectModel, specs: _SpecCollector) -> None:
    stack: list[tuple[Node, ModuleInfo | None, FunctionInfo | None, Node | None]] = [
        (n, None, None, None) for n in reversed(tree.root)
    ]
    while stack:
        node, mod, fn, def_node = stack.pop()
        kind = node.kind
        if kind in (MODULE_DEF, PROTOCOL_DEF, PROTOCOL_IMPL):
            mod = model._module_nodes.get(id(node), mod)
            fn, def_node = None, None
        elif kind in DEF_KINDS and mod is not None and fn is None:
            arity = node.meta.get("arity", 0)
            key = (node.form, arity, "macro" if kind == MACRO_DEF else "function")
            cand = mod.functions.get(key)
            if cand is not None and any(c.node is node for c in cand.clauses):
                fn, def_node = cand, node
        elif kind in CALL_KINDS:
            target, external = _resolve(node, mod, model)
            site = CallSite(
                caller_module=mod.name if mod else None,
                caller_name=fn.name if fn else None,
                caller_arity=fn.arity if fn else None,
                target_module=target,
                target_name=node.form,
                target_arity=None if node.form in (".()",) else _target_arity(node),
                span=node.span,
                argument_nodes=call_args(node),
                node=node,
                file=file,
                external=external,
                capture="capture_arity" in node.meta,
            )
            model.call_sites.append(site)
            model._by_node[id(node)] = site
            specs.visit(file, node, mod, def_node or (mod.node if mod else None), model)
        stack.extend((c, mod, fn, def_node) for c in reversed(node.children))


# --- child specs ----------------------------------------------------------

SUPERVISOR_STARTS = {
    ("Supervisor", "start_link"): 0,
    ("Supervisor", "init"): 0,
    ("DynamicSupervisor", "start_child"): 1,
}


class _SpecCollector:
    def __init__(self) -> None:
        self.modules: set[str] = set()
        self.dynamic: set[str] = set()

    def visit(self, file: str, node: Node, mod: ModuleInfo | None, scope: Node | None, model: ProjectModel | None) -> None:
        if node.kind != QUALIFIED_CALL:
            return
        recv = node.children[0]
        if recv.kind != ALIAS:
            return
        key = (recv.form, node.form)
        if key not in SUPERVISOR_STARTS:
            return
        args = call_args(node)
        pos = SUPERVISOR_STARTS[key]
        if len(args) <= pos:
            return
        modules = model.modules if model is not None else {}
        if mod is None and model is not None:
            mod = model.module_at(file, node.start)

        def add(name: str) -> None:
            self.modules.add(expand_alias(name, mod, modules))

        arg = args[pos]
        if recv.form == "DynamicSupervisor":
            found = []
            self._element(arg, found.append)
            for name in found:
                add(name)
            if not found:
                self.dynamic.add(file)
            return
        elements = self._list_value(arg, node, scope)
        if elements is None:
            self.dynamic.add(file)
            return
        for e in elements:
            self._element(e, add)

    def _list_value(self, arg: Node, call: Node, scope: Node | None) -> tuple[Node, ...] | None:
        if arg.kind == LIST:
            return arg.children
        if arg.kind == VARIABLE and scope is not None:
            bound = None
            for n in iter_nodes(scope):
                if n.start >= call.start:
                    continue
                if n.kind == MATCH and n.children[0].kind == VARIABLE and n.children[0].form == arg.form:
                    if bound is None or n.start > bound.start:
                        bound = n
            if bound is not None and bound.children[1].kind == LIST:
                return bound.children[1].children
        return None

    def _element(self, e: Node, add) -> None:
        if e.kind == ALIAS:
            add(e.form)
        elif e.kind == TUPLE and e.children and e.children[0].kind == ALIAS:
            add(e.children[0].form)
        elif e.kind in (MAP, KEYWORD_LIST):
            for k, v in keyword_pairs(e):
                if atom_name(k) == "start" and v.kind == TUPLE and v.children and v.children[0].kind == ALIAS:
                    add(v.children[0].form)
        elif e.kind == QUALIFIED_CALL and e.form == "child_spec" and len(e.children) > 1:
            self._element(e.children[1], add)
        elif e.kind == CALL and e.form in ("worker", "supervisor") and e.children:
            self._element(e.children[0], add)


def collect_child_specs(trees: Iterable[tuple[str, SyntaxTree]], model: ProjectModel | None = None) -> ChildSpecs:
    """Module names placed in supervisor child lists.

    Child lists that cannot be read statically (built by a function call,
    say) contribute nothing and mark their file as having dynamic children.
    Aliases are expanded when a model is given.
    """
    collector = _SpecCollector()
    for file, tree in sorted(trees, key=lambda ft: ft[0]):
        stack: list[tuple[Node, Node | None]] = [(n, n) for n in tree.root]
        while stack:
            node, scope = stack.pop()
            if node.kind in DEF_KINDS:
                scope = node
            collector.visit(file, node, None, scope, model)
            stack.extend((c, scope) for c in node.children)
    return ChildSpecs(frozenset(collector.modules), frozenset(collector.dynamic))


# --- entry points ---------------------------------------------------------


def build_model(trees: Iterable[tuple[str, SyntaxTree]]) -> ProjectModel:
    """Index every module, function and call site of the given trees.

    Files are processed in path order so the result does not depend on the
    order of the input.
    """
    ordered = sorted(trees, key=lambda ft: ft[0])
    builder = _Builder()
    model = builder.model
    for file, tree in ordered:
        model.trees[file] = tree
        builder.declarations(file, tree)
    for name, spans in builder.seen_spans.items():
        if len(spans) > 1:
            model.duplicate_module_names.append((name, tuple(spans)))
    model.duplicate_module_names.sort(key=lambda d: d[0])
    model.protocols = {p: frozenset(fs) for p, fs in sorted(builder.protocol_functions.items())}
    specs = _SpecCollector()
    for file, tree in ordered:
        _call_sites(file, tree, model, specs)
    model.supervised_child_specs = frozenset(specs.modules)
    model.dynamic_children_files = frozenset(specs.dynamic)
    return model


def using_macro_summary(module: ModuleInfo) -> str:
    """Classify what a module's ``__using__`` macro injects into callers.

    Returns ``no_using``, ``only_imports_aliases``, ``defines_other_forms``
    or ``opaque``.
    """
    if not module.defines_using_macro:
        return "no_using"
    body = module.using_macro_body
    if body is None or has_opaque(body):
        return "opaque" if body is not None else "defines_other_forms"
    quote = next((n for n in iter_nodes(body) if n.kind == CALL and n.form == "quote"), None)
    if quote is None:
        return "defines_other_forms"
    forms = quote_body(quote) or []
    if forms and all(
        (f.kind == DIRECTIVE and f.form in ("import", "alias", "require"))
        or (f.kind == CALL and f.form in ("import", "alias", "require"))
        for f in forms
    ):
        return "only_imports_aliases"
    return "defines_other_forms"


def model_to_dict(model: ProjectModel) -> dict:
    """Plain-data view of the model (for ``--dump-model`` and tests)."""

    def span(s: SourceSpan) -> list:
        return [s.file, s.start_line, s.start_col, s.end_line, s.end_col]

    return {
        "modules": {
            name: {
                "file": m.file,
                "span": span(m.span),
                "struct": list(m.struct_def) if m.struct_def is not None else None,
                "functions": [
                    {
                        "name": f.name,
                        "arity": f.arity,
                        "kind": f.kind,
                        "visibility": f.visibility,
                        "clauses": len(f.clauses),
                        "doc": f.doc_present,
                    }
                    for f in sorted(m.functions.values(), key=lambda f: (f.name, f.arity, f.kind))
                ],
                "directives": [[d.kind, d.target] for d in m.directives],
                "attributes": sorted(m.attributes),
                "is_migration": m.is_migration,
                "using": using_macro_summary(m),
            }
            for name, m in sorted(model.modules.items())
        },
        "protocols": {p: sorted(fs) for p, fs in sorted(model.protocols.items())},
        "protocol_impls": {p: sorted(ts) for p, ts in sorted(model.protocol_impls.items())},
        "duplicate_module_names": [[n, [span(s) for s in ss]] for n, ss in model.duplicate_module_names],
        "call_sites": [
            [c.file, c.span.start_line, c.span.start_col, c.caller_module, c.caller_name,
             c.caller_arity, c.target_module, c.target_name, c.target_arity, c.external]
            for c in model.call_sites
        ],
        "supervised_child_specs": sorted(model.supervised_child_specs),
        "dynamic_children_files": sorted(model.dynamic_children_files),
    }
