"""Small helpers shared by the detector modules."""

from __future__ import annotations

from typing import Iterator

from smelter.model import ClauseInfo, FunctionInfo, ModuleInfo, ProjectModel
from smelter.syntax.nodes import CALL, Node, iter_nodes, quote_body  # noqa: F401
from smelter.syntax.spans import SourceSpan

DEF_CALL_FORMS = frozenset({"def", "defp", "defmacro", "defmacrop", "defdelegate", "defstruct", "defmodule"})


def fn_span(fn: FunctionInfo) -> SourceSpan:
    """Function findings point at the first clause."""
    return fn.clauses[0].span


def fn_target(fn: FunctionInfo) -> tuple[str, str, int]:
    return (fn.module, fn.name, fn.arity)


def mod_target(mod: ModuleInfo) -> tuple[str, None, None]:
    return (mod.name, None, None)


def sorted_functions(model: ProjectModel) -> list[FunctionInfo]:
    return sorted(model.functions(), key=lambda f: (f.module, f.name, f.arity, f.kind))


def sorted_modules(model: ProjectModel) -> list[ModuleInfo]:
    return [model.modules[n] for n in sorted(model.modules)]


def live_clauses(fn: FunctionInfo) -> Iterator[tuple[int, ClauseInfo]]:
    """(index, clause) of clauses with a body."""
    for i, c in enumerate(fn.clauses):
        if c.body is not None:
            yield i, c


def function_of(model: ProjectModel, module: str | None, name: str | None, arity: int | None) -> FunctionInfo | None:
    if module is None or name is None or arity is None:
        return None
    mod = model.modules.get(module)
    if mod is None:
        return None
    return mod.functions.get((name, arity, "function")) or mod.functions.get((name, arity, "macro"))


def is_op(node: Node, *forms: str) -> bool:
    return node.kind == CALL and bool(node.meta.get("op")) and node.form in forms


def contains(node: Node | None, pred) -> bool:
    return node is not None and any(pred(n) for n in iter_nodes(node))


def span_list(spans) -> list[str]:
    return [f"{s.file}:{s.start_line}:{s.start_col}" for s in spans]
