"""Pipe desugaring: ``l |> f(a, b)`` becomes ``f(l, a, b)``."""

from __future__ import annotations

from smelter.syntax.nodes import (
    CALL,
    CAPTURE,
    CASE,
    IF,
    OPAQUE,
    PIPE,
    QUALIFIED_CALL,
    UNLESS,
    VARIABLE,
    Node,
    SyntaxTree,
)
from smelter.syntax.spans import SourceSpan


class MalformedPipeRhs(ValueError):
    def __init__(self, span: SourceSpan) -> None:
        super().__init__(
            f"{span.file}:{span.start_line}:{span.start_col}: right side of |> is not a call"
        )
        self.span = span


def _pipe(node: Node, strict: bool) -> Node:
    left, right = node.children
    meta = {**right.meta, "piped": True}

    def make(kind: str, form: str, children) -> Node:
        return Node(kind, form, tuple(children), node.span, node.start, node.end, meta)

    if right.kind == CALL and not right.meta.get("op"):
        if right.form == ".()":
            callee, *rest = right.children
            return make(CALL, ".()", [callee, left, *rest])
        return make(CALL, right.form, [left, *right.children])
    if right.kind == QUALIFIED_CALL:
        recv, *rest = right.children
        meta.pop("no_parens", None)
        return make(QUALIFIED_CALL, right.form, [recv, left, *rest])
    if right.kind == VARIABLE:
        return make(CALL, right.form, [left])
    if right.kind == CAPTURE:
        return make(CALL, ".()", [right, left])
    if right.kind in (CASE, IF, UNLESS):
        return make(right.kind, right.form, [left, *right.children])
    if strict:
        raise MalformedPipeRhs(right.span)
    return Node(OPAQUE, "|>", (), node.span, node.start, node.end, {"malformed_pipe": True})


def _desugar(node: Node, strict: bool) -> Node:
    if not node.children:
        return node
    kids = tuple(_desugar(c, strict) for c in node.children)
    if node.kind == PIPE:
        rebuilt = Node(node.kind, node.form, kids, node.span, node.start, node.end, node.meta)
        return _pipe(rebuilt, strict)
    if all(a is b for a, b in zip(kids, node.children)):
        return node
    return Node(
        node.kind, node.form, kids, node.span, node.start, node.end, node.meta,
        node.leading_comments, node.trailing_comments,
    )


def desugar_pipes(tree: SyntaxTree, strict: bool = True) -> SyntaxTree:
    """Return ``tree`` with every pipe rewritten as a call.

    The rewritten call keeps the kind of the right-hand side (a local call
    stays local) and takes the span of the pipe expression.  With
    ``strict=False`` a pipe into something that is not a call becomes an
    opaque node instead of raising :class:`MalformedPipeRhs`.
    """
    root = tuple(_desugar(n, strict) for n in tree.root)
    if all(a is b for a, b in zip(root, tree.root)):
        return tree
    return SyntaxTree(tree.file, tree.source, root, tree.tokens, tree.comments)
