"""Lowering of generic calls to dedicated node kinds, and comment attachment.

``def``, ``defmodule``, ``case`` and friends are parsed as ordinary calls;
:func:`call` recognises them and rebuilds them with their own kind so that
detectors can match on structure instead of re-checking call names.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from smelter.syntax.lexer import Token, TokenKind
from smelter.syntax.nodes import (
    ALIAS,
    ATTRIBUTE,
    BLOCK,
    CALL,
    CASE,
    CLAUSE,
    COND,
    DIRECTIVE,
    FUNCTION_DEF,
    HEAD,
    IF,
    KEYWORD_LIST,
    LIST,
    MACRO_DEF,
    MODULE_DEF,
    OPAQUE,
    PROTOCOL_DEF,
    PROTOCOL_IMPL,
    RECEIVE,
    SECTION_NAMES,
    STRUCT_DEF,
    TRY,
    UNLESS,
    VARIABLE,
    WITH,
    Comment,
    Node,
    atom_name,
    iter_nodes,
    keyword_pairs,
    string_value,
)
from smelter.syntax.spans import LineIndex

if TYPE_CHECKING:
    from smelter.syntax.parser import Parser

DEF_KEYWORDS = {
    "def": (FUNCTION_DEF, "public"),
    "defp": (FUNCTION_DEF, "private"),
    "defmacro": (MACRO_DEF, "public"),
    "defmacrop": (MACRO_DEF, "private"),
}
DIRECTIVES = {"use", "import", "alias", "require"}
TYPESPEC_ATTRS = {"spec", "type", "typep", "opaque", "callback", "macrocallback"}
DOC_ATTRS = {"doc", "moduledoc", "typedoc"}
CONTROL = {"case": CASE, "cond": COND, "if": IF, "unless": UNLESS, "try": TRY, "receive": RECEIVE}


def _rebuild(p: Parser, kind: str, form: str, children, node: Node, **meta) -> Node:
    return p.node(kind, form, children, node.start, node.end, **meta)


def _split(node: Node) -> tuple[list[Node], list[Node]]:
    """(arguments, sections); a trailing ``do:`` keyword list becomes sections."""
    args = [c for c in node.children if not (c.kind == BLOCK and c.meta.get("section"))]
    sections = [c for c in node.children if c.kind == BLOCK and c.meta.get("section")]
    if not sections and args and args[-1].kind == KEYWORD_LIST:
        pairs = keyword_pairs(args[-1])
        keys = [atom_name(k) for k, _ in pairs]
        if pairs and "do" in keys and all(k in SECTION_NAMES for k in keys):
            args = args[:-1]
            for k, v in pairs:
                sections.append(
                    Node(BLOCK, atom_name(k), (v,), k.span.__class__(
                        k.span.file, k.span.start_line, k.span.start_col, v.span.end_line, v.span.end_col
                    ), k.start, v.end, {"section": True, "keyword": True, "clauses": False})
                )
    return args, sections


def call(p: Parser, node: Node) -> Node:
    name = node.form
    if node.meta.get("op"):
        return node
    if name in DEF_KEYWORDS:
        return _lower_def(p, node) or node
    if name == "defdelegate":
        return _lower_delegate(p, node) or node
    if name == "defmodule":
        args, sections = _split(node)
        if len(args) == 1 and args[0].kind == ALIAS and sections:
            return _rebuild(p, MODULE_DEF, args[0].form, [args[0], *sections], node)
        return node
    if name == "defprotocol":
        args, sections = _split(node)
        if len(args) == 1 and args[0].kind == ALIAS and sections:
            return _rebuild(p, PROTOCOL_DEF, args[0].form, [args[0], *sections], node)
        return node
    if name == "defimpl":
        args, sections = _split(node)
        if args and args[0].kind == ALIAS and sections:
            for_types: list[str] = []
            for a in args[1:]:
                target = _kw(a, "for")
                if target is not None:
                    for_types = _alias_names(target)
            return _rebuild(
                p, PROTOCOL_IMPL, args[0].form, [*args, *sections], node, for_types=tuple(for_types)
            )
        return node
    if name == "defstruct":
        args, _ = _split(node)
        fields: list[str] = []
        if args:
            spec = args[0]
            if spec.kind == KEYWORD_LIST:
                fields = [atom_name(k) for k, _ in keyword_pairs(spec)]
            elif spec.kind == LIST:
                for c in spec.children:
                    if atom_name(c) is not None:
                        fields.append(atom_name(c))
                    elif c.kind == KEYWORD_LIST:
                        fields.extend(atom_name(k) for k, _ in keyword_pairs(c))
        return _rebuild(p, STRUCT_DEF, "defstruct", node.children, node, fields=tuple(f for f in fields if f))
    if name in DIRECTIVES:
        args, _ = _split(node)
        if args and (args[0].kind == ALIAS or atom_name(args[0]) is not None):
            target = args[0].form if args[0].kind == ALIAS else atom_name(args[0])
            return _rebuild(p, DIRECTIVE, name, node.children, node, target=target)
        return node
    if name in CONTROL:
        args, sections = _split(node)
        if not sections:
            return node
        return _rebuild(p, CONTROL[name], name, [*args, *sections], node)
    if name == "with":
        args, sections = _split(node)
        if not sections:
            return node
        return _rebuild(p, WITH, name, [*(_arrow_clause(p, a) for a in args), *sections], node)
    if name == "for":
        args, sections = _split(node)
        return _rebuild(p, CALL, name, [*(_arrow_clause(p, a) for a in args), *sections], node, **node.meta)
    return node


def _kw(node: Node, key: str) -> Node | None:
    if node.kind != KEYWORD_LIST:
        return None
    for k, v in keyword_pairs(node):
        if atom_name(k) == key:
            return v
    return None


def _alias_names(node: Node) -> list[str]:
    if node.kind == ALIAS:
        return [node.form]
    if node.kind == LIST:
        return [c.form for c in node.children if c.kind == ALIAS]
    if atom_name(node) is not None:
        return [atom_name(node)]
    return []


def _arrow_clause(p: Parser, node: Node) -> Node:
    """``pat <- expr`` (with/for generators) as a clause node."""
    if not (node.kind == CALL and node.form == "<-" and node.meta.get("op")):
        return node
    pat, expr = node.children
    kids = [pat, expr]
    guard = False
    if pat.kind == CALL and pat.form == "when" and pat.meta.get("op"):
        kids = [pat.children[0], pat.children[1], expr]
        guard = True
    return p.node(CLAUSE, "<-", kids, node.start, node.end, npatterns=1, guard=guard)


def _head(p: Parser, expr: Node) -> tuple[Node, Node | None] | None:
    guard = None
    if expr.kind == CALL and expr.form == "when" and expr.meta.get("op"):
        expr, guard = expr.children
    if expr.kind == CALL and not expr.meta.get("op") and expr.form not in ("<<>>", ".()"):
        params = [c for c in expr.children if not (c.kind == BLOCK and c.meta.get("section"))]
        return p.node(HEAD, expr.form, params, expr.start, expr.end), guard
    if expr.kind == VARIABLE:
        return p.node(HEAD, expr.form, (), expr.start, expr.end), guard
    return None


def _lower_def(p: Parser, node: Node) -> Node | None:
    args, sections = _split(node)
    if not args:
        return None
    got = _head(p, args[0])
    if got is None:
        return None
    head, guard = got
    kind, visibility = DEF_KEYWORDS[node.form]
    kids = [head] + ([guard] if guard is not None else []) + sections + args[1:]
    return _rebuild(
        p, kind, head.form, kids, node,
        keyword=node.form, visibility=visibility, arity=len(head.children),
        guard=guard is not None, bodiless=not sections,
    )


def _lower_delegate(p: Parser, node: Node) -> Node | None:
    args, _ = _split(node)
    if not args:
        return None
    got = _head(p, args[0])
    if got is None:
        return None
    head, _guard = got
    to = None
    for a in args[1:]:
        t = _kw(a, "to")
        if t is not None and t.kind == ALIAS:
            to = t.form
    return _rebuild(
        p, FUNCTION_DEF, head.form, [head, *args[1:]], node,
        keyword="defdelegate", visibility="public", arity=len(head.children),
        guard=False, bodiless=False, delegate_to=to,
    )


def attribute(p: Parser, name: str, value: Node, start: int) -> Node:
    if name in TYPESPEC_ATTRS:
        opaque = p.node(OPAQUE, name, (), value.start, value.end, typespec=True)
        return p.node(ATTRIBUTE, name, (opaque,), start, value.end)
    return p.node(ATTRIBUTE, name, (value,), start, value.end)


# --- comments -------------------------------------------------------------


def attach_comments(root: list[Node], tokens: list[Token], index: LineIndex) -> tuple[Comment, ...]:
    """Attach ``#`` comments to nodes and return every comment of the file.

    A comment on a line of its own leads the outermost node starting at the
    next code token; a comment after code on the same line trails the
    innermost node enclosing it.  Doc attributes are returned as comments of
    kind ``"doc"`` as well.
    """
    comments: list[Comment] = []
    leading: dict[int, list[Comment]] = {}
    trailing: dict[int, list[Comment]] = {}
    starts: dict[int, Node] = {}
    ends: dict[int, Node] = {}
    targets: dict[int, Node] = {}
    for top in root:
        for n in iter_nodes(top):
            if n.start not in starts or n.end > starts[n.start].end:
                starts[n.start] = n
            if n.end not in ends or n.start < ends[n.end].start:
                ends[n.end] = n
    prev_code: Token | None = None
    pending: list[tuple[Comment, int]] = []
    for tok in tokens:
        if tok.kind is TokenKind.COMMENT:
            c = Comment(tok.text[1:], tok.span, "line")
            comments.append(c)
            if prev_code is not None and prev_code.span.end_line == tok.span.start_line:
                target = ends.get(prev_code.end) or _innermost(root, tok.start)
                if target is not None:
                    trailing.setdefault(id(target), []).append(c)
                    targets[id(target)] = target
            else:
                pending.append((c, tok.start))
        elif tok.kind is not TokenKind.NEWLINE:
            prev_code = tok
            if pending:
                target = starts.get(tok.start)
                if target is not None:
                    leading.setdefault(id(target), []).extend(c for c, _ in pending)
                    targets[id(target)] = target
                else:
                    for c, off in pending:
                        inner = _innermost(root, off)
                        if inner is not None:
                            trailing.setdefault(id(inner), []).append(c)
                            targets[id(inner)] = inner
                pending = []
    for c, off in pending:
        inner = _innermost(root, off) or (root[-1] if root else None)
        if inner is not None:
            trailing.setdefault(id(inner), []).append(c)
            targets[id(inner)] = inner
    # nodes are frozen; comments are trivia set once, right after parsing
    for key, cs in leading.items():
        object.__setattr__(targets[key], "leading_comments", tuple(cs))
    for key, cs in trailing.items():
        object.__setattr__(targets[key], "trailing_comments", tuple(cs))
    for top in root:
        for n in iter_nodes(top):
            if n.kind == ATTRIBUTE and n.form in DOC_ATTRS and n.children:
                text = string_value(n.children[0])
                if text is not None:
                    comments.append(Comment(text, n.children[0].span, "doc"))
    comments.sort(key=lambda c: (c.span.start_line, c.span.start_col))
    return tuple(comments)


def _innermost(root: list[Node], offset: int) -> Node | None:
    best = None
    level = root
    while True:
        for n in level:
            if n.start <= offset < n.end:
                best = n
                level = n.children
                break
        else:
            return best
