"""Syntax tree nodes.

A node mirrors the quoted form of the analyzed language, ``{form, meta,
args}``: ``kind`` says what construct it is, ``form`` carries its name
(function name, operator, literal text, module name...), and ``children``
are its arguments in document order.  Spans, comments and ``meta`` are
excluded from equality, so two trees compare equal when they have the
same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping

from smelter.syntax.lexer import Token
from smelter.syntax.spans import SourceSpan

# Node kinds.  Operators, local calls and remote calls are all calls, as
# in the quoted form.
MODULE_DEF = "module_def"
FUNCTION_DEF = "function_def"
MACRO_DEF = "macro_def"
STRUCT_DEF = "struct_def"
PROTOCOL_DEF = "protocol_def"
PROTOCOL_IMPL = "protocol_impl"
ATTRIBUTE = "attribute"
CALL = "call"
QUALIFIED_CALL = "qualified_call"
PIPE = "pipe"
MATCH = "match"
CASE = "case"
COND = "cond"
WITH = "with"
IF = "if"
UNLESS = "unless"
TRY = "try"
RECEIVE = "receive"
FN = "fn"
CAPTURE = "capture"
MAP = "map"
STRUCT = "struct"
LIST = "list"
TUPLE = "tuple"
KEYWORD_LIST = "keyword_list"
LITERAL = "literal"
VARIABLE = "variable"
ALIAS = "alias"
DIRECTIVE = "directive"
OPAQUE = "opaque"
# structural helpers with no quoted-form counterpart of their own
HEAD = "head"  # function head: form = name, children = parameters
CLAUSE = "clause"  # `pats -> body` and `pat <- expr`
BLOCK = "block"  # do/else/rescue/catch/after sections and clause bodies

CALL_KINDS = frozenset({CALL, QUALIFIED_CALL})
DEF_KINDS = frozenset({FUNCTION_DEF, MACRO_DEF})
SECTION_NAMES = ("do", "else", "rescue", "catch", "after")


@dataclass(frozen=True, slots=True)
class Comment:
    text: str
    span: SourceSpan
    kind: str = "line"  # "line" or "doc"


@dataclass(frozen=True, slots=True)
class Node:
    kind: str
    form: str
    children: tuple[Node, ...]
    span: SourceSpan = field(compare=False)
    start: int = field(compare=False)
    end: int = field(compare=False)
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)
    leading_comments: tuple[Comment, ...] = field(default=(), compare=False)
    trailing_comments: tuple[Comment, ...] = field(default=(), compare=False)

    def __repr__(self) -> str:
        inner = ", ".join(repr(c) for c in self.children)
        return f"{self.kind}<{self.form}>({inner})"

    def shape(self) -> tuple:
        """Span-free nested tuple, handy for assertions and hashing."""
        return (self.kind, self.form, tuple(c.shape() for c in self.children))

    # --- accessors for the structured kinds -------------------------------

    @property
    def sections(self) -> dict[str, Node]:
        """do/else/rescue/... blocks attached to this node, by name."""
        return {
            c.form: c
            for c in self.children
            if c.kind == BLOCK and c.meta.get("section")
        }

    def section(self, name: str) -> Node | None:
        for c in self.children:
            if c.kind == BLOCK and c.meta.get("section") and c.form == name:
                return c
        return None

    @property
    def head(self) -> Node | None:
        """Function head of a definition."""
        if self.kind in DEF_KINDS and self.children and self.children[0].kind == HEAD:
            return self.children[0]
        return None

    @property
    def guard(self) -> Node | None:
        if self.kind in DEF_KINDS and self.meta.get("guard"):
            return self.children[1]
        if self.kind == CLAUSE and self.meta.get("guard"):
            return self.children[self.meta["npatterns"]]
        return None

    @property
    def params(self) -> tuple[Node, ...]:
        h = self.head
        if h is not None:
            return h.children
        if self.kind == CLAUSE:
            return self.children[: self.meta["npatterns"]]
        return ()

    @property
    def clause_body(self) -> Node:
        """Body of a ``->``/``<-`` clause (a block or an expression)."""
        return self.children[-1]


@dataclass(frozen=True, slots=True)
class SyntaxTree:
    file: str
    source: str
    root: tuple[Node, ...]
    tokens: tuple[Token, ...]
    comments: tuple[Comment, ...]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SyntaxTree) and self.root == other.root

    __hash__ = None  # type: ignore[assignment]

    def walk(self) -> Iterator[Node]:
        for node in self.root:
            yield from iter_nodes(node)

    @property
    def line_count(self) -> int:
        return self.source.count("\n") + (0 if self.source.endswith("\n") else 1)


def iter_nodes(node: Node) -> Iterator[Node]:
    """Pre-order traversal, iterative so deep trees cannot overflow."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def walk_with_parents(node: Node, parents: tuple[Node, ...] = ()) -> Iterator[tuple[Node, tuple[Node, ...]]]:
    """Pre-order traversal yielding each node with its ancestor chain."""
    stack: list[tuple[Node, tuple[Node, ...]]] = [(node, parents)]
    while stack:
        n, anc = stack.pop()
        yield n, anc
        inner = anc + (n,)
        stack.extend((c, inner) for c in reversed(n.children))


def atom_name(node: Node) -> str | None:
    """``:foo`` -> ``"foo"`` for atom literals, else None."""
    if node.kind == LITERAL and node.meta.get("type") == "atom":
        return node.meta.get("value")
    return None


def string_value(node: Node) -> str | None:
    if node.kind == LITERAL and node.meta.get("type") in ("string", "heredoc"):
        return node.meta.get("value")
    return None


def keyword_pairs(node: Node) -> list[tuple[Node, Node]]:
    """Key/value pairs of a keyword list or map (children are flattened)."""
    kids = node.children
    if node.kind == STRUCT:
        kids = kids[1:]
    if node.meta.get("update"):
        kids = kids[1:]
    return [(kids[i], kids[i + 1]) for i in range(0, len(kids) - 1, 2)]


def keyword_get(node: Node | None, key: str) -> Node | None:
    if node is None or node.kind != KEYWORD_LIST:
        return None
    for k, v in keyword_pairs(node):
        if atom_name(k) == key:
            return v
    return None


def variables_in(node: Node) -> Iterator[Node]:
    for n in iter_nodes(node):
        if n.kind == VARIABLE:
            yield n


def call_args(node: Node) -> tuple[Node, ...]:
    """Arguments of a call, excluding the receiver and any do-block sections."""
    kids = node.children
    if node.kind == QUALIFIED_CALL:
        kids = kids[1:]
    return tuple(c for c in kids if not (c.kind == BLOCK and c.meta.get("section")))


def receiver(node: Node) -> Node | None:
    if node.kind == QUALIFIED_CALL:
        return node.children[0]
    return None


def quote_body(node: Node) -> list[Node] | None:
    """Expressions inside ``quote do ... end`` or ``quote(do: ...)``; None if not a quote."""
    if node.kind != CALL or node.form != "quote":
        return None
    block = node.section("do")
    if block is not None:
        return list(block.children)
    for arg in node.children:
        if arg.kind == KEYWORD_LIST:
            do = keyword_get(arg, "do")
            if do is not None:
                return [do]
    return []
