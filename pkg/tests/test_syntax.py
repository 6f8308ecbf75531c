from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smelter.syntax import (
    IllegalCharacter,
    LexError,
    MalformedPipeRhs,
    ParseError,
    TokenKind,
    desugar_pipes,
    parse_source,
    tokenize,
)
from smelter.syntax.lexer import gaps_are_whitespace
from smelter.syntax.nodes import (
    CALL,
    CAPTURE,
    CASE,
    CLAUSE,
    FUNCTION_DEF,
    MODULE_DEF,
    OPAQUE,
    PIPE,
    QUALIFIED_CALL,
    STRUCT_DEF,
    iter_nodes,
)
from support import LISTINGS, corpus_sources, mutate, parse


def kinds(src: str) -> list[tuple[TokenKind, str]]:
    return [(t.kind, t.text) for t in tokenize(src) if t.kind is not TokenKind.NEWLINE]


# --- lexer ------------------------------------------------------------------


def test_lexer_token_kinds():
    toks = kinds('defmodule A.B do @x ~r/a+/i :ok "s#{1}" ?a 0x1F 1.5e3 key: [] end # c')
    assert (TokenKind.ALIAS, "A") in toks
    assert (TokenKind.SIGIL, "~r/a+/i") in toks
    assert (TokenKind.ATOM, ":ok") in toks
    assert (TokenKind.INTEGER, "0x1F") in toks
    assert (TokenKind.FLOAT, "1.5e3") in toks
    assert (TokenKind.KW_KEY, "key:") in toks
    assert toks[-1] == (TokenKind.COMMENT, "# c")


def test_lexer_string_interpolation_is_one_token():
    toks = tokenize('"a #{b <> "c"} d"')
    assert len(toks) == 1 and toks[0].kind is TokenKind.STRING
    assert toks[0].interpolations


def test_lexer_heredoc_and_charlist():
    src = 'x = """\n  hi\n  """\ny = \'ab\''
    got = [t.kind for t in tokenize(src)]
    assert TokenKind.HEREDOC in got and TokenKind.CHARLIST in got


def test_strict_lexer_rejects_illegal_character():
    with pytest.raises(LexError) as exc:
        tokenize("a = 1 \x01", strict=True)
    assert isinstance(exc.value, IllegalCharacter)
    assert exc.value.span.start_line == 1


def test_tolerant_lexer_makes_opaque_token():
    errors = []
    toks = tokenize("a = \x01 + 1", errors=errors)
    assert any(t.kind is TokenKind.OPAQUE for t in toks)
    assert len(errors) == 1


@pytest.mark.parametrize("name", sorted(corpus_sources()))
def test_lexing_is_lossless_on_corpus(name):
    src = corpus_sources()[name]
    toks = tokenize(src, file=name)
    assert gaps_are_whitespace(src, toks)
    for t in toks:
        assert src[t.start:t.end] == t.text


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.sampled_from(list("abAB01 _:\"'#{}()[]<>%&|.=,-+*/\\\n~?@!")), max_size=80))
def test_lexing_is_lossless_on_random_text(src):
    toks = tokenize(src)
    assert gaps_are_whitespace(src, toks)
    assert all(src[t.start:t.end] == t.text for t in toks)


# --- parser -----------------------------------------------------------------


def inventory(tree):
    mods = {}
    for n in tree.walk():
        if n.kind == MODULE_DEF:
            fns = sorted({(d.form, d.meta["arity"]) for d in iter_nodes(n) if d.kind == FUNCTION_DEF})
            struct = [d.meta["fields"] for d in iter_nodes(n) if d.kind == STRUCT_DEF]
            mods[n.form] = (fns, struct)
    return mods


def test_listings_parse_strictly_with_exact_inventory():
    circle = parse((LISTINGS / "circle.ex").read_text(), mode="strict")
    point = parse((LISTINGS / "point.ex").read_text(), mode="strict")
    assert inventory(circle) == {"Circle": ([("area", 1), ("circumference", 1)], [])}
    assert inventory(point) == {"Point": ([("distance", 2), ("move", 3)], [("x", "y")])}


def test_pipe_desugars_to_nested_call():
    piped = desugar_pipes(parse("f() |> g(p)"))
    plain = desugar_pipes(parse("g(f(), p)"))
    assert piped == plain
    assert piped.root[0].shape() == plain.root[0].shape()


def test_pipe_chain_and_remote_call():
    piped = desugar_pipes(parse("x |> Enum.map(f) |> Enum.sum()"))
    plain = parse("Enum.sum(Enum.map(x, f))")
    assert piped == plain


def test_listing_pipe_becomes_float_pow_of_sum():
    tree = desugar_pipes(parse((LISTINGS / "point.ex").read_text()))
    pows = [n for n in tree.walk() if n.kind == QUALIFIED_CALL and n.form == "pow"]
    outer = max(pows, key=lambda n: n.end - n.start)
    assert outer.children[1].kind == CALL and outer.children[1].form == "+"
    assert outer.children[2].meta["value"] == 0.5
    assert not any(n.kind == PIPE for n in tree.walk())


def test_malformed_pipe_rhs():
    tree = parse("x |> 1")
    with pytest.raises(MalformedPipeRhs):
        desugar_pipes(tree, strict=True)
    loose = desugar_pipes(tree, strict=False)
    assert loose.root[0].kind == OPAQUE and loose.root[0].meta.get("malformed_pipe")


def test_strict_mode_raises_with_location():
    with pytest.raises(ParseError) as exc:
        parse_source("defmodule X do\n  def broken(\nend", mode="strict")
    assert exc.value.span.start_line >= 2


def test_tolerant_mode_recovers_into_opaque_node():
    tree, diags = parse_source("defmodule X do def broken( end\ndef ok, do: 1", mode="tolerant")
    assert diags
    assert any(n.kind == OPAQUE for n in tree.walk())
    assert tree.root[0].kind == MODULE_DEF


def test_control_forms_are_lowered():
    tree = parse("case x do\n  {:ok, v} when v > 1 -> v\n  _ -> 0\nend")
    case = tree.root[0]
    assert case.kind == CASE
    clauses = case.section("do").children
    assert [c.kind for c in clauses] == [CLAUSE, CLAUSE]
    assert clauses[0].guard is not None


def test_capture_forms():
    f = parse("&String.upcase/1").root[0]
    assert f.kind == CAPTURE and f.children[0].meta["capture_arity"] == 1
    g = parse("& &1.name").root[0]
    assert g.kind == CAPTURE and g.children[0].kind == QUALIFIED_CALL
    h = parse("&(&1 + 1)").root[0]
    assert h.children[0].form == "+"


def test_comments_attach_to_nodes():
    tree = parse("# leading\ndef f, do: 1 # trailing\n")
    fn = tree.root[0]
    assert [c.text for c in fn.leading_comments] == [" leading"]
    assert [c.text for c in fn.trailing_comments] == [" trailing"]


def test_equality_ignores_spans():
    assert parse("f(1,2)") == parse("f( 1 ,\n 2 )")
    assert parse("f(1,2)") != parse("f(2,1)")


def _spans_nest(node, parent_range):
    lo, hi = parent_range
    assert lo <= node.start <= node.end <= hi
    for c in node.children:
        if not c.meta.get("synthetic"):
            _spans_nest(c, (node.start, node.end))


@pytest.mark.parametrize("name", sorted(corpus_sources()))
def test_span_containment_on_corpus(name):
    src = corpus_sources()[name]
    tree, diags = parse_source(src, mode="strict", file=name)
    assert diags == []
    for root in desugar_pipes(tree).root:
        _spans_nest(root, (0, len(src)))


def test_tolerant_parse_survives_mutations_smoke():
    rng = random.Random(1)
    sources = list(corpus_sources().values())
    for _ in range(300):
        src = mutate(rng.choice(sources), rng)
        tree, _ = parse_source(src, mode="tolerant")
        for root in desugar_pipes(tree, strict=False).root:
            _spans_nest(root, (0, len(src)))


def test_deep_nesting_degrades_to_opaque():
    src = "[" * 5000 + "]" * 5000
    tree, diags = parse_source(src, mode="tolerant")
    assert diags and tree.root[0].kind == OPAQUE
