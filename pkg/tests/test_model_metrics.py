from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from smelter.metrics import (
    clone_index,
    data_clumps,
    error_shapes,
    function_metrics,
    message_payload_size,
    module_metrics,
)
from smelter.model import build_model, collect_child_specs, model_to_dict, using_macro_summary
from smelter.syntax import desugar_pipes, parse_source
from support import LISTINGS, brute_force_clones, corpus_sources, parse


def model_of(**files):
    trees = []
    for name, src in files.items():
        tree, _ = parse_source(src, file=name)
        trees.append((name, desugar_pipes(tree, strict=False)))
    return build_model(trees)


def test_listing_inventory_in_model():
    m = model_of(**{"circle.ex": (LISTINGS / "circle.ex").read_text(),
                    "point.ex": (LISTINGS / "point.ex").read_text()})
    assert sorted(m.modules) == ["Circle", "Point"]
    assert sorted((f.name, f.arity) for f in m.modules["Point"].functions.values()) == [("distance", 2), ("move", 3)]
    assert m.modules["Point"].struct_def == ("x", "y")
    assert m.modules["Circle"].struct_def is None


def test_aliases_nested_modules_and_call_resolution():
    m = model_of(**{"a.ex": """
defmodule App.Util do
  def helper(x), do: x
end
defmodule App.Main do
  alias App.Util
  alias App.Util, as: U
  defmodule Inner do
    def go, do: :ok
  end
  def run(x) do
    Util.helper(x)
    U.helper(x)
    Inner.go()
    local(x)
    Enum.map(x, & &1)
  end
  defp local(x), do: x
end
"""})
    assert "App.Main.Inner" in m.modules
    targets = {(s.target_module, s.target_name) for s in m.call_sites if s.caller_name == "run"}
    assert ("App.Util", "helper") in targets
    assert ("App.Main.Inner", "go") in targets
    assert ("App.Main", "local") in targets
    enum = [s for s in m.call_sites if s.target_module == "Enum"]
    assert enum and enum[0].external


def test_imported_functions_resolve():
    m = model_of(**{"a.ex": """
defmodule Fmt do
  def money(n), do: n
end
defmodule Page do
  import Fmt, only: [money: 1]
  def price(n), do: money(n)
end
"""})
    site = next(s for s in m.call_sites if s.target_name == "money" and s.caller_module == "Page")
    assert site.target_module == "Fmt"


def test_duplicate_module_names_collected():
    m = model_of(**{"a.ex": "defmodule A do\nend\n", "b.ex": "defmodule A do\nend\ndefmodule A do\nend\n"})
    assert [(n, len(s)) for n, s in m.duplicate_module_names] == [("A", 3)]


def test_child_specs_and_dynamic_children():
    trees = [("app.ex", parse("""
defmodule App do
  def start(_, _) do
    children = [App.Worker, {App.Other, []}, %{id: 1, start: {App.Third, :start_link, []}}]
    Supervisor.start_link(children, strategy: :one_for_one)
  end
  def more(spec), do: DynamicSupervisor.start_child(App.Dyn, spec)
end
""", file="app.ex"))]
    specs = collect_child_specs(trees)
    assert {"App.Worker", "App.Other", "App.Third"} <= specs.modules
    assert specs.dynamic_files == frozenset({"app.ex"})


def test_using_macro_summary_classification():
    m = model_of(**{"a.ex": """
defmodule OnlyImports do
  defmacro __using__(_), do: quote(do: import Enum)
end
defmodule DefinesFns do
  defmacro __using__(_) do
    quote do
      def hello, do: 1
    end
  end
end
defmodule NoUsing do
end
"""})
    assert using_macro_summary(m.modules["OnlyImports"]) == "only_imports_aliases"
    assert using_macro_summary(m.modules["DefinesFns"]) == "defines_other_forms"
    assert using_macro_summary(m.modules["NoUsing"]) == "no_using"


def test_model_is_order_independent():
    src = corpus_sources()
    names = sorted(src)
    a = [(n, parse(src[n], file=n)) for n in names]
    b = list(reversed(a))
    assert model_to_dict(build_model(a)) == model_to_dict(build_model(b))


# --- metrics --------------------------------------------------------------


def test_function_metrics_basic():
    m = model_of(**{"a.ex": """
defmodule K do
  def f(x) when is_integer(x) and x > 0, do: x
  def f(%{a: a}), do: a
  def f(_), do: nil
end
"""})
    fm = {x.target: x for x in function_metrics(m)}[("K", "f", 1)]
    assert fm.clause_count == 3
    assert fm.total_guard_count == 2
    assert fm.pattern_clause_count == 1
    assert fm.max_clause_lines == 1


def test_error_shapes_counts_case_and_with_else():
    m = model_of(**{"a.ex": """
defmodule E do
  def f(x) do
    case x do
      {:error, :a} -> 1
      {:error, :b} -> 2
      {:error, r} -> r
      {:error, other} -> other
    end
    with {:ok, v} <- x do
      v
    else
      {:error, :c} -> 3
    end
  end
end
"""})
    fn = m.modules["E"].function("f", 1)
    assert len(error_shapes(fn)) == 4  # r and other share the shape {:error, _}


def test_uncalled_private_and_unused_params():
    m = model_of(**{"a.ex": """
defmodule U do
  def a(x, opts), do: b(x)
  defp b(y), do: y
  defp c, do: 1
  def d(_ignored, z) when z > 1, do: :ok
end
"""})
    mm = {x.module: x for x in module_metrics(m)}["U"]
    assert mm.uncalled_private_functions == frozenset({("c", 0)})
    assert mm.unused_params == [(("U", "a", 2), 0, 1)]


def test_data_clumps_respect_struct_and_size():
    m = model_of(**{"a.ex": """
defmodule G do
  def a(x, y, z), do: {x, y, z}
  def b(x, y, z, w), do: {x, y, z, w}
  def c(x, y), do: {x, y}
end
"""})
    assert data_clumps(m.modules["G"]) == [(("x", "y", "z"), 2)]
    assert data_clumps(m.modules["G"], min_size=4) == []


def test_message_payload_size():
    tree = parse("{:sync, %{a: 1, b: 2}}")
    assert message_payload_size(tree.root[0]) == 1 + 1 + 1 + 4


# --- clones ------------------------------------------------------------------


def frag_set(frags):
    return {(f.a[0], f.a_index, f.b[0], f.b_index, f.token_length) for f in frags}


def small_corpus_trees():
    out = []
    for name, src in sorted(corpus_sources().items()):
        tree = parse(src, file=name)
        if len([t for t in tree.tokens if t.kind.value not in ("comment", "newline")]) <= 200:
            out.append((name, tree))
    return out


def test_clone_index_matches_brute_force_on_fixtures():
    trees = small_corpus_trees()
    assert len(trees) > 50
    # per fixture project and across the whole small corpus
    for normalize in (True, False):
        for window in (10, 40):
            assert frag_set(clone_index(trees, window, normalize)) == brute_force_clones(trees, window, normalize)


def test_clone_index_normalization():
    a = ("a.ex", parse("def f(a, b), do: a + b * 2 - foo(a)"))
    b = ("b.ex", parse("def g(x, y), do: x + y * 3 - bar(x)"))
    assert len(clone_index([a, b], 10, normalize=True)) == 1
    assert clone_index([a, b], 10, normalize=False) == []


WORDS = st.sampled_from(["a", "b", "1", "+", "(", ")", "foo", ",", "do", "end"])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(WORDS, max_size=40), min_size=1, max_size=3), st.integers(2, 6), st.booleans())
def test_clone_index_matches_brute_force_on_random_streams(files, window, normalize):
    trees = [(f"f{i}.ex", parse_source(" ".join(ws), file=f"f{i}.ex")[0]) for i, ws in enumerate(files)]
    assert frag_set(clone_index(trees, window, normalize)) == brute_force_clones(trees, window, normalize)
