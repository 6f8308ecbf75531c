from __future__ import annotations

import pytest

from smelter.rules.registry import registry
from support import (
    LISTINGS,
    RULE_DIRS,
    THRESHOLDS,
    analyze,
    config_with,
    corpus_count,
    rule_findings,
    scan_dir,
    sweep_values,
)

# --- labelled corpus ------------------------------------------------------------


@pytest.mark.parametrize("rule_dir", RULE_DIRS, ids=lambda p: p.name)
def test_positive_fixture_has_exactly_one_finding(rule_dir):
    res = scan_dir(rule_dir / "positive")
    assert len(rule_findings(res, rule_dir.name)) == 1
    assert res.stats.parse_diagnostics == 0


@pytest.mark.parametrize("rule_dir", RULE_DIRS, ids=lambda p: p.name)
def test_negative_fixture_has_no_finding(rule_dir):
    res = scan_dir(rule_dir / "negative")
    assert rule_findings(res, rule_dir.name) == []


def test_every_rule_has_a_fixture_pair():
    assert [p.name for p in RULE_DIRS] == [r.id for r in registry()]
    for p in RULE_DIRS:
        assert (p / "positive").is_dir() and (p / "negative").is_dir()


def test_listings_are_clean_for_size_rules():
    srcs = {p.name: p.read_text() for p in LISTINGS.glob("*.ex")}
    res = analyze(srcs, ["EX1002", "EX1003", "EX1004"])
    assert res.findings == []


# --- threshold boundaries ---------------------------------------------------------


def params_src(n: int) -> str:
    args = ", ".join(f"a{i}" for i in range(n))
    return f"defmodule A do\n  def f({args}), do: {{{args}}}\nend\n"


@pytest.mark.parametrize("n,hits", [(4, 0), (5, 1), (6, 1)])
def test_long_parameter_list_boundary(n, hits):
    assert len(rule_findings(analyze({"lib/a.ex": params_src(n)}, ["EX1002"]), "EX1002")) == hits


def test_trailing_keyword_list_counts_as_one_parameter():
    src = "defmodule A do\n  def f(a, b, c, d, opts \\\\ [x: 1]), do: {a, b, c, d, opts}\nend\n"
    assert len(rule_findings(analyze({"lib/a.ex": src}, ["EX1002"]), "EX1002")) == 1


def long_fn(body_lines: int) -> str:
    body = "".join(f"    x{i} = {i}\n" for i in range(body_lines - 2))
    return f"defmodule A do\n  def f do\n{body}    :ok\n  end\nend\n"


@pytest.mark.parametrize("lines,hits", [(29, 0), (30, 1), (31, 1)])
def test_long_function_boundary(lines, hits):
    # clause lines run from `def` through `end`
    src = long_fn(lines - 1)
    assert len(rule_findings(analyze({"lib/a.ex": src}, ["EX1003"]), "EX1003")) == hits


@pytest.mark.parametrize("n,hits", [(19, 0), (20, 1)])
def test_large_module_public_function_boundary(n, hits):
    body = "".join(f"  def f{i}, do: {i}\n" for i in range(n))
    src = f"defmodule A do\n{body}end\n"
    assert len(rule_findings(analyze({"lib/a.ex": src}, ["EX1004"]), "EX1004")) == hits


def envy_src(foreign: int, local: int) -> str:
    calls = [f"    Other.g{i}(x)" for i in range(foreign)] + ["    h(x)" for _ in range(local)]
    return ("defmodule Other do\n" + "".join(f"  def g{i}(x), do: x\n" for i in range(foreign)) + "end\n"
            "defmodule Mine do\n  def f(x) do\n" + "\n".join(calls) + "\n  end\n  def h(x), do: x\nend\n")


@pytest.mark.parametrize("foreign,local,hits", [(5, 1, 1), (0, 3, 0), (5, 5, 0), (4, 3, 1), (3, 0, 0)])
def test_feature_envy(foreign, local, hits):
    res = analyze({"lib/a.ex": envy_src(foreign, local)}, ["EX1006"])
    assert len(rule_findings(res, "EX1006")) == hits


def test_feature_envy_goes_away_when_calls_move_home():
    src = envy_src(5, 1)
    assert rule_findings(analyze({"lib/a.ex": src}, ["EX1006"]), "EX1006")
    # turn four of the foreign calls into local ones: 1 foreign vs 5 local
    mutated = src
    for i in range(4):
        mutated = mutated.replace(f"    Other.g{i}(x)", "    h(x)")
    assert rule_findings(analyze({"lib/a.ex": mutated}, ["EX1006"]), "EX1006") == []


def test_inappropriate_intimacy_pairs():
    src = """
defmodule A do
  def a1(x), do: B.b1(x) + B.b2(x) + B.b3(x) + B.b4(x)
end
defmodule B do
  def b1(x), do: A.a1(x)
  def b2(x), do: A.a1(x)
  def b3(x), do: A.a1(x) + x
  def b4(x), do: x
end
"""
    [f] = rule_findings(analyze({"lib/a.ex": src}, ["EX1007"]), "EX1007")
    assert f.target[0] == "A"
    one_way = src.replace("A.a1(x)", "x")
    assert rule_findings(analyze({"lib/a.ex": one_way}, ["EX1007"]), "EX1007") == []


def test_data_clump_needs_three_names_and_no_struct():
    base = "defmodule G do\n{struct}  def a(x, y, z), do: {{x, y, z}}\n  def b(x, y, z), do: {{z, y, x}}\nend\n"
    assert len(rule_findings(analyze({"lib/g.ex": base.format(struct="")}, ["EX1009"]), "EX1009")) == 1
    with_struct = base.format(struct="  defstruct [:x, :y, :z]\n")
    assert rule_findings(analyze({"lib/g.ex": with_struct}, ["EX1009"]), "EX1009") == []
    pair = "defmodule G do\n  def a(x, y), do: x\n  def b(x, y), do: y\nend\n"
    assert rule_findings(analyze({"lib/g.ex": pair}, ["EX1009"]), "EX1009") == []


def test_error_shapes_boundary():
    def src(n):
        arms = "".join(f"      {{:error, :e{i}}} -> {i}\n" for i in range(n))
        return f"defmodule E do\n  def f(x) do\n    case x do\n{arms}      _ -> 0\n    end\n  end\nend\n"
    assert len(rule_findings(analyze({"lib/e.ex": src(4)}, ["EX1206"]), "EX1206")) == 1
    assert rule_findings(analyze({"lib/e.ex": src(3)}, ["EX1206"]), "EX1206") == []


def test_complex_branching_requires_both_conjuncts():
    bare = "defmodule C do\n" + "".join(f"  def f(x, {i}), do: x\n" for i in range(6)).replace(", 0)", ", y)") + "end\n"
    assert len(rule_findings(analyze({"lib/c.ex": bare}, ["EX1205"]), "EX1205")) == 1
    plain = "defmodule C do\n" + "".join(f"  def f{i}(x), do: x\n" for i in range(6)) + "end\n"
    assert rule_findings(analyze({"lib/c.ex": plain}, ["EX1205"]), "EX1205") == []
    vars_only = "defmodule C do\n" + "  def f(x, y), do: x\n" * 6 + "end\n"
    assert rule_findings(analyze({"lib/c.ex": vars_only}, ["EX1205"]), "EX1205") == []


# --- process rules ----------------------------------------------------------------


WORKER = "defmodule App.Worker do\n  use GenServer\n  def init(s), do: {:ok, s}\nend\n"


def test_unsupervised_process_flagged_only_without_child_spec():
    starter = "defmodule App.Boot do\n  def go, do: GenServer.start_link(App.Worker, [])\nend\n"
    res = analyze({"lib/w.ex": WORKER, "lib/b.ex": starter}, ["EX1201"])
    assert len(rule_findings(res, "EX1201")) == 1
    app = ("defmodule App.Application do\n  def start(_, _) do\n"
           "    Supervisor.start_link([App.Worker], strategy: :one_for_one)\n  end\nend\n")
    res = analyze({"lib/w.ex": WORKER, "lib/b.ex": starter, "lib/app.ex": app}, ["EX1201"])
    assert rule_findings(res, "EX1201") == []


def test_bare_spawn_always_flagged_and_dynamic_children_lower_confidence():
    spawner = "defmodule App.S do\n  def go, do: spawn(fn -> :ok end)\nend\n"
    [f] = rule_findings(analyze({"lib/s.ex": spawner}, ["EX1201"]), "EX1201")
    assert f.confidence == "certain"
    dyn = ("defmodule App.Application do\n  def start(_, _), do: Supervisor.start_link(children(), strategy: :one_for_one)\n"
           "  defp children, do: []\nend\n")
    [f] = rule_findings(analyze({"lib/s.ex": spawner, "lib/app.ex": dyn}, ["EX1201"]), "EX1201")
    assert f.confidence == "heuristic"


@pytest.mark.parametrize("n,hits", [(1, 0), (2, 0), (3, 1)])
def test_agent_obsession_counts_client_modules(n, hits):
    srcs = {"lib/store.ex": "defmodule Store do\n  def start, do: Agent.start_link(fn -> %{} end, name: :store)\nend\n"}
    for i in range(n):
        srcs[f"lib/c{i}.ex"] = f"defmodule C{i} do\n  def get, do: Agent.get(:store, & &1)\nend\n"
    assert len(rule_findings(analyze(srcs, ["EX1203"]), "EX1203")) == hits


def test_large_message_threshold():
    def src(n):
        items = ", ".join(str(i) for i in range(n))
        return f"defmodule M do\n  def go(pid), do: send(pid, [{items}])\nend\n"
    # a list of n literals is n + 1 nodes
    assert len(rule_findings(analyze({"lib/m.ex": src(49)}, ["EX1204"]), "EX1204")) == 1
    assert rule_findings(analyze({"lib/m.ex": src(48)}, ["EX1204"]), "EX1204") == []
    assert rule_findings(analyze({"lib/m.ex": "defmodule M do\n  def go(pid, m), do: send(pid, m)\nend\n"},
                                 ["EX1204"]), "EX1204") == []


# --- migrations --------------------------------------------------------------------

MIGRATION = 'defmodule Repo.Migrations.M do\n  use Ecto.Migration\n  def change do\n{body}  end\nend\n'
PATH = "priv/repo/migrations/20240101_m.exs"


@pytest.mark.parametrize("body,hits", [
    ("    alter table(:users) do\n      add :age, :integer\n    end\n    Repo.update_all(User, set: [age: 0])\n", 1),
    ("    create table(:users) do\n      add :age, :integer\n    end\n", 0),
    ("    Repo.update_all(User, set: [age: 0])\n", 0),
    ('    create index(:users, [:age])\n    execute("update users set age = 0")\n', 1),
    ('    create index(:users, [:age])\n    execute("CREATE EXTENSION citext")\n', 0),
])
def test_data_manipulation_by_migration_needs_both_ddl_and_dml(body, hits):
    res = analyze({PATH: MIGRATION.format(body=body)}, ["EX1210"])
    assert len(rule_findings(res, "EX1210")) == hits


# --- low-level rules ------------------------------------------------------------------


def test_working_with_invalid_data_scope():
    ctrl = 'defmodule ShopWeb.PageController do\n  def show(conn, params), do: params["page"] + 1\nend\n'
    assert len(rule_findings(analyze({"lib/shop_web/page.ex": ctrl}, ["EX1301"]), "EX1301")) == 1
    destructured = ctrl.replace('(conn, params), do: params["page"] + 1', '(conn, %{"page" => page}), do: page')
    assert rule_findings(analyze({"lib/shop_web/page.ex": destructured}, ["EX1301"]), "EX1301") == []
    plain = ctrl.replace("ShopWeb.PageController", "Shop.Page")
    assert rule_findings(analyze({"lib/shop/page.ex": plain}, ["EX1301"]), "EX1301") == []


def test_compile_time_config_and_app_config_in_library():
    attr = "defmodule L do\n  @timeout Application.get_env(:l, :timeout)\n  def t, do: @timeout\nend\n"
    assert len(rule_findings(analyze({"lib/l.ex": attr}, ["EX1307"]), "EX1307")) == 1
    runtime = "defmodule L do\n  def t, do: Application.get_env(:l, :timeout)\nend\n"
    assert rule_findings(analyze({"lib/l.ex": runtime}, ["EX1307"]), "EX1307") == []
    assert len(rule_findings(analyze({"lib/l.ex": runtime}, ["EX1306"]), "EX1306")) == 1
    assert rule_findings(analyze({"scripts/l.ex": runtime}, ["EX1306"]), "EX1306") == []


def test_duplicate_module_names_are_errors():
    res = analyze({"lib/a.ex": "defmodule A do\nend\n", "lib/b.ex": "defmodule A do\nend\n"}, ["EX1304"])
    [f] = rule_findings(res, "EX1304")
    assert f.severity == "error"


# --- threshold monotonicity ---------------------------------------------------------------


@pytest.mark.parametrize("rule_id,name,default", THRESHOLDS, ids=lambda v: str(v))
def test_raising_a_threshold_never_adds_findings(rule_id, name, default):
    counts = [corpus_count(rule_id, config_with(rule_id, **{name: v})) for v in sweep_values(default)]
    assert counts == sorted(counts, reverse=True), counts
