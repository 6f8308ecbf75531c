"""The rule catalog: one descriptor per detectable smell."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

TRADITIONAL = "traditional"
TRADITIONAL_HISTORY = "traditional-history"
ELIXIR_DESIGN = "elixir-design"
ELIXIR_LOWLEVEL = "elixir-lowlevel"
CATEGORIES = (TRADITIONAL, TRADITIONAL_HISTORY, ELIXIR_DESIGN, ELIXIR_LOWLEVEL)

SEVERITIES = ("info", "warning", "error")


def severity_rank(severity: str) -> int:
    return SEVERITIES.index(severity)


@dataclass(frozen=True)
class Param:
    type: str  # int | float | bool | str | list
    default: Any
    description: str = ""


@dataclass(frozen=True)
class RuleDescriptor:
    id: str
    name: str
    category: str
    source_docs: tuple[str, ...]
    heuristic: bool
    default_severity: str
    summary: str
    params: dict[str, Param] = field(default_factory=dict)
    description: str = ""
    example: str = ""

    def defaults(self) -> dict[str, Any]:
        return {k: p.default for k, p in self.params.items()}

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "category": self.category,
            "heuristic": self.heuristic,
            "default_severity": self.default_severity,
            "source_docs": list(self.source_docs),
            "summary": self.summary,
            "params": {
                k: {"type": p.type, "default": p.default, "description": p.description}
                for k, p in self.params.items()
            },
        }


def _rule(id, name, category, docs, summary, *, heuristic=False, severity=None, params=None,
          description="", example="") -> RuleDescriptor:
    if severity is None:
        severity = "info" if heuristic else "warning"
    return RuleDescriptor(
        id, name, category, tuple(docs.split()), heuristic, severity, summary,
        dict(params or {}), description or summary, example.strip("\n"),
    )


_RULES = [
    # --- traditional, static ---------------------------------------------
    _rule(
        "EX1001", "Comments", TRADITIONAL, "D1 D10 D12 D14",
        "Comments explain code that should speak for itself or be documented with @doc and doctests.",
        params={
            "max_body_comment_lines": Param("int", 3, "comment lines inside one clause that trigger a finding"),
            "undocumented_public_ratio": Param("float", 0.8, "share of public functions without @doc"),
            "min_module_comment_lines": Param("int", 5, "body comment lines a module needs for the module check"),
        },
        description=(
            "Flags function clauses whose bodies carry many `#` comment lines, and modules whose "
            "public functions are mostly undocumented while their bodies are full of comments. "
            "Documentation attributes (@doc, @moduledoc) can hold executable doctests, so "
            "explanations belong there rather than in line comments."
        ),
        example="""
def total(items) do
  # start from zero
  # add each price
  # return the sum
  Enum.reduce(items, 0, &(&1.price + &2))
end
""",
    ),
    _rule(
        "EX1002", "Long Parameter List", TRADITIONAL, "D1 D16",
        "A function takes so many parameters that calls become hard to read and to change.",
        params={"max_params": Param("int", 5, "arity at or above which a function is flagged")},
        description=(
            "Flags functions whose arity reaches `max_params`. A trailing keyword-list "
            "parameter counts as a single parameter. Grouping related values in a map or "
            "struct usually shortens the list."
        ),
        example="def create_user(name, email, age, street, city, zip), do: :ok",
    ),
    _rule(
        "EX1003", "Long Function", TRADITIONAL, "D1",
        "A function clause is long enough that it likely does several things at once.",
        params={"max_lines": Param("int", 30, "clause length (def..end lines) that triggers a finding")},
        description="Flags functions whose longest clause spans at least `max_lines` physical lines.",
        example="def run(x) do\n  # ... 30 or more lines ...\nend",
    ),
    _rule(
        "EX1004", "Large Module", TRADITIONAL, "D1",
        "A module has grown too large, in lines or in public API, to have a single responsibility.",
        params={
            "max_module_lines": Param("int", 300, "module length in lines"),
            "max_public_functions": Param("int", 20, "number of public functions"),
        },
        description=(
            "The classic Large Class smell mapped to modules: flags modules with at least "
            "`max_module_lines` lines or at least `max_public_functions` public functions."
        ),
        example="defmodule Everything do\n  # 300+ lines or 20+ public functions\nend",
    ),
    _rule(
        "EX1005", "Duplicated Code", TRADITIONAL, "D1",
        "The same token sequence appears in several places and must be maintained in each.",
        params={
            "window": Param("int", 40, "minimum clone length in tokens"),
            "normalize": Param("bool", True, "treat identifiers, numbers and strings as equal"),
        },
        description=(
            "Reports every maximal run of at least `window` equal tokens found twice in the "
            "project. With `normalize` on, identifiers, numbers and strings are abstracted so "
            "renamed copies are also found."
        ),
        example="# two functions with identical 40+ token bodies in different modules",
    ),
    _rule(
        "EX1006", "Feature Envy", TRADITIONAL, "D1 D6",
        "A function calls another module more than its own, so it probably belongs there.",
        params={"min_foreign_calls": Param("int", 4, "calls into one other project module")},
        description=(
            "Flags a function when its calls into some other project module reach "
            "`min_foreign_calls` and outnumber its calls into its own module. Only resolved "
            "calls to project modules are counted."
        ),
        example="def label(o), do: Order.id(o) <> Order.name(o) <> Order.date(o) <> Order.total(o)",
    ),
    _rule(
        "EX1007", "Inappropriate Intimacy", TRADITIONAL, "D1",
        "Two modules call into each other heavily and know too much about each other.",
        params={"min_mutual_calls": Param("int", 3, "calls needed in each direction")},
        description=(
            "Flags pairs of modules where each calls the other at least `min_mutual_calls` "
            "times; the finding is anchored at the alphabetically first module."
        ),
        example="# A calls B.x three times and B calls A.y three times",
    ),
    _rule(
        "EX1008", "Speculative Generalization", TRADITIONAL, "D1",
        "Code exists for needs that never came: private functions nobody calls, parameters nobody reads.",
        description=(
            "Flags private functions without any call or capture in the project, and bare "
            "parameters (not starting with `_`) that are never read in the clause."
        ),
        example="defp helper(x), do: x  # never called",
    ),
    _rule(
        "EX1009", "Primitive Obsession", TRADITIONAL, "D3",
        "The same group of primitive values travels together instead of forming a struct.",
        heuristic=True,
        params={
            "min_clump_size": Param("int", 3, "parameter names in a group"),
            "min_clump_occurrences": Param("int", 2, "functions sharing the group"),
        },
        description=(
            "Looks for data clumps: at least `min_clump_size` identically named parameters "
            "shared by at least `min_clump_occurrences` functions of a module that defines no "
            "struct holding those fields."
        ),
        example="def move(x, y, z), do: :ok\ndef scale(x, y, z), do: :ok",
    ),
    # --- traditional, history ---------------------------------------------
    _rule(
        "EX1101", "Shotgun Surgery", TRADITIONAL_HISTORY, "D1 D17",
        "Changing one file habitually forces changes in many others.",
        params={
            "min_support": Param("int", 5, "commits in which both files changed"),
            "min_confidence": Param("float", 0.6, "share of the partner's commits that include the file"),
            "min_fanout": Param("int", 3, "strongly coupled partner files"),
        },
        description=(
            "Mines co-change coupling from an exported commit log (`--history`). A file is "
            "flagged when at least `min_fanout` other files changed together with it in at "
            "least `min_support` commits and in at least `min_confidence` of their own commits."
        ),
        example="# lib/schema.ex changes in the same commits as three other files, again and again",
    ),
    _rule(
        "EX1102", "Divergent Change", TRADITIONAL_HISTORY, "D1",
        "One file keeps changing for several unrelated reasons.",
        heuristic=True,
        params={
            "min_changes": Param("int", 10, "commits touching the file"),
            "min_cluster": Param("int", 2, "partner files in a cluster"),
            "min_clusters": Param("int", 2, "unrelated clusters needed"),
        },
        description=(
            "Clusters the files that change together with a frequently changed file; files are "
            "linked when they appear in the same commit with it. Two or more separate clusters "
            "suggest the file mixes unrelated concerns. Needs `--history`."
        ),
        example="# lib/core.ex changes with {a, b} in some commits and with {c, d} in others",
    ),
    # --- Elixir-specific, design ------------------------------------------
    _rule(
        "EX1201", "Unsupervised process", ELIXIR_DESIGN, "D5",
        "A long-lived process is started outside any supervision tree.",
        params={
            "start_functions": Param(
                "list",
                ["spawn", "spawn_link", "GenServer.start", "GenServer.start_link", "Task.start",
                 "Task.start_link", "Agent.start", "Agent.start_link"],
                "process-starting calls",
            ),
        },
        description=(
            "Flags process-starting calls whose started module is not listed in any "
            "supervisor child list, unless the call sits in a supervised module. Bare `spawn` "
            "is always flagged. Findings in files with computed child lists are marked heuristic."
        ),
        example="def start, do: GenServer.start_link(Worker, [])",
    ),
    _rule(
        "EX1202", "GenServer Envy", ELIXIR_DESIGN, "D8",
        "A Task or Agent is driven like a GenServer, with hand-written server callbacks or receive loops.",
        heuristic=True,
        description=(
            "Flags modules that use Task or Agent and also define handle_call/3, handle_cast/2 "
            "or handle_info/2 without `use GenServer`, or that run a receive loop around Agent calls."
        ),
        example="def init, do: Agent.start_link(fn -> 0 end)\ndef handle_call(:get, _from, s), do: {:reply, s, s}",
    ),
    _rule(
        "EX1203", "Agent Obsession", ELIXIR_DESIGN, "D8",
        "Many modules reach directly into the same Agent instead of going through one owner.",
        params={"min_client_modules": Param("int", 3, "distinct modules accessing one agent")},
        description=(
            "Flags a named agent (an atom or module name given as the first argument of "
            "Agent.get/update/get_and_update/cast) accessed from at least `min_client_modules` "
            "modules."
        ),
        example="Agent.update(:counter, &(&1 + 1))  # repeated in three modules",
    ),
    _rule(
        "EX1204", "Large messages", ELIXIR_DESIGN, "D13",
        "Processes exchange big messages, which are copied between process heaps.",
        heuristic=True,
        params={"max_payload_nodes": Param("int", 50, "syntax nodes in the message expression")},
        description=(
            "Flags send/2, GenServer.call and GenServer.cast whose message expression has at "
            "least `max_payload_nodes` syntax nodes. Message frequency cannot be seen statically."
        ),
        example="send(pid, %{a: 1, b: 2, ...})  # a very large literal",
    ),
    _rule(
        "EX1205", "Complex multi-clause function", ELIXIR_DESIGN, "D10",
        "Too much business logic is packed into many clauses with guards and patterns.",
        params={
            "max_clauses": Param("int", 5, "clauses"),
            "min_guards": Param("int", 3, "guard conditions over all clauses"),
            "min_pattern_clauses": Param("int", 3, "clauses with non-variable patterns"),
        },
        description=(
            "Flags functions with at least `max_clauses` clauses that also use at least "
            "`min_guards` guard conditions or have at least `min_pattern_clauses` clauses "
            "matching on non-variable patterns."
        ),
        example="def price(%A{} = x) when x.v > 0, do: ...\n# ... five or more such clauses",
    ),
    _rule(
        "EX1206", "Complex API error handling", ELIXIR_DESIGN, "D2",
        "One function untangles many different error shapes returned by an API.",
        params={"max_error_shapes": Param("int", 4, "distinct {:error, ...} patterns")},
        description=(
            "Counts distinct `{:error, ...}` patterns matched in case clauses and `with` else "
            "clauses of a function and flags it at `max_error_shapes`."
        ),
        example="case api() do\n  {:error, :timeout} -> ...\n  {:error, :closed} -> ...\n  # ...\nend",
    ),
    _rule(
        "EX1207", "Exceptions for control flow", ELIXIR_DESIGN, "D5 D11",
        "Exceptions are raised or rescued to steer ordinary program flow.",
        heuristic=True,
        description=(
            "Flags public functions without a `!` suffix that raise or throw inside a "
            "case/cond/with/if branch, and try/rescue blocks that wrap calls into the project itself."
        ),
        example='def parse(s) do\n  case Integer.parse(s) do\n    :error -> raise "bad"\n    {n, _} -> n\n  end\nend',
    ),
    _rule(
        "EX1208", "Untested polymorphic behavior", ELIXIR_DESIGN, "D7",
        "An unguarded parameter is handed to a protocol that may not be implemented for it.",
        heuristic=True,
        description=(
            "Flags public clauses passing a bare, unguarded parameter as first argument to a "
            "function of a protocol defined in the project."
        ),
        example="def show(x), do: Render.render(x)",
    ),
    _rule(
        "EX1209", "Code organization by process", ELIXIR_DESIGN, "D5",
        "A process is used where plain modules and functions would do.",
        heuristic=True,
        description=(
            "Flags GenServer or Agent modules whose callbacks never read or change the held "
            "state: every reply is computed from the arguments alone."
        ),
        example="def handle_call({:add, a, b}, _from, state), do: {:reply, a + b, state}",
    ),
    _rule(
        "EX1210", "Data manipulation by migration", ELIXIR_DESIGN, "D9",
        "A migration changes both the schema and the data it holds.",
        description=(
            "Flags Ecto migrations that call structural helpers (create, alter, drop, table, "
            "index) and also touch data through Repo calls or execute/1 with INSERT, UPDATE "
            "or DELETE statements."
        ),
        example='def change do\n  alter table(:users) do\n    add :age, :integer\n  end\n  Repo.update_all(User, set: [age: 0])\nend',
    ),
    # --- Elixir-specific, low-level -----------------------------------------
    _rule(
        "EX1301", "Working with invalid data", ELIXIR_LOWLEVEL, "D5",
        "Values from outside the system are used without validation.",
        heuristic=True,
        params={"boundary_globs": Param("list", ["*Controller", "*_web/**"], "module names or paths of boundary modules")},
        description=(
            "In boundary modules (module name or file path matching `boundary_globs`), flags "
            "public clauses that use a bare, unguarded parameter directly in arithmetic, "
            "concatenation or bracket access."
        ),
        example='def show(conn, params), do: json(conn, params["page"] + 1)',
    ),
    _rule(
        "EX1302", "Map/struct dynamic access", ELIXIR_LOWLEVEL, "D7",
        "Struct fields are read dynamically, or a field the struct does not define is read.",
        description=(
            "Flags `v[:key]` on a variable bound by a struct pattern in the same clause, and "
            "`v.key` where the project struct has no such field."
        ),
        example="def f(%Point{} = p), do: p[:x]",
    ),
    _rule(
        "EX1303", "Unplanned value extraction", ELIXIR_LOWLEVEL, "D7",
        "A parse failure is silently replaced by a default instead of crashing or being handled.",
        heuristic=True,
        params={
            "parse_functions": Param(
                "list", ["Integer.parse", "Float.parse", "Date.from_iso8601"], "parse-style calls"
            )
        },
        description=(
            "Flags parse-style calls whose result is defaulted with `||` or a Keyword.get-like "
            "fallback, or matched by a case whose catch-all clause substitutes a value."
        ),
        example="page = Integer.parse(params[\"page\"]) || 1",
    ),
    _rule(
        "EX1304", "Modules with identical names", ELIXIR_LOWLEVEL, "D5",
        "Two module definitions share a name, so they cannot be loaded together.",
        severity="error",
        description="Reports every fully qualified module name defined more than once in the project.",
        example="defmodule Utils do end  # in two files",
    ),
    _rule(
        "EX1305", "Unnecessary macro", ELIXIR_LOWLEVEL, "D5",
        "A macro does what a function could do.",
        heuristic=True,
        description=(
            "Flags defmacro bodies that are a single quote block which only unquotes "
            "arguments as plain values and defines nothing in the caller."
        ),
        example="defmacro double(x), do: quote(do: 2 * unquote(x))",
    ),
    _rule(
        "EX1306", "App configuration for code libs", ELIXIR_LOWLEVEL, "D5",
        "Library code reads global application config instead of taking options.",
        params={"lib_globs": Param("list", ["lib/**"], "paths of library code")},
        description=(
            "Flags Application.get_env/fetch_env/fetch_env! calls inside functions of library "
            "modules (under `lib_globs`) that do not implement the Application behaviour."
        ),
        example="def timeout, do: Application.get_env(:my_lib, :timeout)",
    ),
    _rule(
        "EX1307", "Compile-time global configuration", ELIXIR_LOWLEVEL, "D5",
        "A module attribute freezes configuration at compile time.",
        description=(
            "Flags module attribute definitions whose value calls Application.get_env, "
            "fetch_env, fetch_env! or compile_env."
        ),
        example="@timeout Application.get_env(:my_app, :timeout)",
    ),
    _rule(
        "EX1308", '"Use" instead of "import"', ELIXIR_LOWLEVEL, "D5",
        "`use` hides what a module injects when a plain `import` would be enough.",
        description=(
            "Flags `use M` where M is a project module whose __using__ macro only imports, "
            "aliases or requires."
        ),
        example="use Helpers  # Helpers.__using__ only does `import Helpers`",
    ),
]

_BY_ID = {r.id: r for r in _RULES}


def registry() -> list[RuleDescriptor]:
    """All rule descriptors, ordered by id."""
    return sorted(_RULES, key=lambda r: r.id)


def get_rule(rule_id: str) -> RuleDescriptor | None:
    return _BY_ID.get(rule_id)


def inventory_counts(rules: list[RuleDescriptor] | None = None) -> dict[str, int]:
    rules = registry() if rules is None else rules
    cats = [r.category for r in rules]
    traditional = sum(1 for c in cats if c in (TRADITIONAL, TRADITIONAL_HISTORY))
    return {
        "total": len(rules),
        "traditional": traditional,
        "elixir_specific": len(rules) - traditional,
        "design_related": cats.count(ELIXIR_DESIGN),
        "low_level": cats.count(ELIXIR_LOWLEVEL),
    }
