"""Command-line interface: ``smelter scan|list-rules|explain|init-config``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from smelter import __version__
from smelter.history import LogParseError, ingest_change_log
from smelter.model import model_to_dict
from smelter.report import Report, render_json, render_text
from smelter.rules.config import CONFIG_FILE, ConfigError, default_config_json, load_config
from smelter.rules.engine import analyze_files, discover_files
from smelter.rules.registry import CATEGORIES, get_rule, registry, severity_rank

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_PARSE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit with 2 (argparse's default too)
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smelter", description="Detect code smells in Elixir projects.")
    parser.add_argument("--version", action="version", version=f"smelter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    scan = sub.add_parser("scan", help="analyze source files and report smells")
    scan.add_argument("paths", nargs="*", default=["."], help="files or directories (default: .)")
    scan.add_argument("--config", help=f"configuration file (default: ./{CONFIG_FILE} if present)")
    scan.add_argument("--format", choices=("text", "json"), default="text")
    scan.add_argument("--output", help="write the report to this file instead of stdout")
    scan.add_argument("--history", help="change log enabling EX1101/EX1102")
    scan.add_argument("--strict", action="store_true", help="fail on any parse error instead of recovering")
    scan.add_argument("--rules", help="comma-separated rule ids to run (others are disabled)")
    scan.add_argument("--no-color", action="store_true", help="disable ANSI colors")
    scan.add_argument("--dump-model", nargs="?", const="-", metavar="PATH",
                      help="write the project model as JSON (to stderr without PATH)")
    scan.add_argument("--jobs", type=int, default=1, help="parse files with N threads")

    lr = sub.add_parser("list-rules", help="print the rule catalog")
    lr.add_argument("--format", choices=("text", "json"), default="text")
    lr.add_argument("--category", choices=CATEGORIES, help="only rules of this category")

    ex = sub.add_parser("explain", help="describe one rule")
    ex.add_argument("rule_id")

    init = sub.add_parser("init-config", help=f"write ./{CONFIG_FILE} with every default")
    init.add_argument("--force", action="store_true", help="overwrite an existing file")
    init.add_argument("--path", default=CONFIG_FILE, help=argparse.SUPPRESS)
    return parser


def _use_color(args, stream: TextIO) -> bool:
    if args.no_color or args.output or "NO_COLOR" in os.environ:
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def cmd_scan(args, out: TextIO, err: TextIO) -> int:
    try:
        config_path = args.config
        if config_path is None and Path(CONFIG_FILE).is_file():
            config_path = CONFIG_FILE
        config = load_config(config_path)
        if args.rules:
            config = config.restricted_to([r.strip() for r in args.rules.split(",") if r.strip()])
    except ConfigError as e:
        print(f"smelter: config error: {e}", file=err)
        return EXIT_USAGE
    if args.jobs < 1:
        print("smelter: --jobs must be at least 1", file=err)
        return EXIT_USAGE
    missing = [p for p in args.paths if not Path(p).exists()]
    if missing:
        print(f"smelter: no such file or directory: {', '.join(missing)}", file=err)
        return EXIT_USAGE
    history = None
    if args.history:
        try:
            history = ingest_change_log(args.history)
        except FileNotFoundError:
            print(f"smelter: change log not found: {args.history}", file=err)
            return EXIT_USAGE
        except LogParseError as e:
            print(f"smelter: change log {args.history}: {e}", file=err)
            return EXIT_USAGE

    files = [p for _, p in discover_files(args.paths, config)]
    result = analyze_files(files, config, history=history, strict=args.strict, jobs=args.jobs)
    for d in result.diagnostics:
        where = f"{d.file}:{d.line}:{d.col}: " if d.file else ""
        print(f"{where}{d.severity}: [{d.source}] {d.message}", file=err)

    if args.dump_model:
        dump = json.dumps(model_to_dict(result.model), indent=2) + "\n"
        if args.dump_model == "-":
            err.write(dump)
        else:
            Path(args.dump_model).write_text(dump, encoding="utf-8")

    report = Report(result.findings, result.stats)
    if args.format == "json":
        text = render_json(report)
    else:
        text = render_text(report, color=_use_color(args, out))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)

    if result.stats.parse_errors:
        return EXIT_PARSE
    threshold = severity_rank(config.fail_level)
    if any(severity_rank(f.severity) >= threshold for f in result.findings):
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_list_rules(args, out: TextIO, err: TextIO) -> int:
    rules = [r for r in registry() if args.category in (None, r.category)]
    if args.format == "json":
        out.write(json.dumps([r.to_dict() for r in rules], indent=2) + "\n")
        return EXIT_OK
    for r in rules:
        kind = "heuristic" if r.heuristic else "certain"
        out.write(f"{r.id}  {r.category:<19}  {kind:<9}  {','.join(r.source_docs):<14}  {r.name}: {r.summary}\n")
    return EXIT_OK


def cmd_explain(args, out: TextIO, err: TextIO) -> int:
    r = get_rule(args.rule_id.upper())
    if r is None:
        print(f"smelter: unknown rule {args.rule_id!r} (see 'smelter list-rules')", file=err)
        return EXIT_USAGE
    lines = [
        f"{r.id}  {r.name}",
        f"category:  {r.category}",
        f"severity:  {r.default_severity} ({'heuristic' if r.heuristic else 'certain'})",
        f"sources:   {', '.join(r.source_docs)}",
        "",
        r.summary,
    ]
    if r.description and r.description != r.summary:
        lines += ["", r.description]
    if r.params:
        lines += ["", "parameters:"]
        lines += [f"  {k} = {json.dumps(p.default)}  ({p.type}) {p.description}" for k, p in r.params.items()]
    if r.example:
        lines += ["", "example:"] + [f"  {ln}" for ln in r.example.splitlines()]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_init_config(args, out: TextIO, err: TextIO) -> int:
    path = Path(args.path)
    if path.exists() and not args.force:
        print(f"smelter: {path} already exists (use --force to overwrite)", file=err)
        return EXIT_USAGE
    path.write_text(default_config_json(), encoding="utf-8")
    out.write(f"wrote {path}\n")
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "list-rules": cmd_list_rules,
    "explain": cmd_explain,
    "init-config": cmd_init_config,
}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    return COMMANDS[args.command](args, out, err)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
