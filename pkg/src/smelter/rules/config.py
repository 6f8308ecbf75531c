"""Loading and validating ``smelter.json``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from pathlib import Path
from typing import Any

from smelter.rules.registry import SEVERITIES, Param, get_rule, registry

CONFIG_FILE = "smelter.json"
DEFAULT_EXCLUDE = ("deps/**", "_build/**", "test/**")
DEFAULT_INCLUDE = ("**",)
_TOP_KEYS = {"fail_level", "include", "exclude", "rules", "tolerant"}
_RULE_KEYS = {"enabled", "severity", "params"}


class ConfigError(Exception):
    """Base class of every configuration problem."""


class ConfigParseError(ConfigError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownRule(ConfigError):
    def __init__(self, rule_id: str) -> None:
        super().__init__(f"unknown rule {rule_id!r}")
        self.rule_id = rule_id


class UnknownParam(ConfigError):
    def __init__(self, rule_id: str, name: str) -> None:
        super().__init__(f"rule {rule_id} has no parameter {name!r}")
        self.rule_id = rule_id
        self.name = name


class TypeMismatch(ConfigError):
    def __init__(self, rule_id: str, param: str, expected: str) -> None:
        super().__init__(f"rule {rule_id} parameter {param!r} must be of type {expected}")
        self.rule_id = rule_id
        self.param = param
        self.expected = expected


@dataclass
class AnalysisConfig:
    enabled: dict[str, bool] = field(default_factory=dict)
    severity: dict[str, str] = field(default_factory=dict)
    params: dict[str, dict[str, Any]] = field(default_factory=dict)
    fail_level: str = "warning"
    include: tuple[str, ...] = DEFAULT_INCLUDE
    exclude: tuple[str, ...] = DEFAULT_EXCLUDE
    tolerant: bool = True

    @classmethod
    def defaults(cls) -> AnalysisConfig:
        rules = registry()
        return cls(
            enabled={r.id: True for r in rules},
            severity={r.id: r.default_severity for r in rules},
            params={r.id: r.defaults() for r in rules},
        )

    def is_enabled(self, rule_id: str) -> bool:
        return self.enabled.get(rule_id, True)

    def rule_params(self, rule_id: str) -> dict[str, Any]:
        return dict(self.params.get(rule_id, {}))

    def included(self, rel_path: str) -> bool:
        """Whether a root-relative posix path passes the include/exclude globs."""
        if any(fnmatchcase(rel_path, g) for g in self.exclude):
            return False
        return any(fnmatchcase(rel_path, g) for g in self.include)

    def restricted_to(self, rule_ids: list[str]) -> AnalysisConfig:
        """Copy with only ``rule_ids`` enabled (they must exist)."""
        for rid in rule_ids:
            if get_rule(rid) is None:
                raise UnknownRule(rid)
        wanted = set(rule_ids)
        return AnalysisConfig(
            enabled={rid: on and rid in wanted for rid, on in self.enabled.items()},
            severity=dict(self.severity),
            params={k: dict(v) for k, v in self.params.items()},
            fail_level=self.fail_level,
            include=self.include,
            exclude=self.exclude,
            tolerant=self.tolerant,
        )

    def to_dict(self) -> dict:
        return {
            "fail_level": self.fail_level,
            "include": list(self.include),
            "exclude": list(self.exclude),
            "tolerant": self.tolerant,
            "rules": {
                rid: {
                    "enabled": self.enabled[rid],
                    "severity": self.severity[rid],
                    "params": self.params[rid],
                }
                for rid in sorted(self.enabled)
            },
        }


def coerce_param(rule_id: str, name: str, spec: Param, value: Any) -> Any:
    """Check a configured parameter value against its declared type."""
    t = spec.type
    if t == "bool":
        if isinstance(value, bool):
            return value
    elif t == "int":
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif t == "float":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif t == "str":
        if isinstance(value, str):
            return value
    elif t == "list":
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        if isinstance(value, list) and all(isinstance(v, str) for v in value):
            return list(value)
    raise TypeMismatch(rule_id, name, t)


def _line_of(text: str, key: str) -> int:
    idx = text.find(json.dumps(key))
    return text.count("\n", 0, idx) + 1 if idx >= 0 else 1


def _globs(text: str, key: str, value: Any) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigParseError(_line_of(text, key), f"{key!r} must be a list of strings")
    return tuple(value)


def parse_config(text: str) -> AnalysisConfig:
    """Build a config from JSON text, rejecting anything unknown."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigParseError(err.lineno, err.msg) from None
    if not isinstance(data, dict):
        raise ConfigParseError(1, "top level must be an object")
    cfg = AnalysisConfig.defaults()
    for key, value in data.items():
        if key not in _TOP_KEYS:
            raise ConfigParseError(_line_of(text, key), f"unknown key {key!r}")
        if key == "fail_level":
            if value not in SEVERITIES:
                raise ConfigParseError(_line_of(text, key), f"fail_level must be one of {', '.join(SEVERITIES)}")
            cfg.fail_level = value
        elif key == "include":
            cfg.include = _globs(text, key, value)
        elif key == "exclude":
            cfg.exclude = _globs(text, key, value)
        elif key == "tolerant":
            if not isinstance(value, bool):
                raise ConfigParseError(_line_of(text, key), "tolerant must be true or false")
            cfg.tolerant = value
        elif key == "rules":
            if not isinstance(value, dict):
                raise ConfigParseError(_line_of(text, key), "rules must be an object")
            for rid, entry in value.items():
                _apply_rule(cfg, text, rid, entry)
    return cfg


def _apply_rule(cfg: AnalysisConfig, text: str, rid: str, entry: Any) -> None:
    desc = get_rule(rid)
    if desc is None:
        raise UnknownRule(rid)
    if not isinstance(entry, dict):
        raise ConfigParseError(_line_of(text, rid), f"settings of {rid} must be an object")
    for k, v in entry.items():
        if k not in _RULE_KEYS:
            raise ConfigParseError(_line_of(text, k), f"unknown key {k!r} in {rid}")
        if k == "enabled":
            if not isinstance(v, bool):
                raise ConfigParseError(_line_of(text, rid), f"{rid}.enabled must be true or false")
            cfg.enabled[rid] = v
        elif k == "severity":
            if v not in SEVERITIES:
                raise ConfigParseError(_line_of(text, rid), f"{rid}.severity must be one of {', '.join(SEVERITIES)}")
            cfg.severity[rid] = v
        elif k == "params":
            if not isinstance(v, dict):
                raise ConfigParseError(_line_of(text, rid), f"{rid}.params must be an object")
            for name, value in v.items():
                spec = desc.params.get(name)
                if spec is None:
                    raise UnknownParam(rid, name)
                cfg.params[rid][name] = coerce_param(rid, name, spec, value)


def load_config(path: str | Path | None = None) -> AnalysisConfig:
    """Defaults when ``path`` is None, otherwise the validated file contents.

    A missing file is reported as :class:`ConfigError`.
    """
    if path is None:
        return AnalysisConfig.defaults()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except (OSError, UnicodeDecodeError) as err:
        raise ConfigError(f"cannot read config file {p}: {err}") from None
    return parse_config(text)


def default_config_json() -> str:
    return json.dumps(AnalysisConfig.defaults().to_dict(), indent=2) + "\n"
