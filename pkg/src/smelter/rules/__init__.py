"""Rule catalog, configuration, findings and the analysis engine."""

from smelter.rules.config import (
    AnalysisConfig,
    ConfigError,
    ConfigParseError,
    TypeMismatch,
    UnknownParam,
    UnknownRule,
    load_config,
    parse_config,
)
from smelter.rules.engine import (
    AnalysisContext,
    AnalysisResult,
    ScanStats,
    analyze_files,
    analyze_sources,
    discover_files,
    run_analysis,
)
from smelter.rules.findings import Diagnostic, Finding
from smelter.rules.registry import RuleDescriptor, get_rule, inventory_counts, registry

__all__ = [
    "AnalysisConfig",
    "AnalysisContext",
    "AnalysisResult",
    "ConfigError",
    "ConfigParseError",
    "Diagnostic",
    "Finding",
    "RuleDescriptor",
    "ScanStats",
    "TypeMismatch",
    "UnknownParam",
    "UnknownRule",
    "analyze_files",
    "analyze_sources",
    "discover_files",
    "get_rule",
    "inventory_counts",
    "load_config",
    "parse_config",
    "registry",
    "run_analysis",
]
