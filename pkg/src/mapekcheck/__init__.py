"""Architectural conformance checking for MAPE-K self-adaptive systems.

The pipeline: parse a planned architecture (`dsl`, `validation`), derive
its structure model and constraints (`model`, `constraints`), recover
the current architecture from code facts (`scanner`, `recovery`),
evaluate and diff the two (`constraints`, `diffing`), and render the
drift-annotated diagram (`render`). The `cli` module wires the stages
into file-based subcommands.
"""

from .constraints import (
    CheckOptions,
    ConformanceReport,
    Constraint,
    ConstraintCategory,
    ConstraintModality,
    ConstraintSet,
    DriftClass,
    EngineError,
    Finding,
    FindingStatus,
    evaluate,
    generate_constraints,
    load_report,
    save_report,
)
from .diffing import DiffResult, MatchedPair, Matching, diff_views, match_elements
from .domain_rules import DOMAIN_RULES, DomainRule, DomainRuleMatrix
from .dsl import (
    AbstractionDecl,
    CommRule,
    Diagnostic,
    Modality,
    ParseResult,
    PlannedArchitecture,
    RuleOrigin,
    Severity,
    Span,
    format_pa,
    parse_pa,
    parse_pa_file,
)
from .kinds import AbstractionKind, DependencyKind
from .model import (
    ArchElement,
    ArchModel,
    ArchRelation,
    ModelIntegrityError,
    PackageNode,
    PackageView,
    SchemaError,
    load_model,
    pa_to_model,
    save_model,
    to_package_view,
)
from .recovery import (
    CodeDependency,
    CodeElement,
    CodeElementKind,
    CodeFacts,
    Mapping,
    MappingError,
    MappingSet,
    build_ca,
    lift_indirect,
    load_facts,
    load_mappings,
    save_facts,
    save_mappings,
)
from .render import render_conformance, render_view
from .scanner import ScanOptions, ScanResult, scan_sources
from .validation import expand_loop_rules, validate_pa

__version__ = "0.1.0"
