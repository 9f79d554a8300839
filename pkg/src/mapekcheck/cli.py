"""Command-line front end for the conformance pipeline.

Subcommands: validate | constraints | extract | recover | check | diff |
render. Every stage reads and writes plain files so runs are repeatable
and diffable. Exit codes are uniform: 0 means clean/conformant, 1 means
findings were produced, 2 means a usage or input error.

Outputs derived from a planned architecture embed the SHA-256 of the
source file; `render` refuses report/diff pairs whose hashes disagree.
The domain-rule config is taken from --domain-config, falling back to
the REMEDY_DOMAIN_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from pathlib import Path

from .constraints import (
    CheckOptions,
    evaluate,
    generate_constraints,
    load_report,
    save_constraint_set,
    save_report,
)
from .diffing import diff_views, load_diff, save_diff
from .domain_rules import DomainConfigError, DomainRuleMatrix
from .dsl import Diagnostic, ParseResult, Severity, has_errors, parse_pa
from .model import (
    ModelIntegrityError,
    SchemaError,
    load_model,
    pa_to_model,
    save_model,
    to_package_view,
)
from .recovery import (
    MappingError,
    build_ca,
    lift_indirect,
    load_facts,
    load_mappings,
    save_facts,
)
from .render import ConformanceInputMismatch, render_conformance
from .scanner import scan_sources
from .validation import expand_loop_rules, validate_pa

OK = 0
FINDINGS = 1
INPUT_ERROR = 2

DOMAIN_CONFIG_ENV = "REMEDY_DOMAIN_CONFIG"


class _InputError(Exception):
    """Internal: aborts a subcommand with exit code 2."""


def _fail(message: str) -> "_InputError":
    return _InputError(message)


def _read_source(path: str) -> tuple[str, str]:
    """Return (text, sha256 hash) of a planned-architecture file."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise _fail(f"cannot read {path}: {exc}") from exc
    return raw.decode("utf-8"), hashlib.sha256(raw).hexdigest()


def _print_diagnostics(path: str, diagnostics: list[Diagnostic]) -> None:
    for diagnostic in diagnostics:
        print(f"{path}:{diagnostic}")


def _load_matrix(args: argparse.Namespace) -> DomainRuleMatrix:
    config_path = getattr(args, "domain_config", None) or os.environ.get(
        DOMAIN_CONFIG_ENV
    )
    if not config_path:
        return DomainRuleMatrix.all_active()
    try:
        return DomainRuleMatrix.load(config_path)
    except (OSError, DomainConfigError) as exc:
        raise _fail(f"cannot load domain-rule config: {exc}") from exc


def _parse_and_validate(path: str, matrix: DomainRuleMatrix) -> tuple:
    """Parse and validate a PA file, failing with exit 2 on any error."""
    text, pa_hash = _read_source(path)
    result: ParseResult = parse_pa(text)
    if result.pa is None:
        _print_diagnostics(path, result.diagnostics)
        raise _fail(f"{path} does not parse")
    diagnostics = validate_pa(result.pa, matrix)
    _print_diagnostics(path, diagnostics)
    if has_errors(diagnostics):
        raise _fail(f"{path} has validation errors")
    return result.pa, pa_hash


def _write_text(path: str, content: str) -> None:
    try:
        Path(path).write_text(content, encoding="utf-8")
    except OSError as exc:
        raise _fail(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    matrix = _load_matrix(args)
    text, _ = _read_source(args.pa)
    result = parse_pa(text)
    if result.pa is None:
        _print_diagnostics(args.pa, result.diagnostics)
        print(f"{len(result.diagnostics)} error(s), 0 warning(s)")
        return FINDINGS
    diagnostics = validate_pa(result.pa, matrix)
    _print_diagnostics(args.pa, diagnostics)
    errors = sum(1 for d in diagnostics if d.severity is Severity.ERROR)
    warnings = len(diagnostics) - errors
    print(f"{errors} error(s), {warnings} warning(s)")
    return FINDINGS if errors else OK


def _cmd_constraints(args: argparse.Namespace) -> int:
    matrix = _load_matrix(args)
    pa, pa_hash = _parse_and_validate(args.pa, matrix)
    constraint_set = generate_constraints(pa, matrix)
    constraint_set.pa_hash = pa_hash
    try:
        save_constraint_set(constraint_set, args.out)
    except OSError as exc:
        raise _fail(f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {len(constraint_set.constraints)} constraints to {args.out}")
    return OK


def _cmd_extract(args: argparse.Namespace) -> int:
    source_dir = Path(args.srcdir)
    if not source_dir.is_dir():
        raise _fail(f"{args.srcdir} is not a directory")
    result = scan_sources(source_dir)
    try:
        save_facts(result.facts, args.out)
    except OSError as exc:
        raise _fail(f"cannot write {args.out}: {exc}") from exc
    log_path = args.log or str(Path(args.out).with_suffix(".log"))
    _write_text(log_path, "".join(line + "\n" for line in result.log))
    for line in result.log:
        print(f"warning: {line}", file=sys.stderr)
    print(
        f"extracted {len(result.facts.elements)} code elements and "
        f"{len(result.facts.dependencies)} dependencies to {args.out}"
    )
    return OK


def _cmd_recover(args: argparse.Namespace) -> int:
    matrix = _load_matrix(args)
    pa, pa_hash = _parse_and_validate(args.pa, matrix)
    try:
        facts = load_facts(args.facts)
        mappings = load_mappings(args.mappings, pa, facts)
    except OSError as exc:
        raise _fail(str(exc)) from exc
    except (SchemaError, MappingError) as exc:
        raise _fail(str(exc)) from exc
    ca = lift_indirect(build_ca(facts, mappings, pa), facts, mappings)
    ca.pa_hash = pa_hash
    try:
        save_model(ca, args.out)
    except OSError as exc:
        raise _fail(f"cannot write {args.out}: {exc}") from exc
    print(
        f"recovered {sum(1 for _ in ca.elements())} elements and "
        f"{len(ca.relations)} relations to {args.out}"
    )
    return OK


def _cmd_check(args: argparse.Namespace) -> int:
    matrix = _load_matrix(args)
    pa, pa_hash = _parse_and_validate(args.pa, matrix)
    try:
        facts = load_facts(args.facts)
        mappings = load_mappings(args.mappings, pa, facts)
    except OSError as exc:
        raise _fail(str(exc)) from exc
    except (SchemaError, MappingError) as exc:
        raise _fail(str(exc)) from exc
    expanded = expand_loop_rules(pa)
    ca = lift_indirect(build_ca(facts, mappings, expanded), facts, mappings)
    constraint_set = generate_constraints(expanded, matrix)
    constraint_set.pa_hash = pa_hash
    report = evaluate(
        constraint_set, ca, CheckOptions(implicit_deny=args.implicit_deny)
    )
    try:
        save_report(report, args.out)
    except OSError as exc:
        raise _fail(f"cannot write {args.out}: {exc}") from exc
    summary = report.summary()
    for category in ("existence", "structural", "communication", "domain"):
        counts = summary[category]
        print(
            f"{category}: {counts['pass']} pass, {counts['violation']} violation(s)"
        )
    print(f"wrote report to {args.out}")
    return FINDINGS if report.violations() else OK


def _cmd_diff(args: argparse.Namespace) -> int:
    matrix = _load_matrix(args)
    pa, pa_hash = _parse_and_validate(args.pa, matrix)
    try:
        ca = load_model(args.ca_model)
    except OSError as exc:
        raise _fail(str(exc)) from exc
    except (SchemaError, ModelIntegrityError) as exc:
        raise _fail(str(exc)) from exc
    if ca.pa_hash is not None and ca.pa_hash != pa_hash:
        raise _fail(
            "current-architecture model was recovered against a different "
            "planned architecture"
        )
    expanded = expand_loop_rules(pa)
    diff = diff_views(
        to_package_view(pa_to_model(expanded)),
        to_package_view(ca),
        ignore_globs=tuple(args.ignore or ()),
    )
    diff.pa_hash = pa_hash
    try:
        save_diff(diff, args.out)
    except OSError as exc:
        raise _fail(f"cannot write {args.out}: {exc}") from exc
    print(
        f"{len(diff.missing_elements)} missing element(s), "
        f"{len(diff.extra_elements)} extra element(s), "
        f"{len(diff.missing_dependencies)} missing dependenc(ies), "
        f"{len(diff.refactored_dependencies)} refactored dependenc(ies)"
    )
    return OK if diff.is_empty() else FINDINGS


def _cmd_render(args: argparse.Namespace) -> int:
    matrix = _load_matrix(args)
    pa, pa_hash = _parse_and_validate(args.pa, matrix)
    try:
        report = load_report(args.report)
        diff = load_diff(args.diff)
    except OSError as exc:
        raise _fail(str(exc)) from exc
    except SchemaError as exc:
        raise _fail(str(exc)) from exc
    for label, embedded in (("report", report.pa_hash), ("diff", diff.pa_hash)):
        if embedded is not None and embedded != pa_hash:
            raise _fail(
                f"{label} was produced from a different planned architecture "
                f"than {args.pa}"
            )
    expanded = expand_loop_rules(pa)
    view = to_package_view(pa_to_model(expanded))
    try:
        text = render_conformance(view, diff, report)
    except ConformanceInputMismatch as exc:
        raise _fail(str(exc)) from exc
    _write_text(args.out, text)
    print(f"wrote diagram to {args.out}")
    clean = diff.is_empty() and not report.violations()
    return OK if clean else FINDINGS


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_domain_config(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--domain-config",
        metavar="FILE",
        help=(
            "JSON file of domain-rule toggles; falls back to the "
            f"{DOMAIN_CONFIG_ENV} environment variable, then to all-active"
        ),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapekcheck",
        description="Architectural conformance checking for MAPE-K systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate an architecture file")
    p.add_argument("pa", help="planned-architecture source (.remedy)")
    _add_domain_config(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("constraints", help="generate the constraint set")
    p.add_argument("pa")
    _add_domain_config(p)
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_constraints)

    p = sub.add_parser("extract", help="scan sources into a code-facts file")
    p.add_argument("srcdir")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--log", metavar="FILE", help="extraction log (default: <out>.log)")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("recover", help="build the current-architecture model")
    p.add_argument("pa")
    p.add_argument("facts")
    p.add_argument("mappings")
    _add_domain_config(p)
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("check", help="run the conformance check")
    p.add_argument("pa")
    p.add_argument("facts")
    p.add_argument("mappings")
    _add_domain_config(p)
    p.add_argument("--out", required=True, metavar="FILE")
    deny = p.add_mutually_exclusive_group()
    deny.add_argument(
        "--implicit-deny",
        dest="implicit_deny",
        action="store_true",
        help="flag interactions not covered by any rule (default)",
    )
    deny.add_argument(
        "--no-implicit-deny", dest="implicit_deny", action="store_false"
    )
    p.set_defaults(func=_cmd_check, implicit_deny=True)

    p = sub.add_parser("diff", help="diff planned against current architecture")
    p.add_argument("pa")
    p.add_argument("ca_model", metavar="ca-model")
    _add_domain_config(p)
    p.add_argument("--ignore", action="append", metavar="GLOB", help="name globs to skip")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("render", help="render the drift-annotated diagram")
    p.add_argument("pa")
    p.add_argument("report")
    p.add_argument("diff")
    _add_domain_config(p)
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="warning: %(message)s", level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
