"""Constraint generation and conformance evaluation.

From a validated architecture the generator derives four categories of
checks: existence of every declared instance, containment of every
non-root instance, one require/forbid check per communication rule, and
the active domain-rule entries instantiated inside every loop declared
with domain checking. The evaluator runs a constraint set against a
recovered model and reports one finding per check, plus one finding per
undeclared interaction when implicit-deny is on.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .domain_rules import DomainRuleMatrix
from .dsl import Modality, PlannedArchitecture
from .kinds import AbstractionKind, parse_abstraction_kind
from .model import ArchModel, SchemaError
from .validation import expand_loop_rules


class ConstraintCategory(str, enum.Enum):
    EXISTENCE = "existence"
    STRUCTURAL = "structural"
    COMMUNICATION = "communication"
    DOMAIN = "domain"


class ConstraintModality(str, enum.Enum):
    REQUIRE = "require"
    FORBID = "forbid"


class DriftClass(str, enum.Enum):
    MISSING_ABSTRACTION = "missing-abstraction"
    STRUCTURAL_VIOLATION = "structural-violation"
    COMMUNICATION_DRIFT = "communication-drift"
    DOMAIN_DRIFT = "domain-drift"
    UNDECLARED_INTERACTION = "undeclared-interaction"


class EngineError(ValueError):
    """Raised when a constraint set is inconsistent with its architecture."""


@dataclass(frozen=True)
class Constraint:
    """One generated check against the current architecture."""

    id: str
    category: ConstraintCategory
    modality: ConstraintModality
    subject: str
    subject_kind: AbstractionKind
    object: str | None = None
    object_kind: AbstractionKind | None = None
    container: str | None = None
    container_kind: AbstractionKind | None = None


@dataclass
class ConstraintSet:
    pa_name: str
    constraints: list[Constraint] = field(default_factory=list)
    pa_hash: str | None = None

    def by_category(self, category: ConstraintCategory) -> list[Constraint]:
        return [c for c in self.constraints if c.category is category]

    def ids(self) -> set[str]:
        return {c.id for c in self.constraints}


def generate_constraints(
    pa: PlannedArchitecture, matrix: DomainRuleMatrix | None = None
) -> ConstraintSet:
    """Derive the four constraint categories from a validated architecture."""
    if matrix is None:
        matrix = DomainRuleMatrix.all_active()
    expanded = expand_loop_rules(pa)
    constraints: list[Constraint] = []

    declared = {decl.id: decl for decl in expanded.iter_instances()}
    parents = expanded.parent_ids()

    for decl in expanded.iter_instances():
        constraints.append(
            Constraint(
                id=f"exist_{decl.id}",
                category=ConstraintCategory.EXISTENCE,
                modality=ConstraintModality.REQUIRE,
                subject=decl.id,
                subject_kind=decl.kind,
            )
        )

    for decl in expanded.iter_instances():
        parent_id = parents.get(decl.id)
        if parent_id is None:
            continue
        constraints.append(
            Constraint(
                id=f"composite_{decl.id}",
                category=ConstraintCategory.STRUCTURAL,
                modality=ConstraintModality.REQUIRE,
                subject=decl.id,
                subject_kind=decl.kind,
                container=parent_id,
                container_kind=declared[parent_id].kind,
            )
        )

    for rule in expanded.rules:
        if rule.modality is Modality.MUST_USE:
            prefix, modality = "access", ConstraintModality.REQUIRE
        else:
            prefix, modality = "not_access", ConstraintModality.FORBID
        constraints.append(
            Constraint(
                id=f"{prefix}_{rule.source_id}_{rule.target_id}",
                category=ConstraintCategory.COMMUNICATION,
                modality=modality,
                subject=rule.source_id,
                subject_kind=rule.source_kind,
                object=rule.target_id,
                object_kind=rule.target_kind,
            )
        )

    for loop in expanded.loops():
        if not loop.domain_rules_enabled:
            continue
        members_by_kind: dict[AbstractionKind, list[str]] = {}
        for member in loop.children:
            members_by_kind.setdefault(member.kind, []).append(member.id)
        for entry in matrix.active_rules():
            if entry.modality is Modality.MUST_USE:
                prefix, modality = "domain_access", ConstraintModality.REQUIRE
            else:
                prefix, modality = "domain_not_access", ConstraintModality.FORBID
            for source_id in members_by_kind.get(entry.source, []):
                for target_id in members_by_kind.get(entry.target, []):
                    constraints.append(
                        Constraint(
                            id=f"{prefix}_{source_id}_{target_id}",
                            category=ConstraintCategory.DOMAIN,
                            modality=modality,
                            subject=source_id,
                            subject_kind=entry.source,
                            object=target_id,
                            object_kind=entry.target,
                        )
                    )

    seen: set[str] = set()
    for constraint in constraints:
        if constraint.id in seen:
            raise EngineError(f"duplicate constraint id {constraint.id!r}")
        seen.add(constraint.id)
    return ConstraintSet(pa_name=pa.name, constraints=constraints)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class FindingStatus(str, enum.Enum):
    PASS = "pass"
    VIOLATION = "violation"


@dataclass(frozen=True)
class Finding:
    """The outcome of one constraint (or one undeclared interaction)."""

    constraint_id: str
    category: ConstraintCategory
    status: FindingStatus
    subject: str
    object: str | None = None
    drift_class: DriftClass | None = None
    detail: str = ""


@dataclass
class ConformanceReport:
    pa_name: str
    ca_name: str
    findings: list[Finding] = field(default_factory=list)
    pa_hash: str | None = None

    def __post_init__(self) -> None:
        self.findings.sort(key=lambda f: (f.category.value, f.constraint_id))

    def summary(self) -> dict[str, dict[str, int]]:
        counts = {
            category.value: {"pass": 0, "violation": 0}
            for category in ConstraintCategory
        }
        for finding in self.findings:
            counts[finding.category.value][finding.status.value] += 1
        return counts

    def violations(self) -> list[Finding]:
        return [f for f in self.findings if f.status is FindingStatus.VIOLATION]

    def violations_in(self, category: ConstraintCategory) -> list[Finding]:
        return [f for f in self.violations() if f.category is category]


@dataclass(frozen=True)
class CheckOptions:
    """Evaluation switches; implicit-deny flags undeclared interactions."""

    implicit_deny: bool = True


_VIOLATION_DRIFT: dict[ConstraintCategory, DriftClass] = {
    ConstraintCategory.EXISTENCE: DriftClass.MISSING_ABSTRACTION,
    ConstraintCategory.STRUCTURAL: DriftClass.STRUCTURAL_VIOLATION,
    ConstraintCategory.COMMUNICATION: DriftClass.COMMUNICATION_DRIFT,
    ConstraintCategory.DOMAIN: DriftClass.DOMAIN_DRIFT,
}


def _relation_detail(relations: Iterable) -> str:
    kinds: set[str] = set()
    indirect = False
    for relation in relations:
        kinds.update(kind.value for kind in relation.kinds)
        indirect = indirect or relation.indirect
    parts = sorted(kinds)
    if indirect:
        parts.append("indirect")
    return ", ".join(parts) if parts else "declared"


def evaluate(
    constraint_set: ConstraintSet,
    ca: ArchModel,
    options: CheckOptions = CheckOptions(),
) -> ConformanceReport:
    """Check every constraint against a current-architecture model."""
    universe = {
        c.subject: c.subject_kind
        for c in constraint_set.constraints
        if c.category is ConstraintCategory.EXISTENCE
    }
    for constraint in constraint_set.constraints:
        for ident in (constraint.subject, constraint.object, constraint.container):
            if ident is not None and ident not in universe:
                raise EngineError(
                    f"corrupt constraint set: {constraint.id!r} references "
                    f"{ident!r}, which is not part of the architecture"
                )

    elements = list(ca.elements())
    by_id = ca.elements_by_id()
    parents = ca.parent_ids()
    present: set[tuple[str, AbstractionKind]] = {
        (element.name, element.stereotype) for element in elements
    }
    by_name: dict[str, list] = {}
    for element in elements:
        by_name.setdefault(element.name, []).append(element)

    relations_by_pair: dict[tuple[str, str], list] = {}
    for relation in ca.relations:
        pair = (by_id[relation.source].name, by_id[relation.target].name)
        relations_by_pair.setdefault(pair, []).append(relation)

    def ancestors(element) -> Iterable:
        cursor = parents.get(element.id)
        while cursor is not None:
            yield by_id[cursor]
            cursor = parents.get(cursor)

    findings: list[Finding] = []
    for constraint in constraint_set.constraints:
        findings.append(_check(constraint, present, by_name, relations_by_pair, ancestors))

    if options.implicit_deny:
        require_pairs = {
            (c.subject, c.object)
            for c in constraint_set.constraints
            if c.modality is ConstraintModality.REQUIRE and c.object is not None
        }
        for pair in sorted(relations_by_pair):
            source, target = pair
            if source not in universe or target not in universe:
                continue
            if pair in require_pairs:
                continue
            findings.append(
                Finding(
                    constraint_id=f"undeclared_{source}_{target}",
                    category=ConstraintCategory.COMMUNICATION,
                    status=FindingStatus.VIOLATION,
                    subject=source,
                    object=target,
                    drift_class=DriftClass.UNDECLARED_INTERACTION,
                    detail=(
                        "interaction not covered by any rule "
                        f"({_relation_detail(relations_by_pair[pair])})"
                    ),
                )
            )

    return ConformanceReport(
        pa_name=constraint_set.pa_name,
        ca_name=ca.name,
        findings=findings,
        pa_hash=constraint_set.pa_hash,
    )


def _check(constraint, present, by_name, relations_by_pair, ancestors) -> Finding:
    category = constraint.category

    if category is ConstraintCategory.EXISTENCE:
        ok = (constraint.subject, constraint.subject_kind) in present
        detail = (
            ""
            if ok
            else (
                f"no element named {constraint.subject!r} with stereotype "
                f"{constraint.subject_kind.value}"
            )
        )
        return _finding(constraint, ok, detail)

    if category is ConstraintCategory.STRUCTURAL:
        matches = [
            element
            for element in by_name.get(constraint.subject, [])
            if element.stereotype is constraint.subject_kind
        ]
        if not matches:
            return _finding(constraint, True, "element absent; existence check applies")
        ok = any(
            ancestor.name == constraint.container
            and ancestor.stereotype is constraint.container_kind
            for element in matches
            for ancestor in ancestors(element)
        )
        detail = (
            ""
            if ok
            else (
                f"{constraint.subject!r} is present but not contained in "
                f"{constraint.container!r} ({constraint.container_kind.value})"
            )
        )
        return _finding(constraint, ok, detail)

    # Communication and domain constraints compare against relations.
    pair = (constraint.subject, constraint.object)
    observed = relations_by_pair.get(pair, [])
    if constraint.modality is ConstraintModality.REQUIRE:
        ok = bool(observed)
        detail = (
            _relation_detail(observed)
            if ok
            else (
                f"no direct or indirect relation from {constraint.subject!r} "
                f"to {constraint.object!r}"
            )
        )
    else:
        ok = not observed
        detail = (
            ""
            if ok
            else (
                f"forbidden relation from {constraint.subject!r} to "
                f"{constraint.object!r} exists ({_relation_detail(observed)})"
            )
        )
    return _finding(constraint, ok, detail)


def _finding(constraint, ok: bool, detail: str) -> Finding:
    return Finding(
        constraint_id=constraint.id,
        category=constraint.category,
        status=FindingStatus.PASS if ok else FindingStatus.VIOLATION,
        subject=constraint.subject,
        object=constraint.object,
        drift_class=None if ok else _VIOLATION_DRIFT[constraint.category],
        detail=detail,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

REPORT_SCHEMA_VERSION = 1
CONSTRAINTS_SCHEMA_VERSION = 1


def report_to_dict(report: ConformanceReport) -> dict:
    data: dict = {
        "schemaVersion": REPORT_SCHEMA_VERSION,
        "paName": report.pa_name,
        "caName": report.ca_name,
    }
    if report.pa_hash is not None:
        data["paHash"] = report.pa_hash
    data["summary"] = report.summary()
    data["findings"] = [
        {
            "constraintId": f.constraint_id,
            "category": f.category.value,
            "status": f.status.value,
            "subject": f.subject,
            "object": f.object,
            "driftClass": f.drift_class.value if f.drift_class else None,
            "detail": f.detail,
        }
        for f in report.findings
    ]
    return data


def report_from_dict(data: dict) -> ConformanceReport:
    if not isinstance(data, dict):
        raise SchemaError("report file must hold a JSON object")
    if data.get("schemaVersion") != REPORT_SCHEMA_VERSION:
        raise SchemaError(
            f"schema-version mismatch: expected {REPORT_SCHEMA_VERSION}, "
            f"got {data.get('schemaVersion')!r}"
        )
    findings = []
    for entry in data.get("findings", []):
        try:
            findings.append(
                Finding(
                    constraint_id=entry["constraintId"],
                    category=ConstraintCategory(entry["category"]),
                    status=FindingStatus(entry["status"]),
                    subject=entry["subject"],
                    object=entry.get("object"),
                    drift_class=(
                        DriftClass(entry["driftClass"]) if entry.get("driftClass") else None
                    ),
                    detail=entry.get("detail", ""),
                )
            )
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"malformed finding entry: {exc}") from exc
    return ConformanceReport(
        pa_name=str(data.get("paName", "")),
        ca_name=str(data.get("caName", "")),
        findings=findings,
        pa_hash=data.get("paHash"),
    )


def save_report(report: ConformanceReport, path: str | Path) -> None:
    """Write a report deterministically: findings sorted, stable keys."""
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8"
    )


def load_report(path: str | Path) -> ConformanceReport:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed report file: {exc}") from exc
    return report_from_dict(data)


def constraint_set_to_dict(constraint_set: ConstraintSet) -> dict:
    data: dict = {
        "schemaVersion": CONSTRAINTS_SCHEMA_VERSION,
        "paName": constraint_set.pa_name,
    }
    if constraint_set.pa_hash is not None:
        data["paHash"] = constraint_set.pa_hash
    data["constraints"] = [
        {
            "id": c.id,
            "category": c.category.value,
            "modality": c.modality.value,
            "subject": c.subject,
            "subjectKind": c.subject_kind.value,
            "object": c.object,
            "objectKind": c.object_kind.value if c.object_kind else None,
            "container": c.container,
            "containerKind": c.container_kind.value if c.container_kind else None,
        }
        for c in constraint_set.constraints
    ]
    return data


def constraint_set_from_dict(data: dict) -> ConstraintSet:
    if not isinstance(data, dict):
        raise SchemaError("constraints file must hold a JSON object")
    if data.get("schemaVersion") != CONSTRAINTS_SCHEMA_VERSION:
        raise SchemaError(
            f"schema-version mismatch: expected {CONSTRAINTS_SCHEMA_VERSION}, "
            f"got {data.get('schemaVersion')!r}"
        )
    constraints = []
    for entry in data.get("constraints", []):
        try:
            constraints.append(
                Constraint(
                    id=entry["id"],
                    category=ConstraintCategory(entry["category"]),
                    modality=ConstraintModality(entry["modality"]),
                    subject=entry["subject"],
                    subject_kind=parse_abstraction_kind(entry["subjectKind"]),
                    object=entry.get("object"),
                    object_kind=(
                        parse_abstraction_kind(entry["objectKind"])
                        if entry.get("objectKind")
                        else None
                    ),
                    container=entry.get("container"),
                    container_kind=(
                        parse_abstraction_kind(entry["containerKind"])
                        if entry.get("containerKind")
                        else None
                    ),
                )
            )
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"malformed constraint entry: {exc}") from exc
    return ConstraintSet(
        pa_name=str(data.get("paName", "")),
        constraints=constraints,
        pa_hash=data.get("paHash"),
    )


def save_constraint_set(constraint_set: ConstraintSet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(constraint_set_to_dict(constraint_set), indent=2) + "\n",
        encoding="utf-8",
    )


def load_constraint_set(path: str | Path) -> ConstraintSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed constraints file: {exc}") from exc
    return constraint_set_from_dict(data)
