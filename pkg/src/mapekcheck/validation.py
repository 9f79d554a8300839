"""Design-time validation of a parsed architecture.

Seven diagnostic classes are produced on top of the parse:

* ``SELF_DEPENDENCY`` - a rule whose source equals its target;
* ``DUPLICATE_RULE`` - the same source/target/modality stated twice;
* ``UNDECLARED_IDENTIFIER`` - a rule naming an instance that was never
  declared (or declared with a different kind than the selector claims);
* ``ILLEGAL_KIND_PAIR`` - a rule between kinds the rule matrix forbids;
* ``CONTRADICTORY_RULES`` - must-use and must-not-use on the same pair;
* ``DOMAIN_RULE_CONFLICT`` (warning) - a user rule working against an
  active entry of the domain-rule matrix inside a domain-checked loop;
* ``UNLINKED_LOOP_RULE`` - a loop-level must-use with no member-level
  must-use crossing the two loops.

Uniqueness of identifiers and the presence of at least one Managing and
one Managed subsystem are checked as well.
"""

from __future__ import annotations

from dataclasses import replace

from .domain_rules import DomainRuleMatrix
from .dsl import (
    AbstractionDecl,
    CommRule,
    Diagnostic,
    Modality,
    PlannedArchitecture,
    RuleOrigin,
    Severity,
    Span,
)
from .kinds import AbstractionKind, rule_pair_allowed

K = AbstractionKind

_FALLBACK_SPAN = Span(1, 1, 1, 1)


def _span(obj: CommRule | AbstractionDecl | PlannedArchitecture) -> Span:
    return obj.span if obj.span is not None else _FALLBACK_SPAN


def _error(code: str, where: Span, message: str) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, where, message)


def _warning(code: str, where: Span, message: str) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, where, message)


def validate_pa(
    pa: PlannedArchitecture, matrix: DomainRuleMatrix | None = None
) -> list[Diagnostic]:
    """Run every design-time check and return the diagnostics found.

    `matrix` supplies the domain-rule activation flags used by the
    conflict warning; all entries are treated as active when omitted.
    """
    if matrix is None:
        matrix = DomainRuleMatrix.all_active()
    diagnostics: list[Diagnostic] = []

    declared = pa.declarations_by_id()
    seen: dict[str, AbstractionDecl] = {}
    for decl in pa.iter_instances():
        if decl.id in seen:
            diagnostics.append(
                _error(
                    "DUPLICATE_IDENTIFIER",
                    _span(decl),
                    f"identifier {decl.id!r} already declared as "
                    f"{seen[decl.id].kind.value}",
                )
            )
        else:
            seen[decl.id] = decl

    if not pa.managing:
        diagnostics.append(
            _error("MISSING_SUBSYSTEM", _span(pa), "no Managing subsystem declared")
        )
    if not pa.managed:
        diagnostics.append(
            _error("MISSING_SUBSYSTEM", _span(pa), "no Managed subsystem declared")
        )

    loops_of = pa.enclosing_loops()
    loop_flags = {loop.id: loop.domain_rules_enabled for loop in pa.loops()}

    triple_counts: dict[tuple[str, str, Modality], int] = {}
    pair_modalities: dict[tuple[str, str], set[Modality]] = {}
    for rule in pa.rules:
        key = (rule.source_id, rule.target_id, rule.modality)
        triple_counts[key] = triple_counts.get(key, 0) + 1
        pair_modalities.setdefault(rule.pair(), set()).add(rule.modality)

    contradiction_reported: set[tuple[str, str]] = set()
    pair_seen_modalities: dict[tuple[str, str], set[Modality]] = {}

    for rule in pa.rules:
        where = _span(rule)

        if rule.source_id == rule.target_id:
            diagnostics.append(
                _error(
                    "SELF_DEPENDENCY",
                    where,
                    f"{rule.source_kind.value.lower()} {rule.source_id!r} "
                    "must not depend on itself",
                )
            )

        resolved = True
        for role, ident, kind in (
            ("source", rule.source_id, rule.source_kind),
            ("target", rule.target_id, rule.target_kind),
        ):
            decl = declared.get(ident)
            if decl is None:
                diagnostics.append(
                    _error(
                        "UNDECLARED_IDENTIFIER",
                        where,
                        f"rule {role} {ident!r} is not declared",
                    )
                )
                resolved = False
            elif decl.kind is not kind:
                diagnostics.append(
                    _error(
                        "UNDECLARED_IDENTIFIER",
                        where,
                        f"rule {role} {ident!r} is declared as {decl.kind.value}, "
                        f"not {kind.value}",
                    )
                )
                resolved = False

        if not rule_pair_allowed(rule.source_kind, rule.target_kind):
            diagnostics.append(
                _error(
                    "ILLEGAL_KIND_PAIR",
                    where,
                    f"rules from {rule.source_kind.value} to "
                    f"{rule.target_kind.value} are not allowed",
                )
            )

        if triple_counts[(rule.source_id, rule.target_id, rule.modality)] > 1:
            diagnostics.append(
                _error(
                    "DUPLICATE_RULE",
                    where,
                    f"duplicated rule: {rule}",
                )
            )

        pair = rule.pair()
        seen_mods = pair_seen_modalities.setdefault(pair, set())
        opposite = (
            Modality.MUST_NOT_USE
            if rule.modality is Modality.MUST_USE
            else Modality.MUST_USE
        )
        if opposite in seen_mods and pair not in contradiction_reported:
            diagnostics.append(
                _error(
                    "CONTRADICTORY_RULES",
                    where,
                    f"must-use and must-not-use both declared for "
                    f"{pair[0]!r} -> {pair[1]!r}",
                )
            )
            contradiction_reported.add(pair)
        seen_mods.add(rule.modality)

        if resolved and rule.origin is RuleOrigin.USER:
            diagnostics.extend(_domain_conflicts(rule, where, loops_of, loop_flags, matrix))

    diagnostics.extend(_unlinked_loop_rules(pa, declared))
    return diagnostics


def _domain_conflicts(
    rule: CommRule,
    where: Span,
    loops_of: dict[str, str],
    loop_flags: dict[str, bool],
    matrix: DomainRuleMatrix,
) -> list[Diagnostic]:
    """Warn when a user rule opposes an active domain rule in its loop."""
    source_loop = loops_of.get(rule.source_id)
    target_loop = loops_of.get(rule.target_id)
    if source_loop is None or source_loop != target_loop:
        return []
    if not loop_flags.get(source_loop, False):
        return []
    entry = matrix.lookup(rule.source_kind, rule.target_kind)
    if entry is None or not matrix.is_active(entry) or entry.modality is rule.modality:
        return []
    return [
        _warning(
            "DOMAIN_RULE_CONFLICT",
            where,
            f"rule '{rule}' is violating the domain rule number {entry.number} "
            f"({entry})",
        )
    ]


def _unlinked_loop_rules(
    pa: PlannedArchitecture, declared: dict[str, AbstractionDecl]
) -> list[Diagnostic]:
    """Flag loop-level must-use rules with no member-level link across them."""
    diagnostics: list[Diagnostic] = []
    for rule in pa.rules:
        if rule.modality is not Modality.MUST_USE:
            continue
        if rule.source_kind is not K.LOOP or rule.target_kind is not K.LOOP:
            continue
        source = declared.get(rule.source_id)
        target = declared.get(rule.target_id)
        if source is None or target is None or source.kind is not K.LOOP or target.kind is not K.LOOP:
            continue
        source_members = {d.id for d in source.walk()} - {source.id}
        target_members = {d.id for d in target.walk()} - {target.id}
        crossing = any(
            other.modality is Modality.MUST_USE
            and other.source_id in source_members
            and other.target_id in target_members
            for other in pa.rules
        )
        if not crossing:
            diagnostics.append(
                _error(
                    "UNLINKED_LOOP_RULE",
                    _span(rule),
                    f"loop rule '{rule}' has no member-level must-use rule "
                    f"crossing {rule.source_id!r} and {rule.target_id!r}",
                )
            )
    return diagnostics


def expand_loop_rules(pa: PlannedArchitecture) -> PlannedArchitecture:
    """Expand loop-level must-not-use rules to their member pairs.

    Every `loop A must-not-use loop B` gains one derived must-not-use rule
    per (direct member of A, direct member of B) pair not already covered
    by a rule on that pair. Loop-level must-use rules stay as declared;
    the validator guarantees member-level rules already realize them.
    Applying the expansion twice changes nothing.
    """
    declared = pa.declarations_by_id()
    covered: set[tuple[str, str]] = {rule.pair() for rule in pa.rules}
    expanded: list[CommRule] = list(pa.rules)
    for rule in pa.rules:
        if rule.modality is not Modality.MUST_NOT_USE:
            continue
        if rule.source_kind is not K.LOOP or rule.target_kind is not K.LOOP:
            continue
        source = declared.get(rule.source_id)
        target = declared.get(rule.target_id)
        if source is None or target is None:
            continue
        for member_a in source.children:
            for member_b in target.children:
                pair = (member_a.id, member_b.id)
                if pair in covered:
                    continue
                covered.add(pair)
                expanded.append(
                    CommRule(
                        source_kind=member_a.kind,
                        source_id=member_a.id,
                        modality=Modality.MUST_NOT_USE,
                        target_kind=member_b.kind,
                        target_id=member_b.id,
                        origin=RuleOrigin.LOOP_EXPANSION,
                        span=rule.span,
                    )
                )
    return replace(pa, rules=expanded)
