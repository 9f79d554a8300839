"""The seven validator diagnostic classes and loop-rule expansion."""

from __future__ import annotations

import random

import pytest

from genutil import generate_valid_pa
from mapekcheck import (
    AbstractionDecl,
    AbstractionKind,
    CommRule,
    Modality,
    PlannedArchitecture,
    RuleOrigin,
    Severity,
    expand_loop_rules,
    parse_pa,
    validate_pa,
)
from mapekcheck.domain_rules import DomainRuleMatrix
from mapekcheck.kinds import rule_pair_allowed

K = AbstractionKind


def codes(diagnostics):
    return [d.code for d in diagnostics]


def errors(diagnostics):
    return [d for d in diagnostics if d.severity is Severity.ERROR]


def parse_ok(source):
    result = parse_pa(source)
    assert result.ok, result.diagnostics
    return result.pa


LOOP_PA = (
    "Architecture A { Managing m { Loop l withDomainRules { "
    "Monitor m1; Monitor m2; Planner p1; } } Managed d { Sensor s1; } } Rules { %s };"
)


# -- clause (a): self dependency ---------------------------------------------


def test_self_dependency_error():
    pa = parse_ok(LOOP_PA % "monitor m1 must-use monitor m1;")
    diagnostics = validate_pa(pa)
    assert codes(errors(diagnostics)) == ["SELF_DEPENDENCY"]


def test_published_self_dependency_example():
    source = (
        "Architecture A { Managing m { Loop l { Monitor parameterMonitor; } } "
        "Managed d {} } Rules { "
        "monitor parameterMonitor must-use monitor parameterMonitor; };"
    )
    diagnostics = validate_pa(parse_ok(source))
    assert codes(errors(diagnostics)) == ["SELF_DEPENDENCY"]


# -- clause (b): duplicated rules --------------------------------------------


def test_duplicate_rule_flagged_on_every_occurrence():
    rule = "monitor m1 must-use monitor m2;"
    pa = parse_ok(LOOP_PA % (rule + rule))
    diagnostics = validate_pa(pa)
    assert codes(diagnostics).count("DUPLICATE_RULE") == 2


def test_same_pair_opposite_modality_is_not_duplicate():
    pa = parse_ok(
        LOOP_PA % "monitor m1 must-use monitor m2; monitor m1 must-not-use monitor m2;"
    )
    assert "DUPLICATE_RULE" not in codes(validate_pa(pa))


# -- clause (c): undeclared identifiers --------------------------------------


def test_undeclared_identifier():
    pa = parse_ok(LOOP_PA % "monitor ghost must-use monitor m1;")
    diagnostics = errors(validate_pa(pa))
    assert codes(diagnostics) == ["UNDECLARED_IDENTIFIER"]
    assert "ghost" in diagnostics[0].message


def test_kind_mismatch_counts_as_undeclared():
    pa = parse_ok(LOOP_PA % "monitor s1 must-use monitor m1;")
    diagnostics = errors(validate_pa(pa))
    assert codes(diagnostics) == ["UNDECLARED_IDENTIFIER"]
    assert "Sensor" in diagnostics[0].message


# -- clause (d): allowed-rule matrix ------------------------------------------


def test_illegal_kind_pair():
    pa = parse_ok(LOOP_PA % "sensor s1 must-use monitor m1;")
    assert codes(errors(validate_pa(pa))) == ["ILLEGAL_KIND_PAIR"]


def _matrix_probe_pa() -> PlannedArchitecture:
    """Two instances of every kind, same-kind instances under distinct parents."""

    def loop(n: str, members) -> AbstractionDecl:
        return AbstractionDecl(id=n, kind=K.LOOP, children=members)

    def leafs(n: int):
        return [
            AbstractionDecl(id=f"mon{n}", kind=K.MONITOR),
            AbstractionDecl(id=f"ana{n}", kind=K.ANALYZER),
            AbstractionDecl(id=f"pln{n}", kind=K.PLANNER),
            AbstractionDecl(id=f"exe{n}", kind=K.EXECUTOR),
            AbstractionDecl(
                id=f"kn{n}",
                kind=K.KNOWLEDGE,
                children=[
                    AbstractionDecl(id=f"ref{n}", kind=K.REFERENCE_INPUT),
                    AbstractionDecl(id=f"alt{n}", kind=K.ALTERNATIVE),
                ],
            ),
        ]

    managing = [
        AbstractionDecl(
            id="mg1",
            kind=K.MANAGING,
            children=[
                AbstractionDecl(id="lm1", kind=K.LOOP_MANAGER, children=[loop("lp1", leafs(1))]),
                AbstractionDecl(id="lm2", kind=K.LOOP_MANAGER, children=[loop("lp2", leafs(2))]),
            ],
        ),
        AbstractionDecl(id="mg2", kind=K.MANAGING),
    ]
    managed = [
        AbstractionDecl(
            id=f"md{n}",
            kind=K.MANAGED,
            children=[
                AbstractionDecl(id=f"sen{n}", kind=K.SENSOR),
                AbstractionDecl(id=f"eff{n}", kind=K.EFFECTOR),
                AbstractionDecl(id=f"out{n}", kind=K.MEASURED_OUTPUT),
                AbstractionDecl(id=f"gc{n}", kind=K.GENERIC_COMPONENT),
            ],
        )
        for n in (1, 2)
    ]
    return PlannedArchitecture(name="probe", managing=managing, managed=managed)


_PROBE_IDS = {
    K.MANAGING: ("mg1", "mg2"),
    K.MANAGED: ("md1", "md2"),
    K.LOOP_MANAGER: ("lm1", "lm2"),
    K.LOOP: ("lp1", "lp2"),
    K.MONITOR: ("mon1", "mon2"),
    K.ANALYZER: ("ana1", "ana2"),
    K.PLANNER: ("pln1", "pln2"),
    K.EXECUTOR: ("exe1", "exe2"),
    K.KNOWLEDGE: ("kn1", "kn2"),
    K.SENSOR: ("sen1", "sen2"),
    K.EFFECTOR: ("eff1", "eff2"),
    K.MEASURED_OUTPUT: ("out1", "out2"),
    K.REFERENCE_INPUT: ("ref1", "ref2"),
    K.ALTERNATIVE: ("alt1", "alt2"),
    K.GENERIC_COMPONENT: ("gc1", "gc2"),
}


@pytest.mark.parametrize("source_kind", list(K))
@pytest.mark.parametrize("target_kind", list(K))
def test_matrix_closure(source_kind, target_kind):
    """A one-rule PA is clean iff the kind pair is permitted."""
    pa = _matrix_probe_pa()
    pa.rules = [
        CommRule(
            source_kind=source_kind,
            source_id=_PROBE_IDS[source_kind][0],
            modality=Modality.MUST_NOT_USE,
            target_kind=target_kind,
            target_id=_PROBE_IDS[target_kind][1],
        )
    ]
    diagnostics = validate_pa(pa)
    if rule_pair_allowed(source_kind, target_kind):
        assert diagnostics == []
    else:
        assert codes(diagnostics) == ["ILLEGAL_KIND_PAIR"]


# -- clause (e): contradictory pairs -----------------------------------------


def test_contradictory_pair_single_error():
    pa = parse_ok(
        LOOP_PA % "monitor m1 must-use monitor m2; monitor m1 must-not-use monitor m2;"
    )
    assert codes(validate_pa(pa)).count("CONTRADICTORY_RULES") == 1


# -- clause (f): domain-rule conflicts ----------------------------------------


def test_domain_conflict_warning():
    pa = parse_ok(LOOP_PA % "monitor m1 must-use planner p1;")
    diagnostics = validate_pa(pa)
    assert [d.code for d in diagnostics] == ["DOMAIN_RULE_CONFLICT"]
    (warning,) = diagnostics
    assert warning.severity is Severity.WARNING
    assert "violating the domain rule number" in warning.message


def test_domain_conflict_respects_deactivated_entries():
    pa = parse_ok(LOOP_PA % "monitor m1 must-use planner p1;")
    matrix = DomainRuleMatrix.all_active()
    matrix.set_active(K.MONITOR, K.PLANNER, False)
    assert validate_pa(pa, matrix) == []


def test_domain_conflict_needs_domain_checked_loop():
    source = LOOP_PA.replace(" withDomainRules", "")
    pa = parse_ok(source % "monitor m1 must-use planner p1;")
    assert validate_pa(pa) == []


def test_domain_conflict_scoped_to_one_loop():
    source = (
        "Architecture A { Managing m { "
        "Loop l1 withDomainRules { Monitor m1; } "
        "Loop l2 withDomainRules { Planner p1; } } "
        "Managed d { Sensor s1; } } Rules { monitor m1 must-use planner p1; };"
    )
    assert validate_pa(parse_ok(source)) == []


# -- clause (g): loop rules without member links ------------------------------


TWO_LOOPS = (
    "Architecture A { Managing mg { "
    "Loop l1 { Monitor m1; } Loop l2 { Monitor m2; } } "
    "Managed d { Sensor s1; } } Rules { %s };"
)


def test_unlinked_loop_rule():
    pa = parse_ok(TWO_LOOPS % "loop l1 must-use loop l2;")
    assert codes(validate_pa(pa)) == ["UNLINKED_LOOP_RULE"]


def test_loop_rule_satisfied_by_crossing_member_rule():
    pa = parse_ok(
        TWO_LOOPS % "loop l1 must-use loop l2; monitor m1 must-use monitor m2;"
    )
    assert validate_pa(pa) == []


def test_loop_rule_direction_matters():
    pa = parse_ok(
        TWO_LOOPS % "loop l1 must-use loop l2; monitor m2 must-use monitor m1;"
    )
    assert codes(validate_pa(pa)) == ["UNLINKED_LOOP_RULE"]


# -- identifier uniqueness and subsystem presence -----------------------------


def test_duplicate_identifier_flagged():
    source = (
        "Architecture A { Managing m { Loop l { Monitor x; Analyzer x; } } "
        "Managed d {} } Rules {};"
    )
    diagnostics = validate_pa(parse_ok(source))
    assert codes(diagnostics) == ["DUPLICATE_IDENTIFIER"]


def test_all_distinct_identifiers_silent(robot_pa):
    assert not [
        d for d in validate_pa(robot_pa) if d.code == "DUPLICATE_IDENTIFIER"
    ]


def test_missing_subsystems():
    pa = PlannedArchitecture(name="A")
    assert codes(validate_pa(pa)) == ["MISSING_SUBSYSTEM", "MISSING_SUBSYSTEM"]


# -- fixtures of the case study -----------------------------------------------


def test_clean_robot_fixture_is_silent(robot_pa):
    assert validate_pa(robot_pa) == []


def test_verbatim_robot_fixture_has_one_undeclared(robot_pa_verbatim):
    diagnostics = validate_pa(robot_pa_verbatim)
    assert codes(diagnostics) == ["UNDECLARED_IDENTIFIER"]
    assert "orientation" in diagnostics[0].message


@pytest.mark.parametrize("seed", range(20))
def test_generated_pas_validate_clean(seed):
    pa = generate_valid_pa(random.Random(seed))
    assert validate_pa(pa) == []


# -- expand_loop_rules ---------------------------------------------------------


def test_expand_single_pair():
    pa = parse_ok(TWO_LOOPS % "loop l1 must-not-use loop l2;")
    expanded = expand_loop_rules(pa)
    added = [r for r in expanded.rules if r.origin is RuleOrigin.LOOP_EXPANSION]
    assert [(r.source_id, r.target_id, r.modality) for r in added] == [
        ("m1", "m2", Modality.MUST_NOT_USE)
    ]


def test_expand_robot_rules_unchanged(robot_pa):
    expanded = expand_loop_rules(robot_pa)
    assert len(expanded.rules) == len(robot_pa.rules)
    assert all(r.origin is RuleOrigin.USER for r in expanded.rules)


def test_expand_cartesian_product_count():
    source = (
        "Architecture A { Managing mg { "
        "Loop l1 { Monitor a1; Monitor a2; Analyzer a3; Planner a4; } "
        "Loop l2 { Monitor b1; Monitor b2; Analyzer b3; Planner b4; Executor b5; } } "
        "Managed d { Sensor s1; } } Rules { loop l1 must-not-use loop l2; };"
    )
    expanded = expand_loop_rules(parse_ok(source))
    added = [r for r in expanded.rules if r.origin is RuleOrigin.LOOP_EXPANSION]
    assert len(added) == 20


def test_expand_skips_covered_pairs():
    pa = parse_ok(
        TWO_LOOPS % "monitor m1 must-not-use monitor m2; loop l1 must-not-use loop l2;"
    )
    expanded = expand_loop_rules(pa)
    assert len(expanded.rules) == len(pa.rules)


def test_expand_is_idempotent(robot_pa):
    sources = [
        parse_ok(TWO_LOOPS % "loop l1 must-not-use loop l2;"),
        robot_pa,
    ]
    for seed in range(10):
        sources.append(generate_valid_pa(random.Random(seed)))
    for pa in sources:
        once = expand_loop_rules(pa)
        twice = expand_loop_rules(once)
        assert twice.rules == once.rules
