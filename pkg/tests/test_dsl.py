"""Parser, pretty-printer and AST behavior."""

from __future__ import annotations

import random

import pytest

from genutil import generate_valid_pa
from mapekcheck import (
    AbstractionKind,
    Modality,
    format_pa,
    parse_pa,
)
from mapekcheck.dsl import strip_spans

K = AbstractionKind

MINIMAL = "Architecture A { Managing m {} Managed d {} } Rules {};"


def test_minimal_program():
    result = parse_pa(MINIMAL)
    assert result.ok
    pa = result.pa
    assert pa.name == "A"
    assert [d.id for d in pa.managing] == ["m"]
    assert [d.id for d in pa.managed] == ["d"]
    assert pa.loops() == []
    assert pa.rules == []


def test_robot_verbatim_counts(robot_pa_verbatim):
    pa = robot_pa_verbatim
    assert pa.name == "EnvironmentGuardRobot-PlannedArchitecture"
    assert pa.instance_count() == 25
    assert len(pa.managing) == 1
    assert len(pa.managed) == 1
    loops = pa.loops()
    assert [loop.id for loop in loops] == ["masterLoop", "slaveLoop"]
    assert all(loop.domain_rules_enabled for loop in loops)
    assert len(pa.rules) == 29
    assert sum(1 for r in pa.rules if r.modality is Modality.MUST_USE) == 22
    assert sum(1 for r in pa.rules if r.modality is Modality.MUST_NOT_USE) == 7
    kinds = {d.kind for d in pa.iter_instances()}
    assert K.LOOP_MANAGER in kinds and K.GENERIC_COMPONENT in kinds


def test_spans_recorded_on_every_node(robot_pa_verbatim):
    for decl in robot_pa_verbatim.iter_instances():
        assert decl.span is not None and decl.span.line >= 1
    for rule in robot_pa_verbatim.rules:
        assert rule.span is not None


def test_unterminated_block_single_error():
    source = MINIMAL.replace("Managing m {}", "Managing m {", 1)
    result = parse_pa(source)
    assert result.pa is None
    assert len(result.diagnostics) == 1
    diag = result.diagnostics[0]
    assert diag.code == "UNTERMINATED_BLOCK"
    assert "unterminated block" in diag.message
    # Error sits at the very end of the input.
    assert diag.span.line == 1
    assert diag.span.column == len(source) + 1


def test_robot_with_loop_brace_removed_is_unterminated():
    from conftest import ROBOT

    text = (ROBOT / "planned.remedy").read_text(encoding="utf-8")
    # Drop the brace closing the masterLoop block.
    lines = text.split("\n")
    close_index = next(
        i for i, line in enumerate(lines) if "parameterExecutor" in line
    ) + 1
    assert lines[close_index].strip() == "}"
    del lines[close_index]
    result = parse_pa("\n".join(lines))
    assert result.pa is None
    (diag,) = result.diagnostics
    assert diag.code == "UNTERMINATED_BLOCK"
    assert "unterminated block" in diag.message


def test_unknown_keyword_reported_with_location():
    source = "Architecture A { Managing m { Loop l { Monitro x; } } Managed d {} } Rules {};"
    result = parse_pa(source)
    assert result.pa is None
    (diag,) = result.diagnostics
    assert diag.code == "UNKNOWN_KEYWORD"
    assert "Monitro" in diag.message
    assert diag.span.line == 1 and diag.span.column == source.index("Monitro") + 1


def test_unexpected_token_is_syntax_error():
    result = parse_pa("Architecture A { Managing m {} Managed d {} } Rules { ; };")
    assert result.pa is None
    assert result.diagnostics[0].code == "SYNTAX_ERROR"


def test_line_comments_are_skipped():
    source = "// heading\nArchitecture A { // inline\n Managing m {} Managed d {} } Rules {};"
    assert parse_pa(source).ok


def test_trailing_semicolons_after_blocks_are_optional():
    spelled_out = (
        "Architecture A { Managing m { Loop l { Monitor mo; }; }; "
        "Managed d { Sensor s; }; } Rules { monitor mo must-use sensor s; };"
    )
    bare = spelled_out.replace("};", "}")
    for source in (spelled_out, bare):
        result = parse_pa(source)
        assert result.ok, result.diagnostics


def test_bare_rule_target_is_generic_component():
    source = (
        "Architecture A { Managing m {} Managed d { Effector e; Component servo; } } "
        "Rules { effector e must-use servo; };"
    )
    result = parse_pa(source)
    assert result.ok
    (rule,) = result.pa.rules
    assert rule.source_kind is K.EFFECTOR
    assert rule.target_kind is K.GENERIC_COMPONENT
    assert rule.target_id == "servo"


def test_selector_words_usable_as_identifiers():
    source = (
        "Architecture A { Managing m { Loop l { Knowledge knowledge {} } } "
        "Managed d {} } Rules {};"
    )
    result = parse_pa(source)
    assert result.ok
    assert "knowledge" in result.pa.declarations_by_id()


def test_reserved_words_rejected_as_identifiers():
    result = parse_pa("Architecture Rules { Managing m {} Managed d {} } Rules {};")
    assert result.pa is None
    assert "reserved" in result.diagnostics[0].message


def test_component_only_inside_managed():
    result = parse_pa(
        "Architecture A { Managing m { Loop l { Component c; } } Managed d {} } Rules {};"
    )
    assert result.pa is None
    assert result.diagnostics[0].code == "UNKNOWN_KEYWORD"


def test_round_trip_robot(robot_pa_verbatim):
    reparsed = parse_pa(format_pa(robot_pa_verbatim))
    assert reparsed.ok
    assert strip_spans(reparsed.pa) == strip_spans(robot_pa_verbatim)


@pytest.mark.parametrize("seed", range(25))
def test_round_trip_generated(seed):
    pa = generate_valid_pa(random.Random(seed))
    reparsed = parse_pa(format_pa(pa))
    assert reparsed.ok, reparsed.diagnostics
    assert strip_spans(reparsed.pa) == strip_spans(pa)


def test_enclosing_loops_cover_knowledge_children(robot_pa):
    loops = robot_pa.enclosing_loops()
    assert loops["proximityReference"] == "slaveLoop"
    assert loops["slaveMonitor"] == "slaveLoop"
    assert loops["parameterMonitor"] == "masterLoop"
    assert "adaptationManager" not in loops
