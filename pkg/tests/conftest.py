"""Shared fixtures: the robot case study, parsed once per session."""

from __future__ import annotations

from pathlib import Path

import pytest

from mapekcheck import parse_pa_file
from mapekcheck.recovery import load_mappings
from mapekcheck.scanner import scan_sources

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
ROBOT = FIXTURES / "robot"
GOLDEN = ROBOT / "golden"


@pytest.fixture(scope="session")
def robot_pa():
    """The corrected (clean-run) robot architecture."""
    result = parse_pa_file(str(ROBOT / "planned_clean.remedy"))
    assert result.pa is not None, result.diagnostics
    return result.pa


@pytest.fixture(scope="session")
def robot_pa_verbatim():
    """The robot architecture exactly as published (undeclared sensor kept)."""
    result = parse_pa_file(str(ROBOT / "planned.remedy"))
    assert result.pa is not None, result.diagnostics
    return result.pa


@pytest.fixture(scope="session")
def robot_facts():
    return scan_sources(ROBOT / "src").facts


@pytest.fixture(scope="session")
def robot_mappings(robot_pa, robot_facts):
    return load_mappings(ROBOT / "mappings.json", robot_pa, robot_facts)
