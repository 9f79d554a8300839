"""Core vocabulary shared by every stage of the toolchain.

Defines the abstraction kinds of a MAPE-K architecture, which kinds may
contain which (the hierarchical rules), which kind pairs may appear in a
communication rule (the allowed-rule matrix), and the fixed set of code
dependency kinds recognized in recovered architectures.
"""

from __future__ import annotations

import enum


class AbstractionKind(str, enum.Enum):
    """The fifteen element kinds an architecture description may declare."""

    MANAGING = "Managing"
    MANAGED = "Managed"
    LOOP_MANAGER = "LoopManager"
    LOOP = "Loop"
    MONITOR = "Monitor"
    ANALYZER = "Analyzer"
    PLANNER = "Planner"
    EXECUTOR = "Executor"
    KNOWLEDGE = "Knowledge"
    SENSOR = "Sensor"
    EFFECTOR = "Effector"
    MEASURED_OUTPUT = "MeasuredOutput"
    REFERENCE_INPUT = "ReferenceInput"
    ALTERNATIVE = "Alternative"
    GENERIC_COMPONENT = "GenericComponent"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


K = AbstractionKind

#: Kinds that may contain other abstractions. Everything else is a leaf.
COMPOSABLE_KINDS: frozenset[AbstractionKind] = frozenset(
    {K.MANAGING, K.MANAGED, K.LOOP_MANAGER, K.LOOP, K.KNOWLEDGE}
)

#: Which child kinds each composable kind may directly contain.
ALLOWED_CHILDREN: dict[AbstractionKind, frozenset[AbstractionKind]] = {
    K.MANAGING: frozenset({K.LOOP_MANAGER, K.LOOP}),
    K.MANAGED: frozenset({K.SENSOR, K.EFFECTOR, K.MEASURED_OUTPUT, K.GENERIC_COMPONENT}),
    K.LOOP_MANAGER: frozenset({K.LOOP}),
    K.LOOP: frozenset({K.MONITOR, K.ANALYZER, K.PLANNER, K.EXECUTOR, K.KNOWLEDGE}),
    K.KNOWLEDGE: frozenset({K.REFERENCE_INPUT, K.ALTERNATIVE}),
}

#: Allowed (source kind -> target kinds) pairs for communication rules.
#: Composable kinds relate only to the same kind; Knowledge additionally
#: relates to the loop-level kinds; the remaining leaf kinds carry the
#: targets of the published rule matrix, with Effector -> GenericComponent
#: admitted because the worked example uses it.
ALLOWED_RULE_TARGETS: dict[AbstractionKind, frozenset[AbstractionKind]] = {
    K.MANAGING: frozenset({K.MANAGING}),
    K.MANAGED: frozenset({K.MANAGED}),
    K.LOOP_MANAGER: frozenset({K.LOOP_MANAGER}),
    K.LOOP: frozenset({K.LOOP}),
    K.KNOWLEDGE: frozenset({K.KNOWLEDGE, K.MONITOR, K.ANALYZER, K.PLANNER, K.EXECUTOR}),
    K.MONITOR: frozenset(
        {K.MONITOR, K.ANALYZER, K.PLANNER, K.EXECUTOR, K.KNOWLEDGE, K.SENSOR}
    ),
    K.ANALYZER: frozenset(
        {
            K.ANALYZER,
            K.MONITOR,
            K.PLANNER,
            K.EXECUTOR,
            K.KNOWLEDGE,
            K.REFERENCE_INPUT,
            K.ALTERNATIVE,
        }
    ),
    K.PLANNER: frozenset(
        {K.PLANNER, K.MONITOR, K.ANALYZER, K.EXECUTOR, K.KNOWLEDGE, K.ALTERNATIVE}
    ),
    K.EXECUTOR: frozenset({K.EXECUTOR, K.MONITOR, K.ANALYZER, K.KNOWLEDGE, K.EFFECTOR}),
    K.SENSOR: frozenset({K.MEASURED_OUTPUT}),
    K.EFFECTOR: frozenset({K.GENERIC_COMPONENT}),
    K.MEASURED_OUTPUT: frozenset(),
    K.REFERENCE_INPUT: frozenset(),
    K.ALTERNATIVE: frozenset(),
    K.GENERIC_COMPONENT: frozenset(),
}


def rule_pair_allowed(source: AbstractionKind, target: AbstractionKind) -> bool:
    """Return True if a communication rule may relate the two kinds."""
    return target in ALLOWED_RULE_TARGETS[source]


class DependencyKind(str, enum.Enum):
    """The thirteen code-level relationship kinds a facts producer may emit."""

    METHOD_CALL = "method-call"
    OBJECT_CREATION = "object-creation"
    FIELD_ACCESS = "field-access"
    FIELD_TYPE = "field-type"
    VARIABLE_TYPE = "variable-type"
    PARAMETER_TYPE = "parameter-type"
    RETURN_TYPE = "return-type"
    EXTENDS = "extends"
    IMPLEMENTS = "implements"
    IMPORT = "import"
    THROWS = "throws"
    ANNOTATION = "annotation"
    STATIC_REFERENCE = "static-reference"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


def parse_abstraction_kind(value: str) -> AbstractionKind:
    """Map a stereotype string to its kind, raising ValueError on junk."""
    try:
        return AbstractionKind(value)
    except ValueError:
        raise ValueError(f"unknown stereotype {value!r}") from None


def parse_dependency_kind(value: str) -> DependencyKind:
    """Map a dependency-kind string to its enum, raising ValueError on junk."""
    try:
        return DependencyKind(value)
    except ValueError:
        raise ValueError(f"unknown dependency kind {value!r}") from None
