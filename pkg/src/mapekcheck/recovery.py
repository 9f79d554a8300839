"""Recovery of the current architecture from code facts and mappings.

Code facts are a containment tree of packages, classes, methods, fields
and variables plus typed dependencies between them. A mapping set binds
code paths to abstraction instances of the architecture description.
`build_ca` assembles the recovered model: one element per mapped
abstraction, nested the way its code is nested, every cross-abstraction
code dependency aggregated into a relation. `lift_indirect` adds the
relations realized through chains of unmapped intermediaries.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .dsl import PlannedArchitecture
from .kinds import AbstractionKind, DependencyKind, parse_dependency_kind
from .model import CA_MODEL_NAME, ArchElement, ArchModel, ArchRelation, SchemaError

logger = logging.getLogger(__name__)

FACTS_SCHEMA_VERSION = 1
MAPPINGS_SCHEMA_VERSION = 1


class CodeElementKind(str, enum.Enum):
    PACKAGE = "package"
    CLASS = "class"
    METHOD = "method"
    FIELD = "field"
    VARIABLE = "variable"


#: Which parent kinds each code element kind may have (None allows roots).
_ALLOWED_PARENT_KINDS: dict[CodeElementKind, tuple[CodeElementKind | None, ...]] = {
    CodeElementKind.PACKAGE: (None, CodeElementKind.PACKAGE),
    CodeElementKind.CLASS: (None, CodeElementKind.PACKAGE),
    CodeElementKind.METHOD: (CodeElementKind.CLASS,),
    CodeElementKind.FIELD: (CodeElementKind.CLASS,),
    CodeElementKind.VARIABLE: (CodeElementKind.METHOD,),
}


@dataclass(frozen=True)
class CodeElement:
    """One node of the code containment tree, addressed by qualified path."""

    path: str
    kind: CodeElementKind
    parent: str | None = None


@dataclass(frozen=True)
class CodeDependency:
    source: str
    target: str
    kind: DependencyKind


@dataclass
class CodeFacts:
    """Validated code containment tree plus typed dependencies."""

    elements: dict[str, CodeElement] = field(default_factory=dict)
    dependencies: list[CodeDependency] = field(default_factory=list)

    def add_element(self, element: CodeElement) -> None:
        if element.path in self.elements:
            raise SchemaError(f"duplicate code element path {element.path!r}")
        self.elements[element.path] = element

    def validate(self) -> None:
        for element in self.elements.values():
            parent_kind: CodeElementKind | None = None
            if element.parent is not None:
                parent = self.elements.get(element.parent)
                if parent is None:
                    raise SchemaError(
                        f"code element {element.path!r} names missing parent "
                        f"{element.parent!r}"
                    )
                parent_kind = parent.kind
            if parent_kind not in _ALLOWED_PARENT_KINDS[element.kind]:
                shown = parent_kind.value if parent_kind else "none"
                raise SchemaError(
                    f"code element {element.path!r} ({element.kind.value}) cannot "
                    f"be contained in a {shown} element"
                )
        self._check_cycles()
        for dependency in self.dependencies:
            for endpoint in (dependency.source, dependency.target):
                if endpoint not in self.elements:
                    raise SchemaError(
                        f"dependency endpoint {endpoint!r} is absent from the facts"
                    )

    def _check_cycles(self) -> None:
        state: dict[str, int] = {}
        for start in self.elements:
            if state.get(start):
                continue
            chain = []
            cursor: str | None = start
            while cursor is not None and state.get(cursor) != 2:
                if state.get(cursor) == 1:
                    raise SchemaError(f"containment cycle through {cursor!r}")
                state[cursor] = 1
                chain.append(cursor)
                cursor = self.elements[cursor].parent
            for path in chain:
                state[path] = 2

    def ancestors(self, path: str) -> Iterable[str]:
        cursor = self.elements[path].parent
        while cursor is not None:
            yield cursor
            cursor = self.elements[cursor].parent


@dataclass(frozen=True)
class Mapping:
    code_path: str
    abstraction_id: str


@dataclass
class MappingSet:
    entries: list[Mapping] = field(default_factory=list)

    def by_path(self) -> dict[str, str]:
        return {entry.code_path: entry.abstraction_id for entry in self.entries}

    def paths_of(self, abstraction_id: str) -> list[str]:
        return [e.code_path for e in self.entries if e.abstraction_id == abstraction_id]


class MappingError(ValueError):
    """Raised when a mapping entry cannot be resolved."""


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def facts_to_dict(facts: CodeFacts) -> dict:
    return {
        "schemaVersion": FACTS_SCHEMA_VERSION,
        "elements": [
            {"path": e.path, "kind": e.kind.value, "parent": e.parent}
            for e in sorted(facts.elements.values(), key=lambda e: e.path)
        ],
        "dependencies": [
            {"from": d.source, "to": d.target, "kind": d.kind.value}
            for d in sorted(
                facts.dependencies, key=lambda d: (d.source, d.target, d.kind.value)
            )
        ],
    }


def facts_from_dict(data: dict) -> CodeFacts:
    if not isinstance(data, dict):
        raise SchemaError("facts file must hold a JSON object")
    if data.get("schemaVersion") != FACTS_SCHEMA_VERSION:
        raise SchemaError(
            f"schema-version mismatch: expected {FACTS_SCHEMA_VERSION}, "
            f"got {data.get('schemaVersion')!r}"
        )
    facts = CodeFacts()
    for entry in data.get("elements", []):
        try:
            kind = CodeElementKind(entry["kind"])
        except (KeyError, ValueError):
            raise SchemaError(
                f"unknown code element kind {entry.get('kind')!r}"
            ) from None
        if not isinstance(entry.get("path"), str):
            raise SchemaError("code element field 'path' must be a string")
        facts.add_element(
            CodeElement(path=entry["path"], kind=kind, parent=entry.get("parent"))
        )
    for entry in data.get("dependencies", []):
        try:
            kind = parse_dependency_kind(entry["kind"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(str(exc)) from None
        for key in ("from", "to"):
            if not isinstance(entry.get(key), str):
                raise SchemaError(f"dependency field {key!r} must be a string")
        facts.dependencies.append(
            CodeDependency(source=entry["from"], target=entry["to"], kind=kind)
        )
    facts.validate()
    return facts


def save_facts(facts: CodeFacts, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(facts_to_dict(facts), indent=2) + "\n", encoding="utf-8"
    )


def load_facts(path: str | Path) -> CodeFacts:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed facts file: {exc}") from exc
    return facts_from_dict(data)


def mappings_to_dict(mappings: MappingSet) -> dict:
    return {
        "schemaVersion": MAPPINGS_SCHEMA_VERSION,
        "mappings": [
            {"codePath": m.code_path, "abstractionId": m.abstraction_id}
            for m in mappings.entries
        ],
    }


def load_mappings(
    path: str | Path,
    pa: PlannedArchitecture,
    facts: CodeFacts | None = None,
) -> MappingSet:
    """Load a mapping file and resolve it against the architecture.

    Every abstraction id must be declared; a code path may be bound to at
    most one abstraction. When `facts` is given, every code path must
    exist there as well.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed mapping file: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("mapping file must hold a JSON object")
    if data.get("schemaVersion") != MAPPINGS_SCHEMA_VERSION:
        raise SchemaError(
            f"schema-version mismatch: expected {MAPPINGS_SCHEMA_VERSION}, "
            f"got {data.get('schemaVersion')!r}"
        )
    declared = pa.declarations_by_id()
    mappings = MappingSet()
    seen_paths: set[str] = set()
    for entry in data.get("mappings", []):
        code_path = entry.get("codePath")
        abstraction_id = entry.get("abstractionId")
        if not isinstance(code_path, str) or not isinstance(abstraction_id, str):
            raise SchemaError("mapping entries need string codePath and abstractionId")
        if abstraction_id not in declared:
            raise MappingError(
                f"mapping names unknown abstraction {abstraction_id!r}"
            )
        if code_path in seen_paths:
            raise MappingError(
                f"code path {code_path!r} is mapped to more than one abstraction"
            )
        if facts is not None and code_path not in facts.elements:
            raise MappingError(f"code path {code_path!r} is absent from the facts")
        seen_paths.add(code_path)
        mappings.entries.append(Mapping(code_path=code_path, abstraction_id=abstraction_id))
    return mappings


def save_mappings(mappings: MappingSet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(mappings_to_dict(mappings), indent=2) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Current-architecture construction
# ---------------------------------------------------------------------------


def _attribution(facts: CodeFacts, mapped: dict[str, str]) -> dict[str, str | None]:
    """Resolve every code path to its nearest mapped self-or-ancestor."""
    result: dict[str, str | None] = {}

    def resolve(path: str) -> str | None:
        if path in result:
            return result[path]
        if path in mapped:
            result[path] = mapped[path]
            return mapped[path]
        parent = facts.elements[path].parent
        value = resolve(parent) if parent is not None else None
        result[path] = value
        return value

    for path in facts.elements:
        resolve(path)
    return result


def build_ca(
    facts: CodeFacts, mappings: MappingSet, pa: PlannedArchitecture
) -> ArchModel:
    """Assemble the current architecture from facts and mappings.

    Elements take their stereotype from the architecture declaration but
    nest the way their mapped code nests: an abstraction whose code sits
    inside another abstraction's code becomes its child. When multiple
    code paths of one abstraction imply different parents, the first
    mapping entry wins and a warning is logged; an abstraction caught in
    a containment contradiction is attached at the model root.
    """
    declared = pa.declarations_by_id()
    mapped = mappings.by_path()
    for code_path in mapped:
        if code_path not in facts.elements:
            raise MappingError(f"code path {code_path!r} is absent from the facts")

    attribution = _attribution(facts, mapped)

    def parent_abstraction(code_path: str) -> str | None:
        for ancestor in facts.ancestors(code_path):
            value = attribution[ancestor]
            if value is not None and value != mapped[code_path]:
                return value
            if value is not None and value == mapped[code_path]:
                # Another path of the same abstraction; keep climbing.
                continue
        return None

    order: list[str] = []
    implementations: dict[str, list[str]] = {}
    parent_choice: dict[str, str | None] = {}
    for entry in mappings.entries:
        abstraction = entry.abstraction_id
        if abstraction not in implementations:
            order.append(abstraction)
            implementations[abstraction] = []
            parent_choice[abstraction] = parent_abstraction(entry.code_path)
        else:
            other = parent_abstraction(entry.code_path)
            if other != parent_choice[abstraction]:
                logger.warning(
                    "abstraction %r has contradictory code containment "
                    "(%r vs %r); attaching it at the model root",
                    abstraction,
                    parent_choice[abstraction],
                    other,
                )
                parent_choice[abstraction] = None
        implementations[abstraction].append(entry.code_path)

    # A cycle in the chosen parents is a containment contradiction too.
    for abstraction in order:
        seen = {abstraction}
        cursor = parent_choice[abstraction]
        while cursor is not None:
            if cursor in seen:
                logger.warning(
                    "abstraction %r sits in a containment cycle; "
                    "attaching it at the model root",
                    abstraction,
                )
                parent_choice[abstraction] = None
                break
            seen.add(cursor)
            cursor = parent_choice[cursor]

    nodes = {
        abstraction: ArchElement(
            id=abstraction,
            name=abstraction,
            stereotype=declared[abstraction].kind,
            implementations=sorted(implementations[abstraction]),
        )
        for abstraction in order
    }
    roots: list[ArchElement] = []
    for abstraction in sorted(order):
        parent = parent_choice[abstraction]
        if parent is None:
            roots.append(nodes[abstraction])
        else:
            nodes[parent].children.append(nodes[abstraction])

    aggregated: dict[tuple[str, str], ArchRelation] = {}
    for dependency in facts.dependencies:
        source = attribution[dependency.source]
        target = attribution[dependency.target]
        if source is None or target is None or source == target:
            continue
        relation = aggregated.get((source, target))
        if relation is None:
            relation = ArchRelation(source=source, target=target)
            aggregated[(source, target)] = relation
        counts = dict(relation.counts)
        counts[dependency.kind] = counts.get(dependency.kind, 0) + 1
        relation.counts = counts
        relation.kinds = tuple(sorted(counts))

    model = ArchModel(
        name=CA_MODEL_NAME,
        roots=roots,
        relations=[aggregated[pair] for pair in sorted(aggregated)],
    )
    model.validate()
    return model


def lift_indirect(
    ca: ArchModel, facts: CodeFacts, mappings: MappingSet
) -> ArchModel:
    """Add relations realized through chains of unmapped code elements.

    For every code path c0 -> c1 -> ... -> cn whose endpoints attribute
    to two different abstractions while every interior element attributes
    to none, an indirect relation is added unless a direct one already
    exists. Existing relations are never touched.
    """
    mapped = mappings.by_path()
    attribution = _attribution(facts, mapped)

    edges: dict[str, list[str]] = {}
    for dependency in facts.dependencies:
        edges.setdefault(dependency.source, []).append(dependency.target)

    reachable: dict[str, set[str]] = {}
    for start in facts.elements:
        source = attribution[start]
        if source is None:
            continue
        found = reachable.setdefault(source, set())
        # BFS from this attributed node; interior nodes must be unattributed.
        queue = list(edges.get(start, []))
        visited: set[str] = set()
        while queue:
            node = queue.pop()
            if node in visited:
                continue
            visited.add(node)
            target = attribution[node]
            if target is not None:
                if target != source:
                    found.add(target)
                continue
            queue.extend(edges.get(node, []))

    existing = {(relation.source, relation.target) for relation in ca.relations}
    additions: list[ArchRelation] = []
    for source in sorted(reachable):
        for target in sorted(reachable[source]):
            if (source, target) in existing:
                continue
            additions.append(ArchRelation(source=source, target=target, indirect=True))

    if not additions:
        return ca
    lifted = ArchModel(
        name=ca.name,
        roots=ca.roots,
        relations=[*ca.relations, *additions],
        pa_hash=ca.pa_hash,
    )
    lifted.validate()
    return lifted
