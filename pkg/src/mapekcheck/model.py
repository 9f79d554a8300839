"""The structure model shared by planned and recovered architectures.

An ArchModel is a tree of stereotyped elements plus aggregated relations
between them. Planned models are derived from the parsed architecture
(`pa_to_model`), current models from code facts (see `recovery`). Both
serialize to the same JSON schema and both can be projected onto a nested
package view (`to_package_view`) for diffing and rendering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .dsl import Modality, PlannedArchitecture
from .kinds import (
    AbstractionKind,
    DependencyKind,
    parse_abstraction_kind,
    parse_dependency_kind,
)

SCHEMA_VERSION = 1
PA_MODEL_NAME = "Planned Architecture"
CA_MODEL_NAME = "Current Architecture"


class SchemaError(ValueError):
    """Raised when a serialized artifact does not match its schema."""


class ModelIntegrityError(ValueError):
    """Raised when a model violates a structural invariant."""


@dataclass
class ArchElement:
    """One stereotyped element; implementations list the code paths behind it."""

    id: str
    name: str
    stereotype: AbstractionKind
    children: list["ArchElement"] = field(default_factory=list)
    implementations: list[str] = field(default_factory=list)

    def walk(self) -> Iterator["ArchElement"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class ArchRelation:
    """An aggregated dependency between two elements.

    `kinds` is the sorted set of code-dependency kinds observed; `counts`
    tracks per-kind occurrence totals (informational; checks ignore it).
    Planned models carry rule-derived relations with no kinds at all.
    """

    source: str
    target: str
    kinds: tuple[DependencyKind, ...] = ()
    counts: dict[DependencyKind, int] = field(default_factory=dict)
    indirect: bool = False


@dataclass
class ArchModel:
    name: str
    roots: list[ArchElement] = field(default_factory=list)
    relations: list[ArchRelation] = field(default_factory=list)
    pa_hash: str | None = None

    def elements(self) -> Iterator[ArchElement]:
        for root in self.roots:
            yield from root.walk()

    def elements_by_id(self) -> dict[str, ArchElement]:
        return {element.id: element for element in self.elements()}

    def parent_ids(self) -> dict[str, str | None]:
        parents: dict[str, str | None] = {}

        def visit(element: ArchElement, parent: str | None) -> None:
            parents[element.id] = parent
            for child in element.children:
                visit(child, element.id)

        for root in self.roots:
            visit(root, None)
        return parents

    def validate(self) -> None:
        """Enforce id uniqueness and relation endpoint integrity."""
        seen: set[str] = set()
        for element in self.elements():
            if element.id in seen:
                raise ModelIntegrityError(f"duplicate element id {element.id!r}")
            seen.add(element.id)
        for relation in self.relations:
            if relation.source == relation.target:
                raise ModelIntegrityError(
                    f"relation from {relation.source!r} to itself is not allowed"
                )
            for endpoint in (relation.source, relation.target):
                if endpoint not in seen:
                    raise ModelIntegrityError(
                        f"relation endpoint {endpoint!r} is not an element of the model"
                    )


# ---------------------------------------------------------------------------
# Planned architecture -> model
# ---------------------------------------------------------------------------


def pa_to_model(pa: PlannedArchitecture) -> ArchModel:
    """Materialize a validated architecture as a structure model.

    Containment mirrors the declarations; every must-use rule with
    resolvable endpoints becomes one relation. Must-not-use rules exist
    only as constraints and are never materialized.
    """

    def convert(decl) -> ArchElement:
        return ArchElement(
            id=decl.id,
            name=decl.id,
            stereotype=decl.kind,
            children=[convert(child) for child in decl.children],
        )

    declared = {decl.id for decl in pa.iter_instances()}
    relations = [
        ArchRelation(source=rule.source_id, target=rule.target_id)
        for rule in pa.rules
        if rule.modality is Modality.MUST_USE
        and rule.source_id in declared
        and rule.target_id in declared
        and rule.source_id != rule.target_id
    ]
    model = ArchModel(
        name=PA_MODEL_NAME,
        roots=[convert(root) for root in pa.roots],
        relations=relations,
    )
    model.validate()
    return model


# ---------------------------------------------------------------------------
# Package view
# ---------------------------------------------------------------------------


@dataclass
class PackageNode:
    """A package mirroring one element, tagged with its stereotype."""

    id: str
    name: str
    stereotype: AbstractionKind
    children: list["PackageNode"] = field(default_factory=list)

    def walk(self) -> Iterator["PackageNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class PackageView:
    """Nested packages plus (client, supplier) dependencies."""

    packages: list[PackageNode] = field(default_factory=list)
    dependencies: list[tuple[str, str]] = field(default_factory=list)

    def all_packages(self) -> Iterator[PackageNode]:
        for root in self.packages:
            yield from root.walk()

    def packages_by_id(self) -> dict[str, PackageNode]:
        return {node.id: node for node in self.all_packages()}

    def parent_ids(self) -> dict[str, str | None]:
        parents: dict[str, str | None] = {}

        def visit(node: PackageNode, parent: str | None) -> None:
            parents[node.id] = parent
            for child in node.children:
                visit(child, node.id)

        for root in self.packages:
            visit(root, None)
        return parents

    def depth_of(self, package_id: str) -> int:
        """Nesting depth of a package; root packages sit at depth 1."""
        parents = self.parent_ids()
        depth = 0
        cursor: str | None = package_id
        while cursor is not None:
            depth += 1
            cursor = parents[cursor]
        return depth

    def max_depth(self) -> int:
        return max((self.depth_of(node.id) for node in self.all_packages()), default=0)


def to_package_view(model: ArchModel) -> PackageView:
    """Project a model onto nested packages, one per element.

    Every relation becomes a (client, supplier) dependency. A relation
    endpoint that names no element is a structural-integrity error.
    """

    def convert(element: ArchElement) -> PackageNode:
        return PackageNode(
            id=element.id,
            name=element.name,
            stereotype=element.stereotype,
            children=[convert(child) for child in element.children],
        )

    ids = {element.id for element in model.elements()}
    dependencies: list[tuple[str, str]] = []
    for relation in model.relations:
        for endpoint in (relation.source, relation.target):
            if endpoint not in ids:
                raise ModelIntegrityError(
                    f"relation endpoint {endpoint!r} is not an element of the model"
                )
        dependencies.append((relation.source, relation.target))
    return PackageView(
        packages=[convert(root) for root in model.roots],
        dependencies=dependencies,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _element_to_dict(element: ArchElement) -> dict:
    return {
        "id": element.id,
        "name": element.name,
        "stereotype": element.stereotype.value,
        "children": [_element_to_dict(child) for child in element.children],
        "implementations": list(element.implementations),
    }


def _relation_to_dict(relation: ArchRelation) -> dict:
    return {
        "from": relation.source,
        "to": relation.target,
        "kinds": [kind.value for kind in relation.kinds],
        "counts": {kind.value: count for kind, count in sorted(relation.counts.items())},
        "indirect": relation.indirect,
    }


def model_to_dict(model: ArchModel) -> dict:
    data: dict = {
        "schemaVersion": SCHEMA_VERSION,
        "name": model.name,
    }
    if model.pa_hash is not None:
        data["paHash"] = model.pa_hash
    data["roots"] = [_element_to_dict(root) for root in model.roots]
    data["relations"] = [_relation_to_dict(relation) for relation in model.relations]
    return data


def _element_from_dict(data: dict) -> ArchElement:
    if not isinstance(data, dict):
        raise SchemaError("element entries must be objects")
    for key in ("id", "name", "stereotype"):
        if not isinstance(data.get(key), str):
            raise SchemaError(f"element field {key!r} must be a string")
    try:
        stereotype = parse_abstraction_kind(data["stereotype"])
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    children = data.get("children", [])
    implementations = data.get("implementations", [])
    if not isinstance(children, list) or not isinstance(implementations, list):
        raise SchemaError("element children/implementations must be lists")
    return ArchElement(
        id=data["id"],
        name=data["name"],
        stereotype=stereotype,
        children=[_element_from_dict(child) for child in children],
        implementations=[str(path) for path in implementations],
    )


def _relation_from_dict(data: dict) -> ArchRelation:
    if not isinstance(data, dict):
        raise SchemaError("relation entries must be objects")
    for key in ("from", "to"):
        if not isinstance(data.get(key), str):
            raise SchemaError(f"relation field {key!r} must be a string")
    try:
        kinds = tuple(sorted(parse_dependency_kind(k) for k in data.get("kinds", [])))
        counts = {
            parse_dependency_kind(k): int(v) for k, v in data.get("counts", {}).items()
        }
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    return ArchRelation(
        source=data["from"],
        target=data["to"],
        kinds=kinds,
        counts=counts,
        indirect=bool(data.get("indirect", False)),
    )


def model_from_dict(data: dict) -> ArchModel:
    if not isinstance(data, dict):
        raise SchemaError("model file must hold a JSON object")
    version = data.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"schema-version mismatch: expected {SCHEMA_VERSION}, got {version!r}"
        )
    if not isinstance(data.get("name"), str):
        raise SchemaError("model field 'name' must be a string")
    model = ArchModel(
        name=data["name"],
        roots=[_element_from_dict(entry) for entry in data.get("roots", [])],
        relations=[_relation_from_dict(entry) for entry in data.get("relations", [])],
        pa_hash=data.get("paHash"),
    )
    model.validate()
    return model


def save_model(model: ArchModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> ArchModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed model file: {exc}") from exc
    return model_from_dict(data)
