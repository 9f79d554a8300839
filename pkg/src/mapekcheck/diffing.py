"""Comparison of planned and current package views.

Elements pair up by (stereotype, name) first; what remains is paired by
structural position when that is unambiguous, which is how renamed
elements survive the diff. Dependencies whose endpoints stay matched but
whose raw names changed are classified as refactorings rather than
losses; only dependencies with no counterpart at all are reported
missing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from pathlib import Path

from .model import PackageNode, PackageView, SchemaError

DIFF_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MatchedPair:
    """One planned element paired with one current element."""

    pa_id: str
    ca_id: str
    renamed: bool = False


@dataclass
class Matching:
    pairs: list[MatchedPair] = field(default_factory=list)
    unmatched_pa: list[str] = field(default_factory=list)
    unmatched_ca: list[str] = field(default_factory=list)

    def pa_to_ca(self) -> dict[str, MatchedPair]:
        return {pair.pa_id: pair for pair in self.pairs}

    def ca_to_pa(self) -> dict[str, MatchedPair]:
        return {pair.ca_id: pair for pair in self.pairs}


def _by_depth(view: PackageView) -> list[tuple[int, PackageNode]]:
    nodes: list[tuple[int, PackageNode]] = []

    def visit(node: PackageNode, depth: int) -> None:
        nodes.append((depth, node))
        for child in node.children:
            visit(child, depth + 1)

    for root in view.packages:
        visit(root, 1)
    nodes.sort(key=lambda item: (item[0], item[1].name, item[1].id))
    return nodes


def match_elements(pa_view: PackageView, ca_view: PackageView) -> Matching:
    """Pair elements by (stereotype, name), then by unique position."""
    pa_nodes = _by_depth(pa_view)
    ca_nodes = _by_depth(ca_view)
    pa_parents = pa_view.parent_ids()
    ca_parents = ca_view.parent_ids()

    ca_by_key: dict[tuple[str, str], list[PackageNode]] = {}
    for _depth, node in ca_nodes:
        ca_by_key.setdefault((node.stereotype.value, node.name), []).append(node)

    pairs: list[MatchedPair] = []
    matched_pa: set[str] = set()
    matched_ca: set[str] = set()

    for _depth, node in pa_nodes:
        candidates = ca_by_key.get((node.stereotype.value, node.name), [])
        for candidate in candidates:
            if candidate.id in matched_ca:
                continue
            pairs.append(MatchedPair(pa_id=node.id, ca_id=candidate.id, renamed=False))
            matched_pa.add(node.id)
            matched_ca.add(candidate.id)
            break

    # Positional fallback, shallow elements first so parents resolve before
    # their children: an unmatched element pairs with the one unmatched
    # candidate of the same stereotype under the matched parent, provided
    # both sides are unambiguous.
    pa_to_ca = {pair.pa_id: pair.ca_id for pair in pairs}
    ca_children: dict[str | None, list[PackageNode]] = {}
    for _depth, node in ca_nodes:
        ca_children.setdefault(ca_parents[node.id], []).append(node)
    pa_children: dict[str | None, list[PackageNode]] = {}
    for _depth, node in pa_nodes:
        pa_children.setdefault(pa_parents[node.id], []).append(node)

    for _depth, node in pa_nodes:
        if node.id in matched_pa:
            continue
        parent = pa_parents[node.id]
        if parent is None:
            ca_parent: str | None = None
        elif parent in pa_to_ca:
            ca_parent = pa_to_ca[parent]
        else:
            continue
        pa_candidates = [
            sibling
            for sibling in pa_children.get(parent, [])
            if sibling.stereotype is node.stereotype and sibling.id not in matched_pa
        ]
        ca_candidates = [
            sibling
            for sibling in ca_children.get(ca_parent, [])
            if sibling.stereotype is node.stereotype and sibling.id not in matched_ca
        ]
        if len(pa_candidates) == 1 and len(ca_candidates) == 1:
            candidate = ca_candidates[0]
            pairs.append(
                MatchedPair(
                    pa_id=node.id,
                    ca_id=candidate.id,
                    renamed=node.name != candidate.name,
                )
            )
            matched_pa.add(node.id)
            matched_ca.add(candidate.id)
            pa_to_ca[node.id] = candidate.id

    unmatched_pa = sorted(
        node.id for _depth, node in pa_nodes if node.id not in matched_pa
    )
    unmatched_ca = sorted(
        node.id for _depth, node in ca_nodes if node.id not in matched_ca
    )
    pairs.sort(key=lambda pair: pair.pa_id)
    return Matching(pairs=pairs, unmatched_pa=unmatched_pa, unmatched_ca=unmatched_ca)


@dataclass
class DiffResult:
    """Classified differences between a planned and a current view."""

    missing_elements: list[str] = field(default_factory=list)
    extra_elements: list[str] = field(default_factory=list)
    missing_dependencies: list[tuple[str, str]] = field(default_factory=list)
    refactored_dependencies: list[tuple[tuple[str, str], tuple[str, str]]] = field(
        default_factory=list
    )
    matched_pairs: list[MatchedPair] = field(default_factory=list)
    pa_hash: str | None = None

    def is_empty(self) -> bool:
        return not (
            self.missing_elements
            or self.extra_elements
            or self.missing_dependencies
            or self.refactored_dependencies
        )


def _without_ignored(view: PackageView, ignore_globs: tuple[str, ...]) -> PackageView:
    """Drop elements whose names match an ignore glob, with their subtrees."""
    if not ignore_globs:
        return view

    def keep(node: PackageNode) -> bool:
        return not any(fnmatchcase(node.name, glob) for glob in ignore_globs)

    def prune(node: PackageNode) -> PackageNode:
        return PackageNode(
            id=node.id,
            name=node.name,
            stereotype=node.stereotype,
            children=[prune(child) for child in node.children if keep(child)],
        )

    kept_roots = [prune(root) for root in view.packages if keep(root)]
    kept_ids = {node.id for root in kept_roots for node in root.walk()}
    dependencies = [
        (client, supplier)
        for client, supplier in view.dependencies
        if client in kept_ids and supplier in kept_ids
    ]
    return PackageView(packages=kept_roots, dependencies=dependencies)


def diff_views(
    pa_view: PackageView,
    ca_view: PackageView,
    ignore_globs: tuple[str, ...] = (),
) -> DiffResult:
    """Compute the classified diff between two views.

    Planned dependencies absent from the current view are missing; a
    dependency that survives only through a renamed/moved endpoint is a
    refactoring and excluded from the missing list. Current-only elements
    are reported as extra but carry no violation by themselves.
    """
    ca_view = _without_ignored(ca_view, ignore_globs)
    matching = match_elements(pa_view, ca_view)
    ca_to_pa = matching.ca_to_pa()
    pa_to_ca = matching.pa_to_ca()

    ca_names = {node.id: node.name for node in ca_view.all_packages()}

    translated: dict[tuple[str, str], tuple[str, str]] = {}
    for client, supplier in ca_view.dependencies:
        client_pair = ca_to_pa.get(client)
        supplier_pair = ca_to_pa.get(supplier)
        if client_pair is None or supplier_pair is None:
            continue
        translated[(client_pair.pa_id, supplier_pair.pa_id)] = (
            ca_names[client],
            ca_names[supplier],
        )

    missing: list[tuple[str, str]] = []
    refactored: list[tuple[tuple[str, str], tuple[str, str]]] = []
    for client, supplier in sorted(set(pa_view.dependencies)):
        if (client, supplier) not in translated:
            missing.append((client, supplier))
            continue
        renamed = (
            pa_to_ca[client].renamed if client in pa_to_ca else False
        ) or (pa_to_ca[supplier].renamed if supplier in pa_to_ca else False)
        if renamed:
            refactored.append(((client, supplier), translated[(client, supplier)]))

    return DiffResult(
        missing_elements=list(matching.unmatched_pa),
        extra_elements=list(matching.unmatched_ca),
        missing_dependencies=missing,
        refactored_dependencies=sorted(refactored),
        matched_pairs=list(matching.pairs),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def diff_to_dict(diff: DiffResult) -> dict:
    data: dict = {"schemaVersion": DIFF_SCHEMA_VERSION}
    if diff.pa_hash is not None:
        data["paHash"] = diff.pa_hash
    data["missingElements"] = sorted(diff.missing_elements)
    data["extraElements"] = sorted(diff.extra_elements)
    data["missingDependencies"] = [list(pair) for pair in sorted(diff.missing_dependencies)]
    data["refactoredDependencies"] = [
        {"old": list(old), "new": list(new)}
        for old, new in sorted(diff.refactored_dependencies)
    ]
    data["matchedPairs"] = [
        {"pa": pair.pa_id, "ca": pair.ca_id, "renamed": pair.renamed}
        for pair in sorted(diff.matched_pairs, key=lambda p: p.pa_id)
    ]
    return data


def diff_from_dict(data: dict) -> DiffResult:
    if not isinstance(data, dict):
        raise SchemaError("diff file must hold a JSON object")
    if data.get("schemaVersion") != DIFF_SCHEMA_VERSION:
        raise SchemaError(
            f"schema-version mismatch: expected {DIFF_SCHEMA_VERSION}, "
            f"got {data.get('schemaVersion')!r}"
        )
    try:
        return DiffResult(
            missing_elements=[str(e) for e in data.get("missingElements", [])],
            extra_elements=[str(e) for e in data.get("extraElements", [])],
            missing_dependencies=[
                (pair[0], pair[1]) for pair in data.get("missingDependencies", [])
            ],
            refactored_dependencies=[
                ((entry["old"][0], entry["old"][1]), (entry["new"][0], entry["new"][1]))
                for entry in data.get("refactoredDependencies", [])
            ],
            matched_pairs=[
                MatchedPair(
                    pa_id=entry["pa"],
                    ca_id=entry["ca"],
                    renamed=bool(entry.get("renamed", False)),
                )
                for entry in data.get("matchedPairs", [])
            ],
            pa_hash=data.get("paHash"),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise SchemaError(f"malformed diff entry: {exc}") from exc


def save_diff(diff: DiffResult, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(diff_to_dict(diff), indent=2) + "\n", encoding="utf-8"
    )


def load_diff(path: str | Path) -> DiffResult:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed diff file: {exc}") from exc
    return diff_from_dict(data)
