"""Seeded random generators used by the property-style tests.

`generate_valid_pa` produces architectures that validate without errors
or warnings and that declare a must-use rule for every active domain
requirement inside their domain-checked loops, so a model derived from
the architecture itself conforms to its own constraint set.
"""

from __future__ import annotations

import random

from mapekcheck import (
    AbstractionDecl,
    AbstractionKind,
    CommRule,
    Mapping,
    MappingSet,
    Modality,
    PlannedArchitecture,
)
from mapekcheck.domain_rules import DomainRuleMatrix
from mapekcheck.kinds import rule_pair_allowed
from mapekcheck.model import model_from_dict, model_to_dict
from mapekcheck.recovery import CodeDependency, CodeElement, CodeElementKind, CodeFacts
from mapekcheck.kinds import DependencyKind

K = AbstractionKind

_LEAF_POOL = [
    (K.MONITOR, "mon"),
    (K.ANALYZER, "ana"),
    (K.PLANNER, "pln"),
    (K.EXECUTOR, "exe"),
]


class _Ids:
    def __init__(self) -> None:
        self.counters: dict[str, int] = {}

    def fresh(self, prefix: str) -> str:
        index = self.counters.get(prefix, 0)
        self.counters[prefix] = index + 1
        return f"{prefix}{index}"


def _make_loop(rng: random.Random, ids: _Ids) -> AbstractionDecl:
    members: list[AbstractionDecl] = []
    for kind, prefix in _LEAF_POOL:
        for _ in range(rng.randint(0, 2)):
            members.append(AbstractionDecl(id=ids.fresh(prefix), kind=kind))
    if rng.random() < 0.6:
        knowledge_children = [
            AbstractionDecl(id=ids.fresh("ref"), kind=K.REFERENCE_INPUT)
            for _ in range(rng.randint(0, 2))
        ] + [
            AbstractionDecl(id=ids.fresh("alt"), kind=K.ALTERNATIVE)
            for _ in range(rng.randint(0, 2))
        ]
        members.append(
            AbstractionDecl(
                id=ids.fresh("kn"), kind=K.KNOWLEDGE, children=knowledge_children
            )
        )
    rng.shuffle(members)
    return AbstractionDecl(
        id=ids.fresh("loop"),
        kind=K.LOOP,
        children=members,
        domain_rules_enabled=rng.random() < 0.5,
    )


def generate_valid_pa(
    rng: random.Random, matrix: DomainRuleMatrix | None = None
) -> PlannedArchitecture:
    """Build a random architecture that validates clean."""
    if matrix is None:
        matrix = DomainRuleMatrix.all_active()
    ids = _Ids()

    managing_children: list[AbstractionDecl] = []
    if rng.random() < 0.6:
        managing_children.append(
            AbstractionDecl(
                id=ids.fresh("lm"),
                kind=K.LOOP_MANAGER,
                children=[_make_loop(rng, ids) for _ in range(rng.randint(1, 2))],
            )
        )
    for _ in range(rng.randint(0, 2)):
        managing_children.append(_make_loop(rng, ids))
    managing = AbstractionDecl(
        id=ids.fresh("mg"), kind=K.MANAGING, children=managing_children
    )

    managed_children = (
        [AbstractionDecl(id=ids.fresh("sen"), kind=K.SENSOR) for _ in range(rng.randint(0, 2))]
        + [AbstractionDecl(id=ids.fresh("eff"), kind=K.EFFECTOR) for _ in range(rng.randint(0, 2))]
        + [
            AbstractionDecl(id=ids.fresh("out"), kind=K.MEASURED_OUTPUT)
            for _ in range(rng.randint(0, 2))
        ]
        + [
            AbstractionDecl(id=ids.fresh("gc"), kind=K.GENERIC_COMPONENT)
            for _ in range(rng.randint(0, 1))
        ]
    )
    managed = AbstractionDecl(id=ids.fresh("md"), kind=K.MANAGED, children=managed_children)

    pa = PlannedArchitecture(
        name=f"generated{rng.randint(0, 10**6)}", managing=[managing], managed=[managed]
    )

    loops_of = pa.enclosing_loops()
    loop_by_id = {loop.id: loop for loop in pa.loops()}
    instances = list(pa.iter_instances())

    def domain_entry(source: AbstractionDecl, target: AbstractionDecl):
        """Active matrix entry governing this instance pair, if any."""
        source_loop = loops_of.get(source.id)
        if source_loop is None or source_loop != loops_of.get(target.id):
            return None
        if not loop_by_id[source_loop].domain_rules_enabled:
            return None
        entry = matrix.lookup(source.kind, target.kind)
        if entry is None or not matrix.is_active(entry):
            return None
        return entry

    used_pairs: set[tuple[str, str]] = set()
    rules: list[CommRule] = []

    def add_rule(source: AbstractionDecl, target: AbstractionDecl, modality: Modality) -> None:
        used_pairs.add((source.id, target.id))
        rules.append(
            CommRule(
                source_kind=source.kind,
                source_id=source.id,
                modality=modality,
                target_kind=target.kind,
                target_id=target.id,
            )
        )

    candidates = [
        (source, target)
        for source in instances
        for target in instances
        if source.id != target.id
        and source.kind is not K.LOOP
        and target.kind is not K.LOOP
        and rule_pair_allowed(source.kind, target.kind)
    ]
    rng.shuffle(candidates)
    for source, target in candidates[: rng.randint(0, 8)]:
        if (source.id, target.id) in used_pairs:
            continue
        entry = domain_entry(source, target)
        modality = rng.choice([Modality.MUST_USE, Modality.MUST_NOT_USE])
        if entry is not None:
            # Stay consistent with the active domain rule for the pair.
            modality = entry.modality
        add_rule(source, target, modality)

    # Loop-level rules: a must-use needs a member-level crossing rule, a
    # must-not-use simply expands.
    loops = pa.loops()
    if len(loops) >= 2 and rng.random() < 0.6:
        loop_a, loop_b = rng.sample(loops, 2)
        crossings = [
            (member_a, member_b)
            for member_a in loop_a.children
            for member_b in loop_b.children
            if rule_pair_allowed(member_a.kind, member_b.kind)
            and (member_a.id, member_b.id) not in used_pairs
            and domain_entry(member_a, member_b) is None
        ]
        if rng.random() < 0.5:
            if crossings and (loop_a.id, loop_b.id) not in used_pairs:
                add_rule(loop_a, loop_b, Modality.MUST_USE)
                add_rule(*rng.choice(crossings), Modality.MUST_USE)
        else:
            forbidden_ok = all(
                (a.id, b.id) not in used_pairs
                for a in loop_a.children
                for b in loop_b.children
            )
            if forbidden_ok and (loop_a.id, loop_b.id) not in used_pairs:
                add_rule(loop_a, loop_b, Modality.MUST_NOT_USE)

    # Domain closure: every active must-use entry inside a domain-checked
    # loop becomes a declared rule, so the architecture satisfies its own
    # domain requirements.
    for loop in loops:
        if not loop.domain_rules_enabled:
            continue
        for entry in matrix.active_rules():
            if entry.modality is not Modality.MUST_USE:
                continue
            sources = [m for m in loop.children if m.kind is entry.source]
            targets = [m for m in loop.children if m.kind is entry.target]
            for source in sources:
                for target in targets:
                    if (source.id, target.id) not in used_pairs:
                        add_rule(source, target, Modality.MUST_USE)

    pa.rules = rules
    return pa


def copy_model(model):
    """Deep-copy a model through its serialized form."""
    return model_from_dict(model_to_dict(model))


# ---------------------------------------------------------------------------
# Random code graphs for the indirect-lift oracle
# ---------------------------------------------------------------------------


def generate_code_graph(rng: random.Random):
    """Random facts + mappings over a pool of generic components.

    Returns (pa, facts, mappings). Classes live flat in one unmapped
    package; a random subset is mapped to component abstractions.
    """
    node_count = rng.randint(2, 30)
    component_count = rng.randint(1, 6)

    managed = AbstractionDecl(
        id="md0",
        kind=K.MANAGED,
        children=[
            AbstractionDecl(id=f"gc{i}", kind=K.GENERIC_COMPONENT)
            for i in range(component_count)
        ],
    )
    pa = PlannedArchitecture(
        name="graph",
        managing=[AbstractionDecl(id="mg0", kind=K.MANAGING)],
        managed=[managed],
    )

    facts = CodeFacts()
    facts.add_element(CodeElement(path="p", kind=CodeElementKind.PACKAGE))
    nodes = [f"p/C{i}" for i in range(node_count)]
    for path in nodes:
        facts.add_element(CodeElement(path=path, kind=CodeElementKind.CLASS, parent="p"))

    entries = []
    for path in nodes:
        if rng.random() < 0.5:
            entries.append(
                Mapping(code_path=path, abstraction_id=f"gc{rng.randrange(component_count)}")
            )
    mappings = MappingSet(entries=entries)

    edge_count = rng.randint(0, 3 * node_count)
    for _ in range(edge_count):
        source, target = rng.sample(nodes, 2)
        facts.dependencies.append(
            CodeDependency(source=source, target=target, kind=DependencyKind.METHOD_CALL)
        )
    facts.validate()
    return pa, facts, mappings


def reachability_oracle(facts: CodeFacts, mappings: MappingSet) -> set[tuple[str, str]]:
    """Abstraction pairs connected through unmapped interiors.

    Independent of the engine: computes the transitive closure of the
    edge relation restricted to unmapped nodes with boolean matrix
    squaring, then joins attributed endpoints across it.
    """
    mapped = mappings.by_path()

    def attribution(path: str) -> str | None:
        cursor: str | None = path
        while cursor is not None:
            if cursor in mapped:
                return mapped[cursor]
            cursor = facts.elements[cursor].parent
        return None

    nodes = sorted(facts.elements)
    index = {path: i for i, path in enumerate(nodes)}
    n = len(nodes)
    edge = [[False] * n for _ in range(n)]
    for dependency in facts.dependencies:
        edge[index[dependency.source]][index[dependency.target]] = True

    unmapped = [attribution(path) is None for path in nodes]

    # closure[i][j]: a path i -> ... -> j of length >= 1 whose every node
    # (including i and j) is unmapped.
    closure = [
        [edge[i][j] and unmapped[i] and unmapped[j] for j in range(n)] for i in range(n)
    ]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if not unmapped[i]:
                continue
            for k in range(n):
                if closure[i][k]:
                    row_k = closure[k]
                    row_i = closure[i]
                    for j in range(n):
                        if row_k[j] and not row_i[j]:
                            row_i[j] = True
                            changed = True

    pairs: set[tuple[str, str]] = set()
    for i in range(n):
        source = attribution(nodes[i])
        if source is None:
            continue
        for j in range(n):
            target = attribution(nodes[j])
            if target is None or target == source:
                continue
            if edge[i][j]:
                pairs.add((source, target))
                continue
            # i -> u ...unmapped... u' -> j
            for u in range(n):
                if not edge[i][u] or not unmapped[u]:
                    continue
                if edge[u][j] or any(
                    closure[u][v] and edge[v][j] for v in range(n) if unmapped[v]
                ):
                    pairs.add((source, target))
                    break
    return pairs
