"""Turn scored candidate mappings into a concrete data graph plan.

The plan fixes one data type relation per column (greedy, highest score
first) and the smallest set of class relations that connects all mapped
classes. Only class relations touching at least one mapped class are
admissible, so connections between mapped classes are direct edges or
two-edge bridges through a single intermediate class.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .errors import (
    CyclicStructureUnsupportedError,
    DisconnectedOntologyError,
    UnmappableColumnError,
)
from .profiler import DomainProfile
from .rdf import DomainOntology
from .tabular import ROW_NUMBER_COLUMN

RelationKey = tuple[str, str]

_EXACT_SEARCH_MAX_EDGES = 18


@dataclass(frozen=True)
class DataGraphPlan:
    column_mappings: dict[str, RelationKey]
    class_relations: frozenset[tuple[str, str, str]]
    identifier_sources: dict[str, str]

    def mapped_classes(self) -> set[str]:
        return {c for c, _ in self.column_mappings.values()}

    def report(self) -> str:
        """Human-readable JSON diagnostic of the chosen plan."""
        return json.dumps({
            "column_mappings": {
                col: {"class": c, "property": p}
                for col, (c, p) in sorted(self.column_mappings.items())
            },
            "class_relations": [
                {"subject": s, "property": p, "object": o}
                for s, p, o in sorted(self.class_relations)
            ],
            "identifier_sources": dict(sorted(self.identifier_sources.items())),
        }, indent=2)


def select_mappings(
    candidates: dict[str, list[tuple[RelationKey, float]]],
) -> dict[str, RelationKey]:
    """Greedy assignment: repeatedly fix the globally best (column, relation)
    pair, then drop every candidate sharing that column or relation.

    Ties break by score desc, column position asc, relation lexicographic.
    """
    column_order = {col: i for i, col in enumerate(candidates)}
    pool = [
        (score, column_order[col], col, relation)
        for col, options in candidates.items()
        for relation, score in options
    ]
    pool.sort(key=lambda item: (-item[0], item[1], item[3]))
    assigned: dict[str, RelationKey] = {}
    taken_relations: set[RelationKey] = set()
    for score, _, col, relation in pool:
        if col in assigned or relation in taken_relations:
            continue
        assigned[col] = relation
        taken_relations.add(relation)
    for col in candidates:
        if col not in assigned:
            raise UnmappableColumnError(col)
    return {col: assigned[col] for col in candidates}


def _connects(edges, terminals) -> bool:
    parent: dict[str, str] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    for s, _, o in edges:
        union(s, o)
    roots = {find(t) for t in terminals}
    return len(roots) <= 1


def _minimal_connector(edges, terminals):
    """Smallest admissible edge subset connecting all terminals.

    Exhaustive by increasing size (deterministic tie-break via sorted edge
    order); falls back to greedy component merging on large inputs.
    """
    if len(edges) <= _EXACT_SEARCH_MAX_EDGES:
        for size in range(len(edges) + 1):
            for combo in itertools.combinations(edges, size):
                if _connects(combo, terminals):
                    return set(combo)
        raise DisconnectedOntologyError(
            f"cannot connect classes {sorted(terminals)} with admissible relations")
    return _greedy_connector(edges, terminals)


def _greedy_connector(edges, terminals):
    chosen: set = set()
    while not _connects(chosen, terminals):
        progress = None
        for edge in edges:
            if edge in chosen:
                continue
            trial = chosen | {edge}
            before = _component_count(chosen, terminals)
            after = _component_count(trial, terminals)
            if after < before:
                progress = edge
                break
        if progress is None:
            raise DisconnectedOntologyError(
                f"cannot connect classes {sorted(terminals)} with admissible relations")
        chosen.add(progress)
    # drop redundant edges (condition 3)
    for edge in sorted(chosen):
        if _connects(chosen - {edge}, terminals):
            chosen.remove(edge)
    return chosen


def _component_count(edges, terminals) -> int:
    nodes = set(terminals)
    for s, _, o in edges:
        nodes.update((s, o))
    seen: set[str] = set()
    count = 0
    adjacency: dict[str, set[str]] = {n: set() for n in nodes}
    for s, _, o in edges:
        adjacency[s].add(o)
        adjacency[o].add(s)
    for t in terminals:
        if t in seen:
            continue
        count += 1
        stack = [t]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(adjacency.get(node, ()))
    return count


def build_plan(
    mappings: dict[str, RelationKey],
    ontology: DomainOntology,
    domain_profile: DomainProfile,
    scores: dict[str, float] | None = None,
) -> DataGraphPlan:
    """Assemble the plan: chosen mappings plus a minimal connecting skeleton.

    Classes of mapped relations are the terminals. Identifier sources come
    from identifying relations (highest mapping score wins when several
    columns of one class identify it); every other class keys on the row
    number.
    """
    if not mappings:
        raise ValueError("cannot plan without column mappings")
    terminals = sorted({c for c, _ in mappings.values()})
    admissible = sorted(
        r for r in ontology.class_relations
        if (r[0] in terminals or r[2] in terminals) and r[0] != r[2]
    )
    if len(terminals) == 1:
        skeleton: set[tuple[str, str, str]] = set()
    else:
        only_self_loops = not admissible and any(
            r[0] == r[2] and r[0] in terminals for r in ontology.class_relations)
        if only_self_loops:
            raise CyclicStructureUnsupportedError(
                "connecting the mapped classes would instantiate a class "
                "more than once per row")
        skeleton = _minimal_connector(admissible, terminals)

    plan_classes = set(terminals)
    for s, _, o in skeleton:
        plan_classes.update((s, o))

    identifier_sources: dict[str, str] = {}
    for cls in sorted(plan_classes):
        best_col, best_score = None, float("-inf")
        for position, (col, (c, p)) in enumerate(mappings.items()):
            if c != cls or (c, p) not in domain_profile.identifying:
                continue
            score = scores.get(col, 0.0) if scores else -float(position)
            if score > best_score:
                best_col, best_score = col, score
        identifier_sources[cls] = best_col if best_col is not None else ROW_NUMBER_COLUMN

    return DataGraphPlan(
        column_mappings=dict(mappings),
        class_relations=frozenset(skeleton),
        identifier_sources=identifier_sources,
    )


def audit_plan(plan: DataGraphPlan, ontology: DomainOntology) -> list[str]:
    """Check the four structural conditions; returns a list of violations."""
    problems = []
    terminals = plan.mapped_classes()
    relations = {(c, p) for c, p, _ in ontology.datatype_relations}
    for col, key in plan.column_mappings.items():
        if key not in relations:
            problems.append(f"column {col} mapped to unknown relation {key}")
    values = list(plan.column_mappings.values())
    if len(set(values)) != len(values):
        problems.append("column mappings are not injective on relations")
    if not _connects(plan.class_relations, terminals):
        problems.append("mapped classes are not connected")
    for edge in plan.class_relations:
        if edge[0] not in terminals and edge[2] not in terminals:
            problems.append(f"relation {edge} touches no mapped class")
        if _connects(plan.class_relations - {edge}, terminals):
            problems.append(f"relation {edge} is removable")
    return problems
