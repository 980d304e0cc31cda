"""Training corpus generation from knowledge graphs, and evaluation protocols.

A knowledge graph is split into two disjoint halves: one half acts as the
domain knowledge graph, the other is walked through small directed tree
templates and flattened into data tables with known ground-truth mappings.
Every stochastic decision is seeded, with per-instance sub-generators, so
parallel and serial runs agree.

The evaluation side implements the pairwise protocol (one table's graph is
the domain knowledge of another table whose mapped relations are a subset)
and the set-based protocol (tables grouped by their majority class, with a
union domain graph per group), plus accuracy reporting over data type
relations and class relations.
"""

from __future__ import annotations

import csv
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    AllNullError,
    NoInstantiableTemplateError,
    Tab2KGError,
    TooSmallError,
    UnmappableColumnError,
)
from .graphgen import build_plan, select_mappings
from .matcher import SiameseModel, TrainingPair, candidate_mappings
from .profiler import DomainProfile, profile_domain, profile_table
from .rdf import (
    RDF_TYPE,
    RdfGraph,
    Term,
    blank,
    extract_ontology,
    parse_turtle,
    serialize_turtle,
)
from .tabular import (
    Column,
    DataTable,
    Dialect,
    identify_types,
    parse_table,
    serialize_table,
)

logger = logging.getLogger(__name__)

RelationKey = tuple[str, str]

REASON_NOT_PARSEABLE = "not-parseable"
REASON_CYCLIC = "cyclic-structure"
REASON_IDENTICAL_COLUMNS = "identical-columns"
REASON_TOO_FEW_COLUMNS = "too-few-columns"

SETBASED_MIN_TABLES = 10
SETBASED_MIN_RELATIONS = 5

_INSTANTIATION_ATTEMPTS = 30


@dataclass(frozen=True)
class GenConfig:
    k: int = 3
    delta: float = 0.2
    ratio_bounds: tuple[float, float] = (0.25, 0.75)
    seed: int = 0
    max_rows: int = 10_000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("template size k must be >= 1")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        lo, hi = self.ratio_bounds
        if not (0.0 < lo <= hi < 1.0):
            raise ValueError("ratio bounds must lie within (0, 1)")


@dataclass
class TrainingInstance:
    domain_graph: RdfGraph
    table: DataTable
    ground_truth: dict[str, RelationKey]
    name: str = "instance"


@dataclass
class CorpusItem:
    """One evaluation corpus entry: a table, its mapping and its data graph."""

    name: str
    table: DataTable | None = None
    mapping: dict[str, RelationKey] = field(default_factory=dict)
    graph: RdfGraph | None = None
    error: str | None = None


# --- knowledge graph splitting ----------------------------------------------------


def split_kg(graph: RdfGraph, config: GenConfig = GenConfig()) -> tuple[RdfGraph, RdfGraph]:
    """Split entities disjointly at a seeded ratio within the configured bounds.

    Literal relations and type statements follow their entity; entity
    relations spanning both halves are dropped so that no triple is shared.
    """
    typed = sorted(
        {s for s, p, o in graph.triples if p == RDF_TYPE and o.kind == "iri"},
        key=Term.sort_key)
    if len(typed) < 2:
        raise TooSmallError("need at least two typed entities to split")
    rng = random.Random(f"split:{config.seed}")
    entities = list(typed)
    rng.shuffle(entities)
    ratio = rng.uniform(*config.ratio_bounds)
    cut = min(max(round(ratio * len(entities)), 1), len(entities) - 1)
    side = {e: (0 if i < cut else 1) for i, e in enumerate(entities)}

    halves = (RdfGraph(prefixes=dict(graph.prefixes)),
              RdfGraph(prefixes=dict(graph.prefixes)))
    for s, p, o in graph.triples:
        if s not in side:
            continue
        if o.kind == "literal" or p == RDF_TYPE:
            halves[side[s]].add(s, p, o)
        elif o in side:
            if side[s] == side[o]:
                halves[side[s]].add(s, p, o)
        else:
            halves[side[s]].add(s, p, o)
    return halves


# --- template-based table generation ------------------------------------------------


def _tree_shapes(k: int) -> list[list[tuple[int, int]]]:
    shapes: list[list[tuple[int, int]]] = [[]]
    if k >= 2:
        shapes.append([(0, 1)])
    if k >= 3:
        shapes.append([(0, 1), (1, 2)])
        shapes.append([(0, 1), (0, 2)])
    return shapes


def _weighted_choice(rng: random.Random, options: list, weights: list[float]):
    return rng.choices(options, weights=weights, k=1)[0]


def _instantiate_shape(shape, ontology, class_counts, relation_counts,
                       datatype_counts, rng):
    """Assign classes/properties to one tree shape; None if impossible."""
    n_nodes = 1 + max((child for _, child in shape), default=0)
    classes_sorted = sorted(c for c in ontology.classes if class_counts.get(c))
    if not classes_sorted:
        return None
    node_class: dict[int, str] = {
        0: _weighted_choice(rng, classes_sorted,
                            [class_counts[c] for c in classes_sorted])
    }
    edge_props: list[tuple[int, int, str]] = []
    for parent, child in shape:
        used = set(node_class.values())
        options = sorted(
            r for r in ontology.class_relations
            if r[0] == node_class[parent] and r[2] not in used
        )
        if not options:
            return None
        chosen = _weighted_choice(
            rng, options, [relation_counts.get(r, 1) for r in options])
        node_class[child] = chosen[2]
        edge_props.append((parent, child, chosen[1]))

    children = {parent for parent, _ in shape}
    leaves = [n for n in range(n_nodes) if n not in children]
    by_class: dict[str, list[RelationKey]] = {}
    for c, p, _ in ontology.datatype_relations:
        by_class.setdefault(c, []).append((c, p))
    chosen_relations: list[tuple[int, RelationKey]] = []
    taken: set[RelationKey] = set()
    for leaf in leaves:
        options = sorted(set(by_class.get(node_class[leaf], [])) - taken)
        if not options:
            return None
        relation = _weighted_choice(
            rng, options, [datatype_counts.get(r, 1) for r in options])
        chosen_relations.append((leaf, relation))
        taken.add(relation)
    return node_class, edge_props, leaves, chosen_relations, taken, by_class


def generate_tables(
    g2: RdfGraph, config: GenConfig = GenConfig()
) -> list[tuple[DataTable, dict[str, RelationKey]]]:
    """Extract data tables from a knowledge graph via directed tree templates.

    Each enumerated tree shape (up to ``config.k`` nodes) is instantiated
    with classes and properties sampled proportionally to their occurrence;
    every leaf receives one data type relation and extra relations are added
    while a uniform draw exceeds ``config.delta``. One row is emitted per
    connected entity tuple matching the template. Tables violating the
    corpus constraints (fewer than two columns, identical column pairs,
    all-null columns) are discarded.
    """
    ontology = extract_ontology(g2)
    types: dict[Term, set[str]] = {}
    for s, p, o in g2.triples:
        if p == RDF_TYPE and o.kind == "iri":
            types.setdefault(s, set()).add(o.value)
    class_counts: dict[str, int] = {}
    for cs in types.values():
        for c in cs:
            class_counts[c] = class_counts.get(c, 0) + 1
    relation_counts: dict[tuple[str, str, str], int] = {}
    datatype_counts: dict[RelationKey, int] = {}
    literal_values: dict[tuple[Term, str], list[str]] = {}
    links: dict[tuple[Term, str], list[Term]] = {}
    for s, p, o in sorted(g2.triples,
                          key=lambda t: (t[0].sort_key(), t[1], t[2].sort_key())):
        if p == RDF_TYPE or s not in types:
            continue
        if o.kind == "literal":
            for c in types[s]:
                datatype_counts[(c, p)] = datatype_counts.get((c, p), 0) + 1
            literal_values.setdefault((s, p), []).append(o.value)
        elif o in types:
            for c in types[s]:
                for c2 in types[o]:
                    relation_counts[(c, p, c2)] = relation_counts.get((c, p, c2), 0) + 1
            links.setdefault((s, p), []).append(o)

    rng = random.Random(f"tables:{config.seed}")
    tables: list[tuple[DataTable, dict[str, RelationKey]]] = []
    instantiated = 0
    for shape in _tree_shapes(config.k):
        result = None
        for _ in range(_INSTANTIATION_ATTEMPTS):
            result = _instantiate_shape(
                shape, ontology, class_counts, relation_counts,
                datatype_counts, rng)
            if result is not None:
                break
        if result is None:
            continue
        instantiated += 1
        node_class, edge_props, leaves, chosen_relations, taken, by_class = result

        pool = sorted(
            {r for node, cls in node_class.items() for r in by_class.get(cls, [])}
            - taken)
        node_of_class = {cls: node for node, cls in node_class.items()}
        while pool and rng.random() > config.delta:
            relation = _weighted_choice(
                rng, pool, [datatype_counts.get(r, 1) for r in pool])
            pool.remove(relation)
            chosen_relations.append((node_of_class[relation[0]], relation))

        rows = _extract_tuples(node_class, edge_props, types, links, config.max_rows)
        if not rows:
            continue
        cells = []
        for assignment in rows:
            row = []
            for node, (cls, prop) in chosen_relations:
                values = literal_values.get((assignment[node], prop))
                row.append(sorted(values)[0] if values else None)
            cells.append(row)
        table = _build_table(cells, len(chosen_relations))
        ground_truth = {
            f"col{i}": relation for i, (_, relation) in enumerate(chosen_relations)
        }
        if _passes_table_constraints(table, ground_truth):
            tables.append((table, ground_truth))
    if instantiated == 0:
        raise NoInstantiableTemplateError(
            "no template shape could be instantiated on this graph")
    return tables


def _extract_tuples(node_class, edge_props, types, links, max_rows):
    roots = sorted(
        (e for e, cs in types.items() if node_class[0] in cs),
        key=Term.sort_key)
    assignments = [{0: e} for e in roots]
    for parent, child, prop in edge_props:
        extended = []
        for assignment in assignments:
            used = set(assignment.values())
            for target in links.get((assignment[parent], prop), ()):
                if node_class[child] in types.get(target, ()) and target not in used:
                    extended.append({**assignment, child: target})
        assignments = extended
        if not assignments:
            return []
    return assignments[:max_rows]


def _build_table(cells: list[list[str | None]], width: int) -> DataTable:
    rows = len(cells)
    columns = tuple(
        Column(column_id=f"col{n}", values=tuple(cells[m][n] for m in range(rows)))
        for n in range(width))
    return DataTable(
        columns=columns,
        row_count=rows,
        column_count=width,
        row_ids=tuple(str(m) for m in range(rows)),
    )


def _passes_table_constraints(table: DataTable, mapping: dict[str, RelationKey]) -> bool:
    mapped = [c for c in table.column_ids if c in mapping]
    if len(mapped) < 2:
        return False
    relations = [mapping[c] for c in mapped]
    if len(set(relations)) != len(relations):
        return False
    for column in table.columns:
        if all(v is None for v in column.values):
            return False
    seen: dict[tuple, str] = {}
    for column in table.columns:
        key = tuple(column.values)
        if key in seen:
            return False
        seen[key] = column.column_id
    return True


def make_instances(
    kgs: list[RdfGraph], config: GenConfig = GenConfig()
) -> list[TrainingInstance]:
    """Split each graph and turn its second half into training tables.

    Tables whose ground-truth relations are missing from the first half's
    ontology are dropped; sub-generators are derived per graph index.
    """
    instances = []
    for index, graph in enumerate(kgs):
        sub = GenConfig(
            k=config.k, delta=config.delta, ratio_bounds=config.ratio_bounds,
            seed=config.seed * 100_003 + index, max_rows=config.max_rows)
        try:
            g1, g2 = split_kg(graph, sub)
            pairs = generate_tables(g2, sub)
            available = {
                (c, p) for c, p, _ in profile_relations_of(g1)
            }
        except Tab2KGError as exc:
            logger.warning("graph %d skipped: %s", index, exc)
            continue
        for t_index, (table, ground_truth) in enumerate(pairs):
            if not set(ground_truth.values()) <= available:
                logger.info("graph %d table %d: relations missing in domain half",
                            index, t_index)
                continue
            instances.append(TrainingInstance(
                domain_graph=g1, table=table, ground_truth=ground_truth,
                name=f"kg{index:03d}_t{t_index}"))
    return instances


def profile_relations_of(graph: RdfGraph):
    try:
        return extract_ontology(graph).datatype_relations
    except Tab2KGError:
        return frozenset()


# --- training pairs -----------------------------------------------------------------


def make_training_pairs(
    instances: list[TrainingInstance], balance: bool = False
) -> list[TrainingPair]:
    """Positive pairs from ground-truth (relation, column) matches, negative
    pairs from all remaining same-graph combinations.

    ``balance`` subsamples negatives (evenly spaced, deterministic) down to
    the number of positives.
    """
    pairs: list[TrainingPair] = []
    for instance in instances:
        try:
            domain = profile_domain(instance.domain_graph)
            columns = profile_table(instance.table)
        except Tab2KGError as exc:
            logger.warning("instance %s skipped: %s", instance.name, exc)
            continue
        relations = sorted(domain.relation_profiles.values(), key=lambda r: r.key)
        positives, negatives = [], []
        for column in columns:
            truth = instance.ground_truth.get(column.column_id)
            for relation in relations:
                pair = TrainingPair(
                    a=relation.vector, b=column.vector,
                    label=1.0 if relation.key == truth else 0.0)
                (positives if pair.label == 1.0 else negatives).append(pair)
        if balance and len(negatives) > len(positives) > 0:
            step = len(negatives) / len(positives)
            negatives = [negatives[int(i * step)] for i in range(len(positives))]
        pairs.extend(positives)
        pairs.extend(negatives)
    return pairs


# --- evaluation protocols --------------------------------------------------------------


def check_constraints(item: CorpusItem) -> str | None:
    """Reason code when the item violates a corpus constraint, else None."""
    if item.error is not None or item.table is None:
        return REASON_NOT_PARSEABLE
    relations = [item.mapping[c] for c in item.table.column_ids if c in item.mapping]
    if len(relations) != len(set(relations)):
        return REASON_CYCLIC
    columns = {c.column_id: tuple(c.values) for c in item.table.columns}
    values = list(columns.values())
    if len(set(values)) != len(values):
        return REASON_IDENTICAL_COLUMNS
    if len(relations) < 2:
        return REASON_TOO_FEW_COLUMNS
    return None


def filter_items(items: list[CorpusItem]) -> tuple[list[CorpusItem], list[tuple[str, str]]]:
    accepted, rejected = [], []
    for item in items:
        reason = check_constraints(item)
        if reason is None:
            accepted.append(item)
        else:
            rejected.append((item.name, reason))
            logger.info("table %s rejected: %s", item.name, reason)
    return accepted, rejected


@dataclass
class EvalInstance:
    name: str
    table: DataTable
    ground_truth: dict[str, RelationKey]
    domain_graph: RdfGraph | None = None
    domain_profile: DomainProfile | None = None


def extract_pairwise(items: list[CorpusItem]) -> list[EvalInstance]:
    """Pair tables where the first one's mapped relations are a subset of the
    second one's; the second table's graph becomes the domain knowledge."""
    accepted, _ = filter_items(items)
    instances = []
    for first in accepted:
        first_relations = set(first.mapping.values())
        for second in accepted:
            if first.name == second.name or second.graph is None:
                continue
            if first_relations <= set(second.mapping.values()):
                instances.append(EvalInstance(
                    name=f"{first.name}~{second.name}",
                    table=first.table,
                    ground_truth=dict(first.mapping),
                    domain_graph=second.graph,
                ))
    return instances


@dataclass
class SetBasedGroup:
    label: str
    graph: RdfGraph
    profile: DomainProfile
    members: list[CorpusItem]

    def instances(self) -> list[EvalInstance]:
        return [
            EvalInstance(
                name=f"{member.name}@{self.label}",
                table=member.table,
                ground_truth=dict(member.mapping),
                domain_profile=self.profile,
            )
            for member in self.members
        ]


def _majority_class(mapping: dict[str, RelationKey]) -> str:
    counts: dict[str, int] = {}
    for cls, _ in mapping.values():
        counts[cls] = counts.get(cls, 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def union_graphs(graphs: list[RdfGraph]) -> RdfGraph:
    """Merge graphs, relabelling blank nodes so members cannot collide."""
    merged = RdfGraph()
    for index, graph in enumerate(graphs):
        merged.prefixes.update(graph.prefixes)

        def relabel(term: Term) -> Term:
            if term.kind == "blank":
                return blank(f"g{index}_{term.value}")
            return term

        for s, p, o in graph.triples:
            merged.add(relabel(s), p, relabel(o))
    return merged


def extract_setbased(items: list[CorpusItem]) -> list[SetBasedGroup]:
    """Group tables by majority mapped class; keep groups with at least
    10 tables and at least 5 data type relations in the union graph."""
    accepted, _ = filter_items(items)
    groups: dict[str, list[CorpusItem]] = {}
    for item in accepted:
        if not item.mapping or item.graph is None:
            continue
        groups.setdefault(_majority_class(item.mapping), []).append(item)
    survivors = []
    for label in sorted(groups):
        members = groups[label]
        if len(members) < SETBASED_MIN_TABLES:
            continue
        graph = union_graphs([m.graph for m in members])
        profile = profile_domain(graph)
        if len(profile.relation_profiles) < SETBASED_MIN_RELATIONS:
            continue
        survivors.append(SetBasedGroup(
            label=label, graph=graph, profile=profile, members=members))
    return survivors


# --- evaluation ------------------------------------------------------------------------


@dataclass
class InstanceResult:
    name: str
    columns_total: int = 0
    columns_correct: int = 0
    class_relations_total: int = 0
    class_relations_correct: int = 0
    note: str = ""


@dataclass
class EvalReport:
    mode: str
    results: list[InstanceResult] = field(default_factory=list)

    def _totals(self):
        cols = sum(r.columns_total for r in self.results)
        cols_ok = sum(r.columns_correct for r in self.results)
        rels = sum(r.class_relations_total for r in self.results)
        rels_ok = sum(r.class_relations_correct for r in self.results)
        return cols, cols_ok, rels, rels_ok

    @property
    def accuracy_rod(self) -> float | None:
        cols, cols_ok, _, _ = self._totals()
        return cols_ok / cols if cols else None

    @property
    def accuracy_roc(self) -> float | None:
        _, _, rels, rels_ok = self._totals()
        return rels_ok / rels if rels else None

    @property
    def accuracy_combined(self) -> float | None:
        cols, cols_ok, rels, rels_ok = self._totals()
        total = cols + rels
        return (cols_ok + rels_ok) / total if total else None

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow([
                "instance", "columns_total", "columns_correct",
                "class_relations_total", "class_relations_correct", "note"])
            for r in self.results:
                writer.writerow([
                    r.name, r.columns_total, r.columns_correct,
                    r.class_relations_total, r.class_relations_correct, r.note])

    def summary(self) -> str:
        def fmt(x):
            return "n/a" if x is None else f"{x:.4f}"
        return (f"mode={self.mode} instances={len(self.results)} "
                f"accuracy_ROD={fmt(self.accuracy_rod)} "
                f"accuracy_ROC={fmt(self.accuracy_roc)} "
                f"combined={fmt(self.accuracy_combined)}")


def evaluate(
    model: SiameseModel,
    instances: list[EvalInstance],
    mode: str = "pairwise",
) -> EvalReport:
    """Run the full interpretation pipeline per instance and score it.

    Accuracy counts correctly mapped columns (data type relations) and
    correctly chosen class relations; the combined accuracy weights both by
    their counts.
    """
    report = EvalReport(mode=mode)
    profile_cache: dict[int, DomainProfile] = {}
    for instance in instances:
        result = InstanceResult(name=instance.name)
        result.columns_total = len(instance.ground_truth)
        try:
            profile = instance.domain_profile
            if profile is None:
                key = id(instance.domain_graph)
                if key not in profile_cache:
                    profile_cache[key] = profile_domain(instance.domain_graph)
                profile = profile_cache[key]
            truth_plan = build_plan(instance.ground_truth, profile.ontology, profile)
            result.class_relations_total = len(truth_plan.class_relations)
        except (Tab2KGError, ValueError) as exc:
            result.note = f"domain-error:{type(exc).__name__}"
            report.results.append(result)
            continue
        try:
            columns = profile_table(instance.table)
            candidates = candidate_mappings(columns, profile, model)
            predicted = select_mappings(candidates)
        except (AllNullError, UnmappableColumnError) as exc:
            result.note = f"interpretation-error:{type(exc).__name__}"
            report.results.append(result)
            continue
        result.columns_correct = sum(
            1 for col, relation in instance.ground_truth.items()
            if predicted.get(col) == relation)
        try:
            predicted_plan = build_plan(predicted, profile.ontology, profile)
            result.class_relations_correct = len(
                predicted_plan.class_relations & truth_plan.class_relations)
        except Tab2KGError as exc:
            result.note = f"plan-error:{type(exc).__name__}"
        report.results.append(result)
    return report


# --- corpus directory layout --------------------------------------------------------------


def write_corpus(instances: list[TrainingInstance], out_dir) -> list[Path]:
    """Write one directory per instance: domain.ttl, table.csv, mapping.gt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for index, instance in enumerate(instances):
        directory = out / f"instance_{index:04d}"
        directory.mkdir(exist_ok=True)
        (directory / "domain.ttl").write_bytes(
            serialize_turtle(instance.domain_graph))
        (directory / "table.csv").write_text(
            serialize_table(instance.table), encoding="utf-8")
        lines = [
            f"{col}|{cls}|{prop}|{_coarse_of(instance, col)}"
            for col, (cls, prop) in sorted(instance.ground_truth.items())
        ]
        (directory / "mapping.gt").write_text("\n".join(lines) + "\n",
                                              encoding="utf-8")
        written.append(directory)
    return written


def _coarse_of(instance: TrainingInstance, col: str) -> str:
    for column in instance.table.columns:
        if column.column_id == col:
            try:
                return identify_types(list(column.values)).coarse
            except AllNullError:
                return "text"
    return "text"


def read_mapping(path) -> dict[str, RelationKey]:
    mapping = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        parts = line.split("|")
        if len(parts) < 3:
            raise Tab2KGError(f"bad mapping line {line!r} in {path}")
        mapping[parts[0]] = (parts[1], parts[2])
    return mapping


def read_corpus(corpus_dir, dialect: Dialect = Dialect()) -> list[CorpusItem]:
    """Load instance directories; parse failures become reason-coded items."""
    items = []
    root = Path(corpus_dir)
    for directory in sorted(p for p in root.iterdir() if p.is_dir()):
        name = directory.name
        try:
            table = parse_table(
                (directory / "table.csv").read_bytes(), dialect,
                source_name="table.csv")
            mapping = read_mapping(directory / "mapping.gt")
            graph = parse_turtle((directory / "domain.ttl").read_bytes())
            items.append(CorpusItem(name=name, table=table, mapping=mapping,
                                    graph=graph))
        except (Tab2KGError, OSError) as exc:
            items.append(CorpusItem(name=name, error=str(exc)))
    return items


def load_training_instances(corpus_dir, dialect: Dialect = Dialect()) -> list[TrainingInstance]:
    instances = []
    for item in read_corpus(corpus_dir, dialect):
        if item.error is not None:
            logger.warning("corpus item %s skipped: %s", item.name, item.error)
            continue
        instances.append(TrainingInstance(
            domain_graph=item.graph, table=item.table,
            ground_truth=item.mapping, name=item.name))
    return instances
