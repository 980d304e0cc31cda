"""Semantic profile documents: profiles as RDF, extending DCAT.

A profile document describes one dcat:Dataset with one attribute node per
column (table profile) or data type relation (domain profile). Data types
are expressed as type assignments on the attribute; every numeric feature
becomes an evaluation node, ranked for histogram buckets, quartiles and
deciles (seas:rank style).

Vocabulary (namespace ``tkg:``, see README for the full IRI table):

* scalar feature classes: ValueCount, NonNullCount, DistinctCount,
  StandardDeviation, Mean, Skewness, Kurtosis, OutlierCount,
  AverageCharacterCount, AverageDigitCount, AverageTokenCount,
  AverageCapitalCount, AverageSpecialCharacterCount
* ranked feature classes: HistogramBucket (1..10), Quartile (1..5),
  Decile (1..9)

Values are serialized with full float precision, so import(export(p)) is
bit-exact on all 53 features.
"""

from __future__ import annotations

from .errors import MissingFeatureError, RankOutOfRangeError
from .profiler import (
    DECILES,
    FEATURE_COUNT,
    HISTOGRAM,
    IDX_VALUE_COUNT,
    QUARTILES,
    ColumnProfile,
    DomainProfile,
    FeatureVector,
    RelationProfile,
)
from .rdf import RDF_TYPE, DomainOntology, RdfGraph, Term, iri, literal
from .tabular import ColumnTyping, LEAF_INDEX, TYPE_LEAVES

TKG = "http://tab2kg.org/vocab#"
DCAT = "http://www.w3.org/ns/dcat#"
SEAS = "https://w3id.org/seas/"
XSD = "http://www.w3.org/2001/XMLSchema#"

SCALAR_FEATURES = (
    ("ValueCount", 16),
    ("NonNullCount", 17),
    ("DistinctCount", 18),
    ("StandardDeviation", 19),
    ("Mean", 20),
    ("Skewness", 21),
    ("Kurtosis", 22),
    ("OutlierCount", 23),
    ("AverageCharacterCount", 24),
    ("AverageDigitCount", 25),
    ("AverageTokenCount", 26),
    ("AverageCapitalCount", 27),
    ("AverageSpecialCharacterCount", 28),
)

RANKED_FEATURES = (
    ("HistogramBucket", HISTOGRAM),
    ("Quartile", QUARTILES),
    ("Decile", DECILES),
)

def _leaf_iri(coarse: str, tag: str) -> str:
    pretty = {"datetime": "DateTime", "url": "Url"}.get(tag, tag.capitalize())
    return TKG + coarse.capitalize() + ("" if tag == coarse else pretty)


def _double(value: float) -> Term:
    return literal(repr(float(value)), datatype=XSD + "double")


def _integer(value: int) -> Term:
    return literal(str(int(value)), datatype=XSD + "integer")


def _bind_all(graph: RdfGraph) -> None:
    graph.bind("tkg", TKG)
    graph.bind("dcat", DCAT)
    graph.bind("seas", SEAS)
    graph.bind("xsd", XSD)


def _export_vector(graph: RdfGraph, attr: Term, vector: FeatureVector) -> None:
    for name, index in SCALAR_FEATURES:
        node = iri(f"{attr.value}/eval/{name}")
        graph.add(attr, TKG + "evaluation", node)
        graph.add(node, RDF_TYPE, iri(TKG + name))
        graph.add(node, TKG + "value", _double(vector[index]))
    for name, block in RANKED_FEATURES:
        for rank, index in enumerate(range(block.start, block.stop), start=1):
            node = iri(f"{attr.value}/eval/{name}/{rank}")
            graph.add(attr, TKG + "evaluation", node)
            graph.add(node, RDF_TYPE, iri(TKG + name))
            graph.add(node, SEAS + "rank", _integer(rank))
            graph.add(node, TKG + "value", _double(vector[index]))


def _export_typing(graph: RdfGraph, attr: Term, typing: ColumnTyping) -> None:
    graph.add(attr, TKG + "coarseType", literal(typing.coarse))
    for tag in sorted(typing.fine):
        graph.add(attr, TKG + "dataType", iri(_leaf_iri(typing.coarse, tag)))


def export_profile(
    profile: DomainProfile | list[ColumnProfile],
    dataset_iri: str,
) -> RdfGraph:
    """Render a domain profile or a table profile as a semantic profile graph."""
    graph = RdfGraph()
    _bind_all(graph)
    dataset = iri(dataset_iri)
    graph.add(dataset, RDF_TYPE, iri(DCAT + "Dataset"))
    if isinstance(profile, DomainProfile):
        graph.add(dataset, TKG + "profileKind", literal("domain"))
        _export_domain(graph, dataset, profile)
    else:
        graph.add(dataset, TKG + "profileKind", literal("table"))
        for index, column in enumerate(profile):
            attr = iri(f"{dataset_iri}/attribute/{index}")
            graph.add(dataset, TKG + "attribute", attr)
            graph.add(attr, RDF_TYPE, iri(TKG + "Attribute"))
            graph.add(attr, TKG + "index", _integer(index))
            graph.add(attr, TKG + "columnId", literal(column.column_id))
            _export_typing(graph, attr, column.typing)
            _export_vector(graph, attr, column.vector)
    return graph


def _export_domain(graph: RdfGraph, dataset: Term, profile: DomainProfile) -> None:
    for cls in sorted(profile.ontology.classes):
        graph.add(dataset, TKG + "modelsClass", iri(cls))
    for index, (s, p, o) in enumerate(sorted(profile.ontology.class_relations)):
        node = iri(f"{dataset.value}/relation/{index}")
        graph.add(dataset, TKG + "classRelation", node)
        graph.add(node, TKG + "subjectClass", iri(s))
        graph.add(node, TKG + "property", iri(p))
        graph.add(node, TKG + "objectClass", iri(o))
    ordered = sorted(profile.relation_profiles.values(), key=lambda r: r.key)
    for index, relation in enumerate(ordered):
        attr = iri(f"{dataset.value}/attribute/{index}")
        graph.add(dataset, TKG + "attribute", attr)
        graph.add(attr, RDF_TYPE, iri(TKG + "Attribute"))
        graph.add(attr, TKG + "index", _integer(index))
        graph.add(attr, TKG + "ontologyClass", iri(relation.class_iri))
        graph.add(attr, TKG + "ontologyProperty", iri(relation.property_iri))
        graph.add(attr, TKG + "instanceCount", _integer(relation.instance_count))
        if relation.key in profile.identifying:
            graph.add(attr, TKG + "identifying",
                      literal("true", datatype=XSD + "boolean"))
        _export_typing(graph, attr, relation.typing)
        _export_vector(graph, attr, relation.vector)


# --- import -----------------------------------------------------------------------

_RANK_RANGES = {"HistogramBucket": 10, "Quartile": 5, "Decile": 9}


def _import_typing(graph: RdfGraph, attr: Term) -> ColumnTyping:
    coarse_terms = graph.objects_of(attr, TKG + "coarseType")
    if not coarse_terms:
        raise MissingFeatureError(f"attribute {attr.value} has no coarse type")
    coarse = coarse_terms[0].value
    tags = set()
    reverse = {_leaf_iri(c, t): t for c, t in TYPE_LEAVES}
    for term in graph.objects_of(attr, TKG + "dataType"):
        if term.value not in reverse:
            raise MissingFeatureError(f"unknown data type {term.value}")
        tags.add(reverse[term.value])
    if not tags:
        raise MissingFeatureError(f"attribute {attr.value} has no data type")
    return ColumnTyping(coarse, frozenset(tags))


def _import_vector(graph: RdfGraph, attr: Term, typing: ColumnTyping) -> FeatureVector:
    vec = [0.0] * FEATURE_COUNT
    for tag in typing.fine:
        vec[LEAF_INDEX[(typing.coarse, tag)]] = 1.0
    seen: set[int] = set()
    for node in graph.objects_of(attr, TKG + "evaluation"):
        kinds = [o.value for o in graph.objects_of(node, RDF_TYPE)]
        values = graph.objects_of(node, TKG + "value")
        if not kinds or not values:
            raise MissingFeatureError(f"evaluation {node.value} lacks type or value")
        name = kinds[0][len(TKG):]
        value = float(values[0].value)
        scalar = {n: i for n, i in SCALAR_FEATURES}
        if name in scalar:
            index = scalar[name]
        elif name in _RANK_RANGES:
            ranks = graph.objects_of(node, SEAS + "rank")
            if not ranks:
                raise MissingFeatureError(f"{name} evaluation without rank")
            rank = int(ranks[0].value)
            if not 1 <= rank <= _RANK_RANGES[name]:
                raise RankOutOfRangeError(
                    f"{name} rank {rank} outside 1..{_RANK_RANGES[name]}")
            block = dict(RANKED_FEATURES)[name]
            index = block.start + rank - 1
        else:
            raise MissingFeatureError(f"unknown feature class {name}")
        vec[index] = value
        seen.add(index)
    expected = set(range(IDX_VALUE_COUNT, FEATURE_COUNT))
    missing = expected - seen
    if missing:
        raise MissingFeatureError(f"missing feature slots {sorted(missing)}")
    return FeatureVector(tuple(vec))


def import_profile(graph: RdfGraph) -> DomainProfile | list[ColumnProfile]:
    """Inverse of :func:`export_profile`."""
    datasets = graph.subjects_with(RDF_TYPE, iri(DCAT + "Dataset"))
    if not datasets:
        raise MissingFeatureError("no dcat:Dataset node found")
    dataset = datasets[0]
    kinds = graph.objects_of(dataset, TKG + "profileKind")
    kind = kinds[0].value if kinds else "table"

    attrs = graph.objects_of(dataset, TKG + "attribute")
    def attr_index(attr: Term) -> int:
        indices = graph.objects_of(attr, TKG + "index")
        return int(indices[0].value) if indices else 0
    attrs.sort(key=attr_index)

    if kind == "table":
        profiles = []
        for attr in attrs:
            column_ids = graph.objects_of(attr, TKG + "columnId")
            if not column_ids:
                raise MissingFeatureError(f"attribute {attr.value} has no column id")
            typing = _import_typing(graph, attr)
            profiles.append(ColumnProfile(
                column_id=column_ids[0].value,
                typing=typing,
                vector=_import_vector(graph, attr, typing),
            ))
        return profiles

    classes = {t.value for t in graph.objects_of(dataset, TKG + "modelsClass")}
    class_relations = set()
    for node in graph.objects_of(dataset, TKG + "classRelation"):
        s = graph.objects_of(node, TKG + "subjectClass")
        p = graph.objects_of(node, TKG + "property")
        o = graph.objects_of(node, TKG + "objectClass")
        if not (s and p and o):
            raise MissingFeatureError("incomplete class relation node")
        class_relations.add((s[0].value, p[0].value, o[0].value))

    relation_profiles: dict[tuple[str, str], RelationProfile] = {}
    identifying = set()
    datatype_relations = set()
    for attr in attrs:
        cls = graph.objects_of(attr, TKG + "ontologyClass")
        prop = graph.objects_of(attr, TKG + "ontologyProperty")
        if not (cls and prop):
            raise MissingFeatureError(f"attribute {attr.value} lacks its relation")
        counts = graph.objects_of(attr, TKG + "instanceCount")
        typing = _import_typing(graph, attr)
        relation = RelationProfile(
            class_iri=cls[0].value,
            property_iri=prop[0].value,
            typing=typing,
            vector=_import_vector(graph, attr, typing),
            instance_count=int(counts[0].value) if counts else 0,
        )
        relation_profiles[relation.key] = relation
        datatype_relations.add((relation.class_iri, relation.property_iri, typing))
        flags = graph.objects_of(attr, TKG + "identifying")
        if any(f.value == "true" for f in flags):
            identifying.add(relation.key)
    ontology = DomainOntology(
        classes=frozenset(classes),
        datatype_relations=frozenset(datatype_relations),
        class_relations=frozenset(class_relations),
    )
    return DomainProfile(
        ontology=ontology,
        relation_profiles=relation_profiles,
        identifying=frozenset(identifying),
    )
