import random

import pytest
from hypothesis import given, settings, strategies as st

from tab2kg.errors import (
    NoTypedEntitiesError,
    TurtleSyntaxError,
    UnknownPrefixError,
    UnknownRelationError,
)
from tab2kg.rdf import (
    RDF_TYPE,
    RDFS_LABEL,
    RdfGraph,
    XSD,
    blank,
    extract_ontology,
    iri,
    literal,
    literals_of_relation,
    parse_turtle,
    serialize_turtle,
)

SOSA = "http://www.w3.org/ns/sosa/"
TIME = "http://www.w3.org/2006/time#"

FIG4_TTL = """
@prefix sosa: <http://www.w3.org/ns/sosa/> .
@prefix time: <http://www.w3.org/2006/time#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix ex: <http://example.com/resource/> .

ex:Sensor3 a sosa:Sensor ;
  rdfs:label "S3" ;
  sosa:madeObservation ex:Observation3 .
ex:Observation3 a sosa:Observation ;
  sosa:hasSimpleResult "rain" ;
  sosa:phenomenonTime ex:Interval3 .
ex:Interval3 a time:Interval ;
  time:hasBeginning "16:30" ;
  time:hasEnd "17:00" .
"""


# --- parsing -----------------------------------------------------------------


def test_single_triple():
    graph = parse_turtle('<http://s> <http://p> "x" .')
    assert len(graph) == 1
    ((s, p, o),) = graph.triples
    assert s == iri("http://s") and p == "http://p" and o == literal("x")


def test_prefix_expansion():
    graph = parse_turtle("@prefix ex: <http://e/> . ex:a ex:p ex:b .")
    assert (iri("http://e/a"), "http://e/p", iri("http://e/b")) in graph.triples


def test_fig4_shaped_graph():
    graph = parse_turtle(FIG4_TTL)
    assert (iri("http://example.com/resource/Sensor3"), RDFS_LABEL,
            literal("S3")) in graph.triples
    assert len(graph) == 9


def test_predicate_and_object_lists():
    graph = parse_turtle(
        "@prefix e: <http://e/> . e:s a e:C ; e:p e:o1, e:o2 ; e:q \"v\" .")
    assert len(graph) == 4


def test_typed_and_language_literals():
    graph = parse_turtle(
        '<http://s> <http://p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> ;'
        ' <http://q> "hi"@en .')
    objs = {o for _, _, o in graph.triples}
    assert literal("5", datatype=XSD + "integer") in objs
    assert literal("hi", language="en") in objs


def test_numeric_and_boolean_shorthand():
    graph = parse_turtle("<http://s> <http://p> 5 ; <http://q> 1.5 ; <http://r> true .")
    objs = {o for _, _, o in graph.triples}
    assert literal("5", datatype=XSD + "integer") in objs
    assert literal("1.5", datatype=XSD + "decimal") in objs
    assert literal("true", datatype=XSD + "boolean") in objs


def test_blank_nodes_named_and_anonymous():
    graph = parse_turtle(
        "@prefix e: <http://e/> . e:s e:p _:x . _:x e:q [ e:r e:o ] .")
    kinds = sorted(t[0].kind for t in graph.triples)
    assert kinds == ["blank", "blank", "iri"]


def test_syntax_error_carries_position():
    with pytest.raises(TurtleSyntaxError) as info:
        parse_turtle("<http://s> <http://p>\n ???")
    assert info.value.line == 2


def test_unknown_prefix():
    with pytest.raises(UnknownPrefixError):
        parse_turtle("ex:a ex:p ex:b .")


def test_string_escapes():
    graph = parse_turtle('<http://s> <http://p> "a\\"b\\nc\\\\d" .')
    ((_, _, o),) = graph.triples
    assert o.value == 'a"b\nc\\d'


# --- serialization ------------------------------------------------------------


def test_empty_graph_serializes_to_prefix_header():
    graph = RdfGraph(prefixes={"ex": "http://e/"})
    assert serialize_turtle(graph) == b"@prefix ex: <http://e/> .\n"


def test_round_trip_law_small():
    graph = parse_turtle(FIG4_TTL)
    assert parse_turtle(serialize_turtle(graph)) == graph


def test_serialization_deterministic():
    graph = parse_turtle(FIG4_TTL)
    assert serialize_turtle(graph) == serialize_turtle(graph)
    rebuilt = parse_turtle(serialize_turtle(graph))
    assert serialize_turtle(rebuilt) == serialize_turtle(graph)


def _random_graph(rng: random.Random) -> RdfGraph:
    graph = RdfGraph(prefixes={"ex": "http://e/", "xsd": XSD})
    nodes = [iri(f"http://e/n{i}") for i in range(rng.randint(1, 6))]
    nodes += [blank(f"b{i}") for i in range(rng.randint(0, 3))]
    predicates = [f"http://e/p{i}" for i in range(rng.randint(1, 4))]
    for _ in range(rng.randint(1, 25)):
        s = rng.choice(nodes)
        p = rng.choice(predicates)
        kind = rng.random()
        if kind < 0.4:
            o = rng.choice(nodes)
        elif kind < 0.6:
            o = literal(rng.choice(["plain", 'quo"te', "new\nline", "täb\t", ""]))
        elif kind < 0.8:
            o = literal(str(rng.randint(-50, 50)), datatype=XSD + "integer")
        else:
            o = literal("bonjour", language="fr")
        graph.add(s, p, o)
    return graph


def test_round_trip_law_random_graphs():
    rng = random.Random(20240803)
    for _ in range(150):
        graph = _random_graph(rng)
        assert parse_turtle(serialize_turtle(graph)) == graph


@given(st.text(max_size=60), st.text(alphabet=st.characters(), max_size=12))
@settings(max_examples=200, deadline=None)
def test_literal_escaping_round_trip(value, language):
    graph = RdfGraph()
    term = literal(value)
    # language tags are ASCII-only in Turtle
    if language and language.isascii() and language.isalpha():
        term = literal(value, language=language)
    graph.add(iri("http://s"), "http://p", term)
    assert parse_turtle(serialize_turtle(graph)) == graph


# --- ontology extraction ---------------------------------------------------------


def test_extract_ontology_running_example():
    ontology = extract_ontology(parse_turtle(FIG4_TTL))
    keys = {(c, p) for c, p, _ in ontology.datatype_relations}
    assert (SOSA + "Sensor", RDFS_LABEL) in keys
    assert (SOSA + "Sensor", SOSA + "madeObservation",
            SOSA + "Observation") in ontology.class_relations
    assert (SOSA + "Observation", SOSA + "phenomenonTime",
            TIME + "Interval") in ontology.class_relations
    label_typing = ontology.datatype_relation_map()[(SOSA + "Sensor", RDFS_LABEL)]
    assert label_typing.coarse == "text"


def test_untyped_subject_contributes_nothing():
    graph = parse_turtle(
        "@prefix e: <http://e/> . e:a a e:C . e:b e:p \"x\" .")
    ontology = extract_ontology(graph)
    assert ontology.datatype_relations == frozenset()


def test_multi_typed_entity_contributes_to_each_class():
    graph = parse_turtle(
        "@prefix e: <http://e/> .\n"
        "e:a a e:C1, e:C2 ; e:p \"v\" ; e:q e:b .\n"
        "e:b a e:D .")
    ontology = extract_ontology(graph)
    keys = {(c, p) for c, p, _ in ontology.datatype_relations}
    # brute-force expansion over the type product
    assert keys == {("http://e/C1", "http://e/p"), ("http://e/C2", "http://e/p")}
    assert ontology.class_relations == {
        ("http://e/C1", "http://e/q", "http://e/D"),
        ("http://e/C2", "http://e/q", "http://e/D"),
    }


def test_no_typed_entities():
    with pytest.raises(NoTypedEntitiesError):
        extract_ontology(parse_turtle('<http://s> <http://p> "x" .'))


def test_extraction_monotone_under_added_triples():
    base = parse_turtle(FIG4_TTL)
    before = extract_ontology(base)
    base.add(iri("http://example.com/resource/Sensor9"), RDF_TYPE, iri(SOSA + "Sensor"))
    base.add(iri("http://example.com/resource/Sensor9"),
             "http://e/serial", literal("77"))
    after = extract_ontology(base)
    assert before.classes <= after.classes
    before_keys = {(c, p) for c, p, _ in before.datatype_relations}
    after_keys = {(c, p) for c, p, _ in after.datatype_relations}
    assert before_keys <= after_keys
    assert before.class_relations <= after.class_relations


def test_every_datatype_relation_has_literals():
    graph = parse_turtle(FIG4_TTL)
    ontology = extract_ontology(graph)
    for c, p, _ in ontology.datatype_relations:
        assert literals_of_relation(graph, (c, p))


# --- literals_of_relation ----------------------------------------------------------


def test_literals_running_example():
    graph = parse_turtle(FIG4_TTL)
    assert literals_of_relation(graph, (SOSA + "Sensor", RDFS_LABEL)) == ["S3"]


def test_literals_unknown_relation():
    with pytest.raises(UnknownRelationError):
        literals_of_relation(parse_turtle(FIG4_TTL), (SOSA + "Sensor", "http://nope"))


def test_literals_enumerates_all_instances():
    graph = parse_turtle(
        "@prefix e: <http://e/> .\n"
        'e:s1 a e:Sensor ; e:label "S1" .\n'
        'e:s2 a e:Sensor ; e:label "S2" .')
    assert literals_of_relation(graph, ("http://e/Sensor", "http://e/label")) == ["S1", "S2"]
