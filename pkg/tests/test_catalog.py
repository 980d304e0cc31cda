import random

import pytest

from tab2kg.catalog import TKG, export_profile, import_profile
from tab2kg.errors import MissingFeatureError, RankOutOfRangeError
from tab2kg.profiler import (
    FEATURE_COUNT,
    ColumnProfile,
    DomainProfile,
    FeatureVector,
    RelationProfile,
    profile_domain,
    profile_table,
)
from tab2kg.rdf import RDF_TYPE, iri, literal, parse_turtle, serialize_turtle
from tab2kg.tabular import ColumnTyping, TYPE_LEAVES, parse_table

from _synth import SKY_SENSORS_TSV, make_weather_kg


def random_vector(rng: random.Random, typing: ColumnTyping) -> FeatureVector:
    values = [0.0] * FEATURE_COUNT
    for idx in typing.leaf_indices():
        values[idx] = 1.0
    for i in range(16, FEATURE_COUNT):
        values[i] = rng.uniform(-1e6, 1e6)
    return FeatureVector(tuple(values))


def random_typing(rng: random.Random) -> ColumnTyping:
    coarse, tag = rng.choice(TYPE_LEAVES)
    return ColumnTyping(coarse, frozenset({tag}))


def test_export_dataset_node_and_attribute_counts():
    table = parse_table(SKY_SENSORS_TSV)
    graph = export_profile(profile_table(table), "http://x/ds")
    datasets = graph.subjects_with(RDF_TYPE, iri("http://www.w3.org/ns/dcat#Dataset"))
    assert [d.value for d in datasets] == ["http://x/ds"]
    attrs = graph.objects_of(iri("http://x/ds"), TKG + "attribute")
    assert len(attrs) == 4


def test_export_empty_column_list_is_dataset_only():
    graph = export_profile([], "http://x/empty")
    assert len(graph.subjects_with(
        RDF_TYPE, iri("http://www.w3.org/ns/dcat#Dataset"))) == 1
    assert graph.objects_of(iri("http://x/empty"), TKG + "attribute") == []


def test_export_evaluation_node_count():
    # 3 completeness + 10 stats + 10 histogram + 5 quartile + 9 decile = 37
    profile = ColumnProfile(
        column_id="col0",
        typing=ColumnTyping("text", frozenset({"other"})),
        vector=random_vector(random.Random(1), ColumnTyping("text", frozenset({"other"}))),
    )
    graph = export_profile([profile], "http://x/ds")
    attr = graph.objects_of(iri("http://x/ds"), TKG + "attribute")[0]
    evaluations = graph.objects_of(attr, TKG + "evaluation")
    assert len(evaluations) == 37


def test_export_includes_max_evaluation():
    table = parse_table(SKY_SENSORS_TSV)
    graph = export_profile(profile_table(table), "http://x/airdata")
    quartiles = [
        node for node in graph.triples
        if node[1] == RDF_TYPE and node[2] == iri(TKG + "Quartile")
    ]
    # 4 columns x 5 quartile points, rank 5 being the maximum
    assert len(quartiles) == 20


def test_export_deterministic_bytes():
    profile = profile_domain(make_weather_kg())
    first = serialize_turtle(export_profile(profile, "http://x/w"))
    second = serialize_turtle(export_profile(profile, "http://x/w"))
    assert first == second


def test_domain_round_trip_through_turtle():
    profile = profile_domain(make_weather_kg())
    graph = parse_turtle(serialize_turtle(export_profile(profile, "http://x/w")))
    assert import_profile(graph) == profile


def test_table_round_trip_through_turtle():
    profiles = profile_table(parse_table(SKY_SENSORS_TSV))
    graph = parse_turtle(serialize_turtle(export_profile(profiles, "http://x/t")))
    assert import_profile(graph) == profiles


def test_round_trip_random_profiles():
    rng = random.Random(77)
    for trial in range(120):
        typing = random_typing(rng)
        profiles = [
            ColumnProfile(f"col{i}", typing, random_vector(rng, typing))
            for i in range(rng.randint(1, 4))
        ]
        back = import_profile(export_profile(profiles, f"http://x/r{trial}"))
        assert back == profiles


def test_round_trip_random_domain_profiles():
    rng = random.Random(78)
    for trial in range(40):
        relations = {}
        identifying = set()
        datatype_relations = set()
        for i in range(rng.randint(1, 5)):
            typing = random_typing(rng)
            relation = RelationProfile(
                class_iri=f"http://x/C{i}",
                property_iri=f"http://x/p{i}",
                typing=typing,
                vector=random_vector(rng, typing),
                instance_count=rng.randint(0, 50),
            )
            relations[relation.key] = relation
            datatype_relations.add((relation.class_iri, relation.property_iri, typing))
            if rng.random() < 0.4:
                identifying.add(relation.key)
        from tab2kg.rdf import DomainOntology

        ontology = DomainOntology(
            classes=frozenset(c for c, _ in relations) | {"http://x/Lonely"},
            datatype_relations=frozenset(datatype_relations),
            class_relations=frozenset(
                {("http://x/C0", "http://x/rel", "http://x/Lonely")}
                if rng.random() < 0.5 else set()),
        )
        profile = DomainProfile(
            ontology=ontology,
            relation_profiles=relations,
            identifying=frozenset(identifying),
        )
        back = import_profile(export_profile(profile, f"http://x/d{trial}"))
        assert back == profile


def test_import_missing_histogram_rank():
    profiles = profile_table(parse_table("a\tb\n"))
    graph = export_profile(profiles, "http://x/t")
    attr = graph.objects_of(iri("http://x/t"), TKG + "attribute")[0]
    victim = iri(f"{attr.value}/eval/HistogramBucket/7")
    graph.triples = {
        t for t in graph.triples if t[0] != victim and t[2] != victim
    }
    with pytest.raises(MissingFeatureError):
        import_profile(graph)


def test_import_rank_out_of_range():
    profiles = profile_table(parse_table("a\tb\n"))
    graph = export_profile(profiles, "http://x/t")
    attr = graph.objects_of(iri("http://x/t"), TKG + "attribute")[0]
    node = iri(f"{attr.value}/eval/HistogramBucket/7")
    ranks = [t for t in graph.triples if t[0] == node and t[1].endswith("rank")]
    graph.triples -= set(ranks)
    graph.add(node, ranks[0][1], literal("11", datatype="http://www.w3.org/2001/XMLSchema#integer"))
    with pytest.raises(RankOutOfRangeError):
        import_profile(graph)


def test_import_hand_authored_minimal_profile():
    scalar_names = [
        "ValueCount", "NonNullCount", "DistinctCount", "StandardDeviation",
        "Mean", "Skewness", "Kurtosis", "OutlierCount", "AverageCharacterCount",
        "AverageDigitCount", "AverageTokenCount", "AverageCapitalCount",
        "AverageSpecialCharacterCount"]
    lines = [
        "@prefix tkg: <http://tab2kg.org/vocab#> .",
        "@prefix dcat: <http://www.w3.org/ns/dcat#> .",
        "@prefix seas: <https://w3id.org/seas/> .",
        "<http://x/h> a dcat:Dataset ; tkg:profileKind \"table\" ; "
        "tkg:attribute <http://x/h/a0> .",
        "<http://x/h/a0> a tkg:Attribute ; tkg:index 0 ; tkg:columnId \"age\" ; "
        "tkg:coarseType \"numeric\" ; tkg:dataType tkg:NumericInteger .",
    ]
    for i, name in enumerate(scalar_names):
        lines.append(f"<http://x/h/a0> tkg:evaluation <http://x/h/a0/e{name}> .")
        lines.append(f"<http://x/h/a0/e{name}> a tkg:{name} ; tkg:value {float(i)} .")
    for name, count in (("HistogramBucket", 10), ("Quartile", 5), ("Decile", 9)):
        for rank in range(1, count + 1):
            node = f"<http://x/h/a0/e{name}{rank}>"
            lines.append(f"<http://x/h/a0> tkg:evaluation {node} .")
            lines.append(f"{node} a tkg:{name} ; seas:rank {rank} ; tkg:value 0.5 .")
    profiles = import_profile(parse_turtle("\n".join(lines)))
    assert len(profiles) == 1
    assert profiles[0].column_id == "age"
    assert profiles[0].vector[20] == 4.0  # declared Mean slot value
    assert profiles[0].typing == ColumnTyping("numeric", frozenset({"integer"}))
