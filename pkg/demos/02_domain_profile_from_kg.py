"""Turn a knowledge graph into a reusable domain profile.

The ontology (classes, data type relations, class relations) is read off the
instance triples; each data type relation gets a statistics vector. The
profile is then exported as a semantic profile Turtle document extending
DCAT: once exported, the original graph is no longer needed for table
interpretation.
"""

from tab2kg import export_profile, extract_ontology, profile_domain, serialize_turtle

from _common import make_weather_kg, shorten

kg = make_weather_kg()
print(f"weather knowledge graph: {len(kg)} triples")

ontology = extract_ontology(kg)
print(f"\nclasses: {sorted(shorten(c) for c in ontology.classes)}")
print("class relations:")
for s, p, o in sorted(ontology.class_relations):
    print(f"  {shorten(s)} --{shorten(p)}--> {shorten(o)}")

profile = profile_domain(kg)
print("\ndata type relation profiles:")
for key, relation in sorted(profile.relation_profiles.items()):
    marker = " (identifying)" if key in profile.identifying else ""
    print(f"  {shorten(key[0])}.{shorten(key[1])}: "
          f"{relation.typing.coarse}, {relation.instance_count} instances{marker}")

document = serialize_turtle(export_profile(profile, "http://example.org/weather"))
print(f"\nsemantic profile document ({len(document.splitlines())} lines), excerpt:")
for line in document.decode().splitlines()[:14]:
    print(f"  {line}")
