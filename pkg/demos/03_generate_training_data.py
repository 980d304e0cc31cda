"""Create labeled training data from plain knowledge graphs.

Each graph is split into two disjoint halves; the first half provides the
domain profile, the second is walked through small tree templates and
flattened into tables whose column-to-relation mapping is known. Every
(relation, column) combination becomes a labeled pair.
"""

from tab2kg.datagen import (
    GenConfig,
    make_instances,
    make_training_pairs,
    split_kg,
)
from tab2kg.rdf import RDF_TYPE

from _common import make_random_kg, shorten

graph = make_random_kg(3)
g1, g2 = split_kg(graph, GenConfig(seed=1))


def entity_count(g):
    return len({s for s, p, o in g.triples if p == RDF_TYPE})


print(f"input graph: {entity_count(graph)} entities, {len(graph)} triples")
print(f"split -> domain half {entity_count(g1)} entities, "
      f"table half {entity_count(g2)} entities (disjoint)")

instances = make_instances([make_random_kg(s) for s in range(6)], GenConfig(seed=7))
print(f"\n{len(instances)} training instances from 6 graphs")
example = instances[0]
print(f"example instance {example.name}: "
      f"{example.table.row_count} rows x {example.table.column_count} columns")
for col, (cls, prop) in sorted(example.ground_truth.items()):
    print(f"  {col} -> {shorten(cls)}.{shorten(prop)}")

pairs = make_training_pairs(instances)
positives = sum(p.label == 1.0 for p in pairs)
print(f"\nlabeled pairs: {len(pairs)} total, {positives} positive, "
      f"{len(pairs) - positives} negative")
