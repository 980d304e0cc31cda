"""Train the one-shot column mapping model and inspect its scores.

The Siamese network never sees the weather domain during training, yet its
similarity scores transfer to it: that is the one-shot setting. Profiles are
normalized jointly per pair, encoded with shared weights, and compared via
the absolute encoding difference.
"""

from tab2kg import parse_table, score_pair
from tab2kg.profiler import profile_domain, profile_table

from _common import SKY_SENSORS_TSV, make_weather_kg, shorten, train_demo_model

print("training on a synthetic corpus (seeded, deterministic):")
result = train_demo_model()
model = result.model

print("\nscores against the unseen weather domain:")
domain = profile_domain(make_weather_kg())
columns = profile_table(parse_table(SKY_SENSORS_TSV))
for column in columns:
    scored = []
    for key, relation in sorted(domain.relation_profiles.items()):
        if relation.typing.coarse != column.typing.coarse:
            continue  # only same-type pairs are candidates
        scored.append((score_pair(column.vector, relation.vector, model), key))
    scored.sort(reverse=True)
    ranking = ", ".join(
        f"{shorten(c)}.{shorten(p)}={s:.3f}" for s, (c, p) in scored)
    print(f"  {column.column_id} ({column.typing.coarse}): {ranking}")
