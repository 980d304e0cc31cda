"""Profile a delimited table: data types plus the 53-feature column vectors.

The example table is the weather-sensor file used throughout: no header,
tab-separated, with a text column, two time columns and a sensor label
column.
"""

from tab2kg import parse_table
from tab2kg.profiler import (
    HISTOGRAM,
    IDX_DISTINCT_COUNT,
    IDX_MEAN,
    IDX_NON_NULL_COUNT,
    IDX_STD_DEV,
    QUARTILES,
    profile_table,
)

from _common import SKY_SENSORS_TSV

table = parse_table(SKY_SENSORS_TSV, source_name="sky_sensors.tsv")
print(f"parsed {table.row_count} rows x {table.column_count} columns; "
      f"column ids: {', '.join(table.column_ids)}")

for profile in profile_table(table):
    vec = profile.vector
    print(f"\n{profile.column_id}: {profile.typing.coarse} "
          f"({', '.join(sorted(profile.typing.fine))})")
    print(f"  non-null {vec[IDX_NON_NULL_COUNT]:.0f}, "
          f"distinct {vec[IDX_DISTINCT_COUNT]:.0f}")
    print(f"  mean {vec[IDX_MEAN]:.2f}, std {vec[IDX_STD_DEV]:.2f} "
          "(text columns use character lengths, time columns use seconds)")
    print(f"  quartiles {[round(v, 1) for v in vec.values[QUARTILES]]}")
    print(f"  histogram {[int(v) for v in vec.values[HISTOGRAM]]}")
