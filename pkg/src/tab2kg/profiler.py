"""Statistical profiles for table columns and ontology data type relations.

Every profile is a fixed 53-slot feature vector. The layout is a versioned
public contract (serialized models depend on it):

====== ======================================================================
index  feature
====== ======================================================================
0-15   binary data type flags, one per taxonomy leaf in ``tabular.TYPE_LEAVES``
       order
16-18  completeness: value count, non-null count, distinct count
19-28  basic statistics: std-dev, mean, skewness, kurtosis, outlier count,
       avg chars, avg digits, avg tokens, avg capitals, avg special chars
29-38  histogram counts, 10 equal-width buckets in ascending range order
39-43  quartile block: min, q25, q50, q75, max
44-52  deciles d10 .. d90
====== ======================================================================

Numeric statistics are computed on a numeric rendering of the values (text
becomes character length, temporal values become timestamps, spatial values
become lengths/areas). Lexical averages are computed on the raw strings.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import AllNullError, EmptyInputError, UnparseableValueError
from .rdf import (
    DomainOntology,
    RdfGraph,
    class_instance_counts,
    extract_ontology,
    literals_of_relation,
)
from .tabular import (
    ColumnTyping,
    DataTable,
    identify_types,
    linestring_length,
    parse_boolean,
    parse_numeric,
    parse_temporal,
    parse_wkt,
    polygon_area,
    temporal_to_seconds,
)

logger = logging.getLogger(__name__)

FEATURE_COUNT = 53
FEATURE_LAYOUT_VERSION = 1

FLAGS = slice(0, 16)
IDX_VALUE_COUNT = 16
IDX_NON_NULL_COUNT = 17
IDX_DISTINCT_COUNT = 18
IDX_STD_DEV = 19
IDX_MEAN = 20
IDX_SKEWNESS = 21
IDX_KURTOSIS = 22
IDX_OUTLIER_COUNT = 23
IDX_AVG_CHARS = 24
IDX_AVG_DIGITS = 25
IDX_AVG_TOKENS = 26
IDX_AVG_CAPITALS = 27
IDX_AVG_SPECIALS = 28
HISTOGRAM = slice(29, 39)
QUARTILES = slice(39, 44)
DECILES = slice(44, 53)

HISTOGRAM_BUCKETS = 10


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != FEATURE_COUNT:
            raise ValueError(f"expected {FEATURE_COUNT} features, got {len(self.values)}")

    def __getitem__(self, index):
        return self.values[index]


@dataclass(frozen=True)
class ColumnProfile:
    column_id: str
    typing: ColumnTyping
    vector: FeatureVector


@dataclass(frozen=True)
class RelationProfile:
    class_iri: str
    property_iri: str
    typing: ColumnTyping
    vector: FeatureVector
    instance_count: int

    @property
    def key(self) -> tuple[str, str]:
        return (self.class_iri, self.property_iri)


@dataclass(frozen=True)
class DomainProfile:
    """Feature vectors for every data type relation of a domain ontology.

    Carries no entities or literals: once built, the source knowledge graph
    is no longer needed for interpretation.
    """

    ontology: DomainOntology
    relation_profiles: dict[tuple[str, str], RelationProfile]
    identifying: frozenset[tuple[str, str]]


# --- numeric transformation ----------------------------------------------------


def _transform_one(value: str, coarse: str) -> float | None:
    if coarse == "numeric":
        return parse_numeric(value)
    if coarse == "text":
        return float(len(value))
    if coarse == "boolean":
        parsed = parse_boolean(value)
        return None if parsed is None else float(parsed)
    if coarse == "temporal":
        parsed = parse_temporal(value)
        if parsed is None:
            return None
        return temporal_to_seconds(*parsed)
    if coarse == "spatial":
        shape = parse_wkt(value)
        if shape is None:
            return None
        kind, coords = shape
        if kind == "point":
            return 0.0
        if kind == "linestring":
            return linestring_length(coords)
        return polygon_area(coords)
    raise ValueError(f"unknown coarse type {coarse!r}")


def numeric_transform(values: list[str], typing: ColumnTyping) -> list[float]:
    """Render values as numbers according to their coarse type.

    Raises UnparseableValueError if any value contradicts the typing; the
    profiler itself tolerates the <10% unparseable tail by skipping it.
    """
    out = []
    for value in values:
        number = _transform_one(value, typing.coarse)
        if number is None:
            raise UnparseableValueError(
                f"{value!r} cannot be read as {typing.coarse}")
        out.append(number)
    return out


def _transform_lenient(values: list[str], coarse: str) -> list[float]:
    numbers = (_transform_one(v, coarse) for v in values)
    return [n for n in numbers if n is not None]


# --- basic statistics -----------------------------------------------------------


def _interpolated_quantile(ordered: list[float], p: float) -> float:
    h = (len(ordered) - 1) * p
    lo = math.floor(h)
    hi = math.ceil(h)
    return ordered[lo] + (h - lo) * (ordered[hi] - ordered[lo])


def quantiles(nums: list[float]) -> list[float]:
    """The 14 quantile features: min, q25, q50, q75, max, then d10..d90.

    Linear interpolation between closest ranks on the sorted data.
    """
    if not nums:
        raise EmptyInputError("quantiles need at least one value")
    ordered = sorted(nums)
    points = [0.0, 0.25, 0.5, 0.75, 1.0] + [i / 10 for i in range(1, 10)]
    return [_interpolated_quantile(ordered, p) for p in points]


def iqr_outliers(nums: list[float]) -> tuple[list[float], list[float]]:
    """Split into (outliers, kept) by the 1.5 IQR fence rule."""
    if not nums:
        raise EmptyInputError("outlier detection needs at least one value")
    ordered = sorted(nums)
    q1 = _interpolated_quantile(ordered, 0.25)
    q3 = _interpolated_quantile(ordered, 0.75)
    iqr = q3 - q1
    low, high = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outliers = [x for x in nums if x < low or x > high]
    kept = [x for x in nums if low <= x <= high]
    return outliers, kept


def histogram(nums: list[float], buckets: int = HISTOGRAM_BUCKETS) -> list[int]:
    """Equal-width bucket counts over [min, max]; input is outlier-filtered.

    The maximum falls in the last bucket; a degenerate range puts all mass
    in the last bucket.
    """
    if not nums:
        raise EmptyInputError("histogram needs at least one value")
    lo, hi = min(nums), max(nums)
    counts = [0] * buckets
    if hi == lo:
        counts[-1] = len(nums)
        return counts
    width = hi - lo
    for x in nums:
        idx = int((x - lo) / width * buckets)
        counts[min(idx, buckets - 1)] += 1
    return counts


def _moments(nums: list[float]) -> tuple[float, float, float]:
    n = len(nums)
    mean = sum(nums) / n
    m2 = sum((x - mean) ** 2 for x in nums) / n
    m3 = sum((x - mean) ** 3 for x in nums) / n
    m4 = sum((x - mean) ** 4 for x in nums) / n
    return m2, m3, m4


def basic_stats(nums: list[float]) -> tuple[float, float, float, float]:
    """Population std-dev, mean, skewness g1, excess kurtosis g2.

    Skewness is 0 for n < 3, kurtosis for n < 4; both are 0 when the
    variance vanishes.
    """
    n = len(nums)
    mean = sum(nums) / n
    m2, m3, m4 = _moments(nums)
    std = math.sqrt(m2)
    skew = m3 / m2 ** 1.5 if n >= 3 and m2 > 0 else 0.0
    kurt = m4 / m2 ** 2 - 3.0 if n >= 4 and m2 > 0 else 0.0
    return std, mean, skew, kurt


# --- feature vector -------------------------------------------------------------


def _lexical_averages(present: list[str]) -> tuple[float, float, float, float, float]:
    n = len(present)
    chars = sum(len(v) for v in present) / n
    digits = sum(sum(c.isdigit() for c in v) for v in present) / n
    tokens = sum(len(v.split()) for v in present) / n
    capitals = sum(sum(c.isupper() for c in v) for v in present) / n
    specials = sum(
        sum(not c.isalnum() and not c.isspace() for c in v) for v in present) / n
    return chars, digits, tokens, capitals, specials


def compute_feature_vector(values: list[str | None], typing: ColumnTyping) -> FeatureVector:
    """Fill all 53 slots for one column or relation value list."""
    present = [v for v in values if v is not None]
    if not present:
        raise AllNullError("cannot profile a column without values")

    vec = [0.0] * FEATURE_COUNT
    for idx in typing.leaf_indices():
        vec[idx] = 1.0
    vec[IDX_VALUE_COUNT] = float(len(values))
    vec[IDX_NON_NULL_COUNT] = float(len(present))
    vec[IDX_DISTINCT_COUNT] = float(len(set(present)))

    (vec[IDX_AVG_CHARS], vec[IDX_AVG_DIGITS], vec[IDX_AVG_TOKENS],
     vec[IDX_AVG_CAPITALS], vec[IDX_AVG_SPECIALS]) = _lexical_averages(present)

    nums = _transform_lenient(present, typing.coarse)
    if nums:
        std, mean, skew, kurt = basic_stats(nums)
        vec[IDX_STD_DEV], vec[IDX_MEAN] = std, mean
        vec[IDX_SKEWNESS], vec[IDX_KURTOSIS] = skew, kurt
        outliers, kept = iqr_outliers(nums)
        vec[IDX_OUTLIER_COUNT] = float(len(outliers))
        vec[HISTOGRAM] = [float(c) for c in histogram(kept)]
        vec[QUARTILES.start:DECILES.stop] = quantiles(nums)
    return FeatureVector(tuple(vec))


# --- table and domain profiles ----------------------------------------------------


def profile_table(table: DataTable) -> list[ColumnProfile]:
    """One profile per column; all-null columns are skipped with a warning."""
    profiles = []
    for column in table.columns:
        values = list(column.values)
        try:
            typing = column.typing or identify_types(values)
        except AllNullError:
            logger.warning("column %s is all-null, skipped", column.column_id)
            continue
        profiles.append(ColumnProfile(
            column_id=column.column_id,
            typing=typing,
            vector=compute_feature_vector(values, typing),
        ))
    if not profiles:
        raise AllNullError("no profilable column in table")
    return profiles


def is_identifying(profile: RelationProfile) -> bool:
    """A relation identifies its class when it is present exactly once per
    instance and all its values are distinct."""
    vec = profile.vector
    count = vec[IDX_VALUE_COUNT]
    return (
        count == vec[IDX_NON_NULL_COUNT]
        == vec[IDX_DISTINCT_COUNT]
        == float(profile.instance_count)
    )


def profile_domain(kg: RdfGraph) -> DomainProfile:
    """Profile every data type relation of the knowledge graph.

    The result contains statistics only; no entity or literal survives into
    the profile.
    """
    ontology = extract_ontology(kg)
    instances = class_instance_counts(kg)
    relation_profiles: dict[tuple[str, str], RelationProfile] = {}
    identifying = set()
    for class_iri, prop, typing in sorted(
            ontology.datatype_relations, key=lambda r: (r[0], r[1])):
        values = literals_of_relation(kg, (class_iri, prop))
        profile = RelationProfile(
            class_iri=class_iri,
            property_iri=prop,
            typing=typing,
            vector=compute_feature_vector(list(values), typing),
            instance_count=instances.get(class_iri, 0),
        )
        relation_profiles[profile.key] = profile
        if is_identifying(profile):
            identifying.add(profile.key)
    return DomainProfile(
        ontology=ontology,
        relation_profiles=relation_profiles,
        identifying=frozenset(identifying),
    )
