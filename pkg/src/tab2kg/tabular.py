"""Delimited table parsing, fine-grained column typing and identifier generation.

Tables are plain UTF-8 text with a configurable single-character delimiter
(tab by default). Cells equal to one of the configured null markers are read
as missing values. All functions are pure; parsed tables are not mutated.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .errors import (
    AllNullError,
    EmptyInputError,
    RaggedRowError,
    UnterminatedQuoteError,
)

DEFAULT_NULL_MARKERS = ("", "NULL", "null")

#: Reserved virtual column available to RML templates; holds the row index.
ROW_NUMBER_COLUMN = "rowNumber"

COARSE_TYPES = ("text", "numeric", "boolean", "temporal", "spatial")

# Fine-grained leaf taxonomy. The order is a public contract: feature vectors
# store one binary flag per leaf in exactly this order.
TYPE_LEAVES = (
    ("text", "categorical"),
    ("text", "url"),
    ("text", "email"),
    ("text", "other"),
    ("numeric", "integer"),
    ("numeric", "decimal"),
    ("numeric", "sequential"),
    ("numeric", "categorical"),
    ("numeric", "other"),
    ("boolean", "boolean"),
    ("temporal", "date"),
    ("temporal", "time"),
    ("temporal", "datetime"),
    ("spatial", "point"),
    ("spatial", "linestring"),
    ("spatial", "polygon"),
)

LEAF_INDEX = {leaf: i for i, leaf in enumerate(TYPE_LEAVES)}

CATEGORICAL_MAX_DISTINCT = 20
PARSE_RATIO_THRESHOLD = 0.9


@dataclass(frozen=True)
class Dialect:
    """How a delimited file is tokenized."""

    delimiter: str = "\t"
    has_header: bool = False
    quote_char: str | None = '"'

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError("delimiter must be a single character")
        if self.quote_char is not None and self.delimiter == self.quote_char:
            raise ValueError("delimiter must differ from the quote character")


@dataclass(frozen=True)
class ColumnTyping:
    """Coarse data type plus the set of fine-grained leaf tags."""

    coarse: str
    fine: frozenset[str]

    def __post_init__(self):
        if self.coarse not in COARSE_TYPES:
            raise ValueError(f"unknown coarse type {self.coarse!r}")
        if not self.fine:
            raise ValueError("fine tag set must not be empty")
        for tag in self.fine:
            if (self.coarse, tag) not in LEAF_INDEX:
                raise ValueError(f"tag {tag!r} is not a {self.coarse} leaf")

    def leaf_indices(self) -> list[int]:
        return sorted(LEAF_INDEX[(self.coarse, tag)] for tag in self.fine)


@dataclass(frozen=True)
class Column:
    column_id: str
    values: tuple[str | None, ...]
    typing: ColumnTyping | None = None


@dataclass(frozen=True)
class DataTable:
    """A parsed table: an M x N grid of optional strings."""

    columns: tuple[Column, ...]
    row_count: int
    column_count: int
    row_ids: tuple[str, ...]
    source_name: str = "table"

    @property
    def column_ids(self) -> tuple[str, ...]:
        return tuple(c.column_id for c in self.columns)

    def cell(self, row: int, col: int) -> str | None:
        return self.columns[col].values[row]

    def rows(self):
        for m in range(self.row_count):
            yield tuple(c.values[m] for c in self.columns)


# --- parsing ----------------------------------------------------------------


def _split_records(text: str, dialect: Dialect) -> list[list[str]]:
    """Tokenize into rows of raw cell strings, honoring quoting."""
    records: list[list[str]] = []
    row: list[str] = []
    cell: list[str] = []
    quote = dialect.quote_char
    in_quotes = False
    i, n = 0, len(text)
    saw_any = False
    while i < n:
        ch = text[i]
        if in_quotes:
            if ch == quote:
                if i + 1 < n and text[i + 1] == quote:  # escaped quote
                    cell.append(quote)
                    i += 2
                    continue
                in_quotes = False
                i += 1
                continue
            cell.append(ch)
            i += 1
            continue
        if quote is not None and ch == quote and not cell:
            in_quotes = True
            saw_any = True
            i += 1
            continue
        if ch == dialect.delimiter:
            row.append("".join(cell))
            cell = []
            saw_any = True
            i += 1
            continue
        if ch == "\n" or ch == "\r":
            if ch == "\r" and i + 1 < n and text[i + 1] == "\n":
                i += 1
            row.append("".join(cell))
            records.append(row)
            row, cell = [], []
            i += 1
            continue
        cell.append(ch)
        saw_any = True
        i += 1
    if in_quotes:
        raise UnterminatedQuoteError("quoted cell not terminated before end of input")
    if cell or row or (saw_any and not records):
        row.append("".join(cell))
        records.append(row)
    return records


def parse_table(
    data: bytes | str,
    dialect: Dialect = Dialect(),
    null_markers: tuple[str, ...] = DEFAULT_NULL_MARKERS,
    source_name: str = "table",
) -> DataTable:
    """Parse delimited text into a table with uniform row width.

    Header cells (when ``dialect.has_header``) become column identifiers;
    otherwise columns are named ``col0`` .. ``colN-1``. Cells matching a null
    marker are stored as ``None``.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    records = _split_records(text, dialect)
    records = [r for r in records if not (len(r) == 1 and r[0] == "")]
    if not records:
        raise EmptyInputError("no rows in input")
    width = len(records[0])
    for idx, record in enumerate(records):
        if len(record) != width:
            raise RaggedRowError(idx, width, len(record))

    header: list[str] | None = None
    if dialect.has_header:
        header = records[0]
        records = records[1:]

    nulls = set(null_markers)
    grid = [[(c if c not in nulls else None) for c in r] for r in records]
    row_count = len(grid)
    columns = tuple(
        Column(column_id=f"col{n}", values=tuple(grid[m][n] for m in range(row_count)))
        for n in range(width)
    )
    table = DataTable(
        columns=columns,
        row_count=row_count,
        column_count=width,
        row_ids=tuple(str(m) for m in range(row_count)),
        source_name=source_name,
    )
    return add_identifiers(table, header=header)


# --- identifier generation ---------------------------------------------------

_IDENT_SANITIZE = re.compile(r"[^0-9A-Za-z_]")


def _sanitize_header(name: str, position: int) -> str:
    cleaned = _IDENT_SANITIZE.sub("_", name.strip())
    if not cleaned or not re.search(r"[0-9A-Za-z]", cleaned):
        cleaned = f"col{position}"
    return cleaned


def add_identifiers(table: DataTable, header: list[str] | None = None) -> DataTable:
    """Assign unique column identifiers and dense row identifiers.

    Header names are sanitized to ``[0-9A-Za-z_]``; duplicates get an ``_k``
    suffix. ``rowNumber`` is reserved for the virtual row-index column and is
    disambiguated like a duplicate if a header claims it.
    """
    if header is None:
        names = [f"col{n}" for n in range(table.column_count)]
    else:
        names = [_sanitize_header(h, n) for n, h in enumerate(header)]
    seen: dict[str, int] = {ROW_NUMBER_COLUMN: 1}
    unique: list[str] = []
    for name in names:
        if name not in seen:
            seen[name] = 1
            unique.append(name)
            continue
        k = seen[name] + 1
        while f"{name}_{k}" in seen:
            k += 1
        seen[name] = k
        seen[f"{name}_{k}"] = 1
        unique.append(f"{name}_{k}")
    columns = tuple(
        replace(col, column_id=cid) for col, cid in zip(table.columns, unique)
    )
    return replace(
        table,
        columns=columns,
        row_ids=tuple(str(m) for m in range(table.row_count)),
    )


def serialize_table(table: DataTable, dialect: Dialect = Dialect()) -> str:
    """Inverse of :func:`parse_table` on the cell grid (nulls become '')."""
    quote = dialect.quote_char
    lines = []
    if dialect.has_header:
        lines.append(dialect.delimiter.join(table.column_ids))
    for row in table.rows():
        rendered = []
        for cell in row:
            value = "" if cell is None else cell
            if quote is not None and (
                dialect.delimiter in value or "\n" in value or quote in value
            ):
                value = quote + value.replace(quote, quote * 2) + quote
            rendered.append(value)
        lines.append(dialect.delimiter.join(rendered))
    return "\n".join(lines) + "\n"


# --- value parsers ------------------------------------------------------------

_NUMERIC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_INTEGER_RE = re.compile(r"^[+-]?\d+$")
_URL_RE = re.compile(r"^(https?|ftp)://\S+$", re.IGNORECASE)
_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")

_WKT_RE = re.compile(r"^\s*(POINT|LINESTRING|POLYGON)\s*\((.*)\)\s*$",
                     re.IGNORECASE | re.DOTALL)

_TIME_FORMATS = ("%H:%M", "%H:%M:%S")
_DATE_FORMATS = ("%Y-%m-%d", "%Y/%m/%d", "%d.%m.%Y")
_DATETIME_FORMATS = (
    "%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S",
)


def parse_numeric(value: str) -> float | None:
    if _NUMERIC_RE.match(value.strip()):
        return float(value)
    return None


def parse_boolean(value: str) -> bool | None:
    lowered = value.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    return None


def _parse_coord_list(body: str) -> list[tuple[float, float]] | None:
    points = []
    for chunk in body.split(","):
        parts = chunk.split()
        if len(parts) != 2:
            return None
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            return None
    return points


def parse_wkt(value: str):
    """Parse a WKT POINT/LINESTRING/POLYGON; returns (kind, coordinates)."""
    match = _WKT_RE.match(value)
    if not match:
        return None
    kind = match.group(1).lower()
    body = match.group(2).strip()
    if kind == "point":
        coords = _parse_coord_list(body)
        if coords is None or len(coords) != 1:
            return None
        return "point", coords
    if kind == "linestring":
        coords = _parse_coord_list(body)
        if coords is None or len(coords) < 2:
            return None
        return "linestring", coords
    # polygon: one or more parenthesized rings; only the exterior ring is used
    if not body.startswith("("):
        return None
    depth = 0
    rings: list[str] = []
    start = None
    for i, ch in enumerate(body):
        if ch == "(":
            if depth == 0:
                start = i + 1
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                rings.append(body[start:i])
    if not rings:
        return None
    exterior = _parse_coord_list(rings[0])
    if exterior is None or len(exterior) < 3:
        return None
    return "polygon", exterior


def parse_temporal(value: str):
    """Parse into (form, datetime) with form in {date, time, datetime}."""
    stripped = value.strip()
    for fmt in _TIME_FORMATS:
        try:
            return "time", datetime.strptime(stripped, fmt).replace(
                year=1970, month=1, day=1, tzinfo=timezone.utc)
        except ValueError:
            pass
    for fmt in _DATE_FORMATS:
        try:
            return "date", datetime.strptime(stripped, fmt).replace(tzinfo=timezone.utc)
        except ValueError:
            pass
    candidate = stripped[:-1] if stripped.endswith("Z") else stripped
    for fmt in _DATETIME_FORMATS:
        try:
            return "datetime", datetime.strptime(candidate, fmt).replace(
                tzinfo=timezone.utc)
        except ValueError:
            pass
    return None


# --- data type identification -------------------------------------------------


def _passes_threshold(parsed: int, total: int) -> bool:
    return total > 0 and parsed / total > PARSE_RATIO_THRESHOLD


def identify_types(values: list[str | None]) -> ColumnTyping:
    """Identify the coarse and fine-grained data types of a value list.

    Nulls are excluded from the parse-ratio denominator. Parsers are tried in
    the fixed order numeric, boolean, spatial, temporal; the first one
    accepting more than 90% of the non-null values decides the coarse type,
    with text as the fallback.
    """
    present = [v for v in values if v is not None]
    if not present:
        raise AllNullError("cannot type a column without values")
    total = len(present)

    numerics = [parse_numeric(v) for v in present]
    if _passes_threshold(sum(x is not None for x in numerics), total):
        return ColumnTyping("numeric", _numeric_fine(present))

    booleans = [parse_boolean(v) for v in present]
    if _passes_threshold(sum(x is not None for x in booleans), total):
        return ColumnTyping("boolean", frozenset({"boolean"}))

    shapes = [parse_wkt(v) for v in present]
    if _passes_threshold(sum(x is not None for x in shapes), total):
        kinds = frozenset(s[0] for s in shapes if s is not None)
        return ColumnTyping("spatial", kinds)

    temporals = [parse_temporal(v) for v in present]
    if _passes_threshold(sum(x is not None for x in temporals), total):
        forms = {t[0] for t in temporals if t is not None}
        if forms == {"time"}:
            fine = "time"
        elif forms == {"date"}:
            fine = "date"
        else:
            fine = "datetime"
        return ColumnTyping("temporal", frozenset({fine}))

    return ColumnTyping("text", _text_fine(present))


def _numeric_fine(present: list[str]) -> frozenset[str]:
    parsed = [parse_numeric(v) for v in present]
    parsed = [x for x in parsed if x is not None]
    all_integer = all(_INTEGER_RE.match(v.strip()) for v in present
                      if parse_numeric(v) is not None)
    tags = {"integer" if all_integer else "decimal"}
    distinct = set(parsed)
    if all_integer and _is_sequential([int(x) for x in parsed]):
        tags.add("sequential")
    elif len(distinct) <= CATEGORICAL_MAX_DISTINCT:
        tags.add("categorical")
    else:
        tags.add("other")
    return frozenset(tags)


def _is_sequential(ints: list[int]) -> bool:
    """All distinct and the sorted values step by exactly one."""
    if len(ints) < 2 or len(set(ints)) != len(ints):
        return False
    ordered = sorted(ints)
    return all(b - a == 1 for a, b in zip(ordered, ordered[1:]))


def _text_fine(present: list[str]) -> frozenset[str]:
    tags = set()
    if all(_URL_RE.match(v) for v in present):
        tags.add("url")
    elif all(_EMAIL_RE.match(v) for v in present):
        tags.add("email")
    if len(set(present)) <= CATEGORICAL_MAX_DISTINCT:
        tags.add("categorical")
    if not tags:
        tags.add("other")
    return frozenset(tags)


def type_columns(table: DataTable) -> DataTable:
    """Return a copy of the table with per-column typings filled in.

    All-null columns keep ``typing=None``; downstream profiling skips them.
    """
    columns = []
    for col in table.columns:
        try:
            typing = identify_types(list(col.values))
        except AllNullError:
            typing = None
        columns.append(replace(col, typing=typing))
    return replace(table, columns=tuple(columns))


# --- numeric views of typed values (shared with the profiler) -----------------


def temporal_to_seconds(form: str, moment: datetime) -> float:
    if form == "time":
        return float(moment.hour * 3600 + moment.minute * 60 + moment.second)
    return moment.timestamp()


def linestring_length(coords: list[tuple[float, float]]) -> float:
    return sum(
        math.dist(a, b) for a, b in zip(coords, coords[1:])
    )


def polygon_area(coords: list[tuple[float, float]]) -> float:
    ring = list(coords)
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring = ring[:-1]
    acc = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:] + ring[:1]):
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0
