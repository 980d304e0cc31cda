"""RML emission and materialization for data graph plans.

The supported RML subset is exactly what :func:`emit_rml` produces: one
logical source with a csvw dialect, one triples map per class with a
class+template subject map, reference-valued predicate-object maps for
column mappings and template-valued ones for class relations. Triples maps
link through template equality rather than rr:parentTriplesMap.
"""

from __future__ import annotations

import logging
import re
from urllib.parse import quote

from .errors import UnknownColumnReferenceError
from .graphgen import DataGraphPlan
from .rdf import RDF_TYPE, RdfGraph, Term, blank, iri, literal
from .tabular import DataTable, Dialect, ROW_NUMBER_COLUMN

logger = logging.getLogger(__name__)

RR = "http://www.w3.org/ns/r2rml#"
RML = "http://semweb.mmlab.be/ns/rml#"
QL = "http://semweb.mmlab.be/ns/ql#"
CSVW = "http://www.w3.org/ns/csvw#"
XSD = "http://www.w3.org/2001/XMLSchema#"

DEFAULT_MAPPING_BASE = "http://example.com/resource/"

_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")


def _local_name(iri_value: str) -> str:
    for sep in ("#", "/"):
        if sep in iri_value:
            tail = iri_value.rstrip(sep).rsplit(sep, 1)[-1]
            if tail:
                return tail
    return iri_value


def subject_template(class_iri: str, identifier: str, entity_base: str) -> str:
    return f"{entity_base}{_local_name(class_iri)}{{{identifier}}}"


def emit_rml(
    plan: DataGraphPlan,
    table: DataTable,
    dialect: Dialect = Dialect(),
    entity_base: str = DEFAULT_MAPPING_BASE,
    mapping_base: str = DEFAULT_MAPPING_BASE,
) -> RdfGraph:
    """Render a plan as an RML mapping graph.

    Emission steps: (1) source and dialect description, (2) a triples map
    with class and URI template per plan class, (3) a reference
    predicate-object map per column mapping, (4) a template predicate-object
    map per class relation, pointing at the object class's subject pattern.
    """
    graph = RdfGraph()
    graph.bind("rr", RR)
    graph.bind("rml", RML)
    graph.bind("csvw", CSVW)
    graph.bind("ex", mapping_base)

    source = iri(mapping_base + "File")
    file_source = iri(mapping_base + "FileSource")
    graph.add(source, RDF_TYPE, iri(RML + "source"))
    graph.add(source, RML + "source", file_source)
    graph.add(source, RML + "referenceFormulation", iri(QL + "CSV"))
    graph.add(file_source, RDF_TYPE, iri(CSVW + "Table"))
    graph.add(file_source, CSVW + "url", literal(table.source_name))
    dialect_node = blank("dialect")
    graph.add(file_source, CSVW + "dialect", dialect_node)
    graph.add(dialect_node, RDF_TYPE, iri(CSVW + "Dialect"))
    graph.add(dialect_node, CSVW + "delimiter", literal(dialect.delimiter))
    graph.add(dialect_node, CSVW + "header",
              literal("true" if dialect.has_header else "false",
                      datatype=XSD + "boolean"))

    templates = {
        cls: subject_template(cls, identifier, entity_base)
        for cls, identifier in plan.identifier_sources.items()
    }

    node_count = 0
    for index, cls in enumerate(sorted(templates)):
        triples_map = iri(f"{mapping_base}Mapping{index}")
        graph.add(triples_map, RDF_TYPE, iri(RR + "TriplesMap"))
        graph.add(triples_map, RML + "logicalSource", source)
        subject_map = blank(f"sm{index}")
        graph.add(triples_map, RR + "subjectMap", subject_map)
        graph.add(subject_map, RR + "class", iri(cls))
        graph.add(subject_map, RR + "template", literal(templates[cls]))

        for col, (c, prop) in sorted(plan.column_mappings.items()):
            if c != cls:
                continue
            pom = blank(f"pom{node_count}")
            om = blank(f"om{node_count}")
            node_count += 1
            graph.add(triples_map, RR + "predicateObjectMap", pom)
            graph.add(pom, RR + "predicate", iri(prop))
            graph.add(pom, RR + "objectMap", om)
            graph.add(om, RML + "reference", literal(col))

        for s, prop, o in sorted(plan.class_relations):
            if s != cls:
                continue
            pom = blank(f"pom{node_count}")
            om = blank(f"om{node_count}")
            node_count += 1
            graph.add(triples_map, RR + "predicateObjectMap", pom)
            graph.add(pom, RR + "predicate", iri(prop))
            graph.add(pom, RR + "objectMap", om)
            graph.add(om, RR + "template", literal(templates[o]))
    return graph


# --- materialization ------------------------------------------------------------


def _one(graph: RdfGraph, subject: Term, predicate: str) -> Term | None:
    objects = graph.objects_of(subject, predicate)
    return objects[0] if objects else None


def _fill_template(template: str, row: dict[str, str | None]) -> str | None:
    """Substitute {column} placeholders with percent-encoded cell values.

    Returns None when any referenced cell is null (the caller skips the
    triple and records a warning).
    """
    result = []
    last = 0
    for match in _PLACEHOLDER.finditer(template):
        name = match.group(1)
        if name not in row:
            raise UnknownColumnReferenceError(
                f"template references unknown column {name!r}")
        value = row[name]
        if value is None:
            return None
        result.append(template[last:match.start()])
        result.append(quote(value, safe=""))
        last = match.end()
    result.append(template[last:])
    return "".join(result)


def materialize(rml: RdfGraph, table: DataTable) -> RdfGraph:
    """Run an emitted RML mapping against a table, producing the data graph.

    Per row: subject URIs are instantiated from templates, rdf:type triples
    emitted, literal triples added for non-null referenced cells, and
    linking triples added from template-valued object maps. Rows whose
    identifier cell is null are skipped for that class with a warning.
    """
    out = RdfGraph()
    triples_maps = rml.subjects_with(RDF_TYPE, iri(RR + "TriplesMap"))
    parsed_maps = []
    for tm in triples_maps:
        subject_map = _one(rml, tm, RR + "subjectMap")
        if subject_map is None:
            continue
        cls = _one(rml, subject_map, RR + "class")
        template = _one(rml, subject_map, RR + "template")
        poms = []
        for pom in rml.objects_of(tm, RR + "predicateObjectMap"):
            predicate = _one(rml, pom, RR + "predicate")
            om = _one(rml, pom, RR + "objectMap")
            if predicate is None or om is None:
                continue
            reference = _one(rml, om, RML + "reference")
            obj_template = _one(rml, om, RR + "template")
            poms.append((predicate.value,
                         reference.value if reference else None,
                         obj_template.value if obj_template else None))
        parsed_maps.append((cls.value if cls else None,
                            template.value if template else None,
                            poms))

    known = set(table.column_ids) | {ROW_NUMBER_COLUMN}
    for cls, template, poms in parsed_maps:
        if template:
            for name in _PLACEHOLDER.findall(template):
                if name not in known:
                    raise UnknownColumnReferenceError(
                        f"subject template references unknown column {name!r}")

    for m, row_cells in enumerate(table.rows()):
        row = dict(zip(table.column_ids, row_cells))
        row[ROW_NUMBER_COLUMN] = table.row_ids[m]
        for cls, template, poms in parsed_maps:
            if template is None:
                continue
            subject_uri = _fill_template(template, row)
            if subject_uri is None:
                logger.warning(
                    "row %s: null identifier for %s, row skipped for this class",
                    table.row_ids[m], cls)
                continue
            subject = iri(subject_uri)
            if cls:
                out.add(subject, RDF_TYPE, iri(cls))
            for predicate, reference, obj_template in poms:
                if reference is not None:
                    if reference not in row:
                        raise UnknownColumnReferenceError(
                            f"reference to unknown column {reference!r}")
                    value = row[reference]
                    if value is None:
                        continue
                    out.add(subject, predicate, literal(value))
                elif obj_template is not None:
                    target = _fill_template(obj_template, row)
                    if target is None:
                        logger.warning(
                            "row %s: null value in object template, triple skipped",
                            table.row_ids[m])
                        continue
                    out.add(subject, predicate, iri(target))
    return out
