"""Minimal RDF data model with a deterministic Turtle subset parser/serializer.

The supported Turtle subset covers prefix directives, ``a``/``rdf:type``,
IRIs, prefixed names, plain/typed/language literals, numeric and boolean
shorthand, predicate and object lists, and blank nodes (labelled and
anonymous). Collections and reification are out of scope.

Graphs are immutable once built by convention: all read operations are
thread-safe, and serialization is byte-deterministic for equal triple sets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    NoTypedEntitiesError,
    TurtleSyntaxError,
    UnknownPrefixError,
    UnknownRelationError,
)
from .tabular import ColumnTyping, identify_types

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
XSD = "http://www.w3.org/2001/XMLSchema#"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"


@dataclass(frozen=True)
class Term:
    """An RDF term: IRI, literal or blank node."""

    kind: str  # "iri" | "literal" | "blank"
    value: str
    datatype: str | None = None
    language: str | None = None

    def sort_key(self):
        rank = {"iri": 0, "blank": 1, "literal": 2}[self.kind]
        return (rank, self.value, self.datatype or "", self.language or "")


def iri(value: str) -> Term:
    return Term("iri", value)


def literal(value: str, datatype: str | None = None, language: str | None = None) -> Term:
    return Term("literal", value, datatype, language)


def blank(label: str) -> Term:
    return Term("blank", label)


Triple = tuple[Term, str, Term]


@dataclass
class RdfGraph:
    """A set of triples plus prefix declarations.

    Equality compares triple sets only; prefixes are presentation data.
    """

    triples: set[Triple] = field(default_factory=set)
    prefixes: dict[str, str] = field(default_factory=dict)

    def add(self, subject: Term, predicate: str, obj: Term) -> None:
        if subject.kind == "literal":
            raise ValueError("triple subject cannot be a literal")
        self.triples.add((subject, predicate, obj))

    def bind(self, prefix: str, namespace: str) -> None:
        self.prefixes[prefix] = namespace

    def subjects_with(self, predicate: str, obj: Term) -> list[Term]:
        return sorted(
            (s for s, p, o in self.triples if p == predicate and o == obj),
            key=Term.sort_key,
        )

    def objects_of(self, subject: Term, predicate: str) -> list[Term]:
        return sorted(
            (o for s, p, o in self.triples if s == subject and p == predicate),
            key=Term.sort_key,
        )

    def __len__(self) -> int:
        return len(self.triples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RdfGraph):
            return NotImplemented
        return self.triples == other.triples

    def __hash__(self):  # graphs are set-like containers, not hashable
        raise TypeError("RdfGraph is unhashable")


# --- tokenizer ---------------------------------------------------------------

_TOKEN_SPEC = [
    ("WS", re.compile(r"[ \t\r\n]+")),
    ("COMMENT", re.compile(r"#[^\n]*")),
    ("PREFIX_DIR", re.compile(r"@prefix\b|PREFIX\b")),
    ("IRIREF", re.compile(r"<([^<>\"{}|^`\\\x00-\x20]*)>")),
    ("STRING", re.compile(r'"((?:[^"\\\n]|\\.)*)"')),
    ("BLANK", re.compile(r"_:([A-Za-z_][A-Za-z0-9_\-]*)")),
    ("DTSEP", re.compile(r"\^\^")),
    ("LANGTAG", re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")),
    ("NUMBER", re.compile(r"[+-]?(?:\d+\.\d+|\.\d+|\d+)(?:[eE][+-]?\d+)?")),
    ("PUNCT", re.compile(r"[.;,\[\]]")),
    ("PNAME", re.compile(r"([A-Za-z_][A-Za-z0-9_\-]*)?:([A-Za-z0-9_\-.%]*)")),
    ("KEYWORD", re.compile(r"a\b|true\b|false\b")),
]


@dataclass(frozen=True)
class _Token:
    kind: str
    value: tuple
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        for kind, pattern in _TOKEN_SPEC:
            match = pattern.match(text, pos)
            if not match:
                continue
            lexeme = match.group(0)
            if kind == "PNAME":
                local = match.group(2)
                trimmed = len(local) - len(local.rstrip("."))
                if trimmed:  # trailing dots terminate the statement instead
                    lexeme = lexeme[:-trimmed]
                    local = local[:-trimmed]
                tokens_value = (match.group(1) or "", local)
            elif kind in ("IRIREF", "STRING", "BLANK", "LANGTAG"):
                tokens_value = (match.group(1),)
            else:
                tokens_value = (lexeme,)
            if kind not in ("WS", "COMMENT"):
                tokens.append(_Token(kind, tokens_value, line, col))
            newlines = lexeme.count("\n")
            if newlines:
                line += newlines
                col = len(lexeme) - lexeme.rfind("\n")
            else:
                col += len(lexeme)
            pos += len(lexeme)
            break
        else:
            raise TurtleSyntaxError(f"unexpected character {text[pos]!r}", line, col)
    return tokens


_STRING_ESCAPES = {
    "t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f",
    '"': '"', "\\": "\\", "'": "'",
}


def _unescape(raw: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        esc = raw[i + 1]
        if esc in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[esc])
            i += 2
        elif esc == "u":
            out.append(chr(int(raw[i + 2:i + 6], 16)))
            i += 6
        elif esc == "U":
            out.append(chr(int(raw[i + 2:i + 10], 16)))
            i += 10
        else:
            raise TurtleSyntaxError(f"bad escape \\{esc}", line, col)
    return "".join(out)


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.graph = RdfGraph()
        used = {t.value[0] for t in tokens if t.kind == "BLANK"}
        self._anon = _label_allocator(used)

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expected: str | None = None) -> _Token:
        token = self._peek()
        if token is None:
            last = self.tokens[-1] if self.tokens else _Token("", (), 1, 1)
            raise TurtleSyntaxError("unexpected end of input", last.line, last.column)
        if expected and not (token.kind == "PUNCT" and token.value[0] == expected):
            raise TurtleSyntaxError(
                f"expected {expected!r}, found {token.value[0]!r}",
                token.line, token.column)
        self.pos += 1
        return token

    def parse(self) -> RdfGraph:
        while self._peek() is not None:
            token = self._peek()
            if token.kind == "PREFIX_DIR":
                self._directive()
            else:
                self._triples()
        return self.graph

    def _directive(self):
        directive = self._next()
        name = self._next()
        if name.kind != "PNAME" or name.value[1] != "":
            raise TurtleSyntaxError("expected prefix name", name.line, name.column)
        target = self._next()
        if target.kind != "IRIREF":
            raise TurtleSyntaxError("expected namespace IRI", target.line, target.column)
        self.graph.bind(name.value[0], target.value[0])
        if directive.value[0] == "@prefix":
            self._next(".")

    def _triples(self):
        subject = self._node(allow_literal=False)
        self._predicate_object_list(subject)
        self._next(".")

    def _predicate_object_list(self, subject: Term):
        while True:
            predicate = self._verb()
            while True:
                obj = self._node(allow_literal=True)
                self.graph.add(subject, predicate, obj)
                token = self._peek()
                if token and token.kind == "PUNCT" and token.value[0] == ",":
                    self._next()
                    continue
                break
            token = self._peek()
            if token and token.kind == "PUNCT" and token.value[0] == ";":
                self._next()
                nxt = self._peek()
                # allow a dangling ';' before '.' or ']'
                if nxt and nxt.kind == "PUNCT" and nxt.value[0] in ".]":
                    return
                continue
            return

    def _verb(self) -> str:
        token = self._next()
        if token.kind == "KEYWORD" and token.value[0] == "a":
            return RDF_TYPE
        if token.kind == "IRIREF":
            return token.value[0]
        if token.kind == "PNAME":
            return self._expand(token)
        raise TurtleSyntaxError("expected predicate", token.line, token.column)

    def _expand(self, token: _Token) -> str:
        prefix, local = token.value
        if prefix not in self.graph.prefixes:
            raise UnknownPrefixError(f"prefix {prefix!r}: undeclared "
                                     f"(line {token.line})")
        return self.graph.prefixes[prefix] + local

    def _node(self, allow_literal: bool) -> Term:
        token = self._next()
        if token.kind == "IRIREF":
            return iri(token.value[0])
        if token.kind == "PNAME":
            return iri(self._expand(token))
        if token.kind == "BLANK":
            return blank(token.value[0])
        if token.kind == "PUNCT" and token.value[0] == "[":
            node = blank(next(self._anon))
            nxt = self._peek()
            if not (nxt and nxt.kind == "PUNCT" and nxt.value[0] == "]"):
                self._predicate_object_list(node)
            self._next("]")
            return node
        if not allow_literal:
            raise TurtleSyntaxError("expected subject node", token.line, token.column)
        if token.kind == "STRING":
            value = _unescape(token.value[0], token.line, token.column)
            nxt = self._peek()
            if nxt and nxt.kind == "LANGTAG":
                self._next()
                return literal(value, language=nxt.value[0])
            if nxt and nxt.kind == "DTSEP":
                self._next()
                dt = self._next()
                if dt.kind == "IRIREF":
                    return literal(value, datatype=dt.value[0])
                if dt.kind == "PNAME":
                    return literal(value, datatype=self._expand(dt))
                raise TurtleSyntaxError("expected datatype IRI", dt.line, dt.column)
            return literal(value)
        if token.kind == "NUMBER":
            lexeme = token.value[0]
            if "e" in lexeme or "E" in lexeme:
                return literal(lexeme, datatype=XSD + "double")
            if "." in lexeme:
                return literal(lexeme, datatype=XSD + "decimal")
            return literal(lexeme, datatype=XSD + "integer")
        if token.kind == "KEYWORD" and token.value[0] in ("true", "false"):
            return literal(token.value[0], datatype=XSD + "boolean")
        raise TurtleSyntaxError("expected node", token.line, token.column)


def _label_allocator(used: set[str]):
    counter = 0
    while True:
        label = f"b{counter}"
        counter += 1
        if label not in used:
            yield label


def parse_turtle(data: bytes | str) -> RdfGraph:
    """Parse a Turtle document (supported subset) into a graph."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    return _Parser(_tokenize(text)).parse()


# --- serialization -----------------------------------------------------------

_SAFE_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$|^$")


def _render_iri(value: str, prefixes: dict[str, str]) -> str:
    best = None
    for prefix, ns in prefixes.items():
        if value.startswith(ns) and len(ns) > (len(prefixes[best[0]]) if best else 0):
            local = value[len(ns):]
            if _SAFE_LOCAL.match(local):
                best = (prefix, local)
    if best is not None:
        return f"{best[0]}:{best[1]}"
    return f"<{value}>"


def _render_literal(term: Term, prefixes: dict[str, str]) -> str:
    escaped = (term.value.replace("\\", "\\\\").replace('"', '\\"')
               .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t"))
    rendered = f'"{escaped}"'
    if term.language:
        return f"{rendered}@{term.language}"
    if term.datatype:
        return f"{rendered}^^{_render_iri(term.datatype, prefixes)}"
    return rendered


def _render(term: Term, prefixes: dict[str, str]) -> str:
    if term.kind == "iri":
        return _render_iri(term.value, prefixes)
    if term.kind == "blank":
        return f"_:{term.value}"
    return _render_literal(term, prefixes)


def serialize_turtle(graph: RdfGraph) -> bytes:
    """Serialize deterministically: sorted prefixes, subjects, predicates.

    Re-parsing the output yields an equal triple set. rdf:type is rendered
    as ``a`` and always emitted first for each subject.
    """
    prefixes = dict(graph.prefixes)
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(prefixes.items())]
    by_subject: dict[Term, dict[str, list[Term]]] = {}
    for s, p, o in graph.triples:
        by_subject.setdefault(s, {}).setdefault(p, []).append(o)
    if lines and by_subject:
        lines.append("")
    for subject in sorted(by_subject, key=Term.sort_key):
        preds = by_subject[subject]
        ordered = sorted(preds, key=lambda p: (p != RDF_TYPE, p))
        body = []
        for predicate in ordered:
            rendered_p = "a" if predicate == RDF_TYPE else _render_iri(predicate, prefixes)
            objects = ", ".join(
                _render(o, prefixes)
                for o in sorted(preds[predicate], key=Term.sort_key))
            body.append(f"{rendered_p} {objects}")
        lines.append(f"{_render(subject, prefixes)} " + " ;\n  ".join(body) + " .")
    text = "\n".join(lines)
    if text:
        text += "\n"
    return text.encode("utf-8")


# --- domain ontology extraction ------------------------------------------------


@dataclass(frozen=True)
class DomainOntology:
    """Classes, data type relations and class relations of a knowledge graph."""

    classes: frozenset[str]
    datatype_relations: frozenset[tuple[str, str, ColumnTyping]]
    class_relations: frozenset[tuple[str, str, str]]

    def datatype_relation_map(self) -> dict[tuple[str, str], ColumnTyping]:
        return {(c, p): t for c, p, t in self.datatype_relations}

    def relation_keys(self) -> list[tuple[str, str]]:
        return sorted((c, p) for c, p, _ in self.datatype_relations)


def _entity_types(graph: RdfGraph) -> dict[Term, list[str]]:
    types: dict[Term, set[str]] = {}
    for s, p, o in graph.triples:
        if p == RDF_TYPE and o.kind == "iri" and s.kind in ("iri", "blank"):
            types.setdefault(s, set()).add(o.value)
    return {e: sorted(cs) for e, cs in types.items()}


def extract_ontology(graph: RdfGraph) -> DomainOntology:
    """Derive the domain ontology from the instance triples of a graph.

    Classes are the objects of rdf:type. A literal triple on a typed entity
    yields a data type relation per class of that entity, typed by pooling
    the lexical forms of all matching literals. Entity-to-entity triples
    between typed entities yield class relations (once per class pair).
    """
    types = _entity_types(graph)
    if not types:
        raise NoTypedEntitiesError("graph has no rdf:type statements")
    classes = set()
    for cs in types.values():
        classes.update(cs)
    pooled: dict[tuple[str, str], list[str]] = {}
    class_relations: set[tuple[str, str, str]] = set()
    for s, p, o in sorted(graph.triples, key=lambda t: (t[0].sort_key(), t[1], t[2].sort_key())):
        if p == RDF_TYPE or s not in types:
            continue
        if o.kind == "literal":
            for c in types[s]:
                pooled.setdefault((c, p), []).append(o.value)
        elif o in types:
            for c in types[s]:
                for c2 in types[o]:
                    class_relations.add((c, p, c2))
    datatype_relations = frozenset(
        (c, p, identify_types(values)) for (c, p), values in pooled.items()
    )
    return DomainOntology(
        classes=frozenset(classes),
        datatype_relations=datatype_relations,
        class_relations=frozenset(class_relations),
    )


def literals_of_relation(graph: RdfGraph, relation: tuple[str, str]) -> list[str]:
    """All lexical forms reached by (class, property), sorted."""
    class_iri, prop = relation
    types = _entity_types(graph)
    values = [
        o.value
        for s, p, o in graph.triples
        if p == prop and o.kind == "literal" and class_iri in types.get(s, ())
    ]
    if not values:
        raise UnknownRelationError(f"no literals for ({class_iri}, {prop})")
    return sorted(values)


def class_instance_counts(graph: RdfGraph) -> dict[str, int]:
    """Number of typed instances per class."""
    counts: dict[str, int] = {}
    for cs in _entity_types(graph).values():
        for c in cs:
            counts[c] = counts.get(c, 0) + 1
    return counts
