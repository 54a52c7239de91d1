"""Parse CSV and an RDF subset (N-Triples, Turtle subset) into entity
collections, with schema aliasing onto canonical property names."""

from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .model import Entity, EntityId, Provenance, PropertyValue

log = logging.getLogger(__name__)


class SchemaError(ValueError):
    pass


class RowError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(ValueError):
    def __init__(self, offset: int, message: str):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


@dataclass(frozen=True)
class SchemaMapping:
    """Maps source columns / predicate IRIs to canonical property names and
    assigns value kinds per canonical property."""

    aliases: Mapping[str, str] = field(default_factory=dict)
    type_hints: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for src, dst in self.aliases.items():
            if not dst:
                raise SchemaError(f"alias target for {src!r} is empty")

    def canonical(self, source_key: str) -> str:
        return self.aliases.get(source_key, source_key)

    def kind(self, prop: str) -> str:
        return self.type_hints.get(prop, "text")


@dataclass(frozen=True)
class Dataset:
    id: str
    entities: tuple[Entity, ...]
    source_label: str = ""

    def __post_init__(self):
        ids = [e.id for e in self.entities]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise SchemaError(f"duplicate entity ids in dataset: {dupes[:5]}")

    def by_id(self) -> dict[EntityId, Entity]:
        return {e.id: e for e in self.entities}

    def schema(self) -> set[str]:
        props: set[str] = set()
        for e in self.entities:
            props |= set(e.properties)
        return props


GEO_SENTINEL_SCRUB_DEFAULT = True

# CSV columns holding geopoint halves, merged into one "geo" property
LAT_COLUMN, LON_COLUMN, GEO_PROPERTY = "latitude", "longitude", "geo"


def _decode(stream) -> io.TextIOBase:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    if hasattr(stream, "read"):
        data = stream.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError(f"unsupported stream type: {type(stream)}")


def _make_value(
    kind: str, raw: str, prov: Provenance, where: str
) -> Optional[PropertyValue]:
    raw = raw.strip()
    if not raw:
        return None
    if kind == "number":
        try:
            float(raw.replace(",", "."))
        except ValueError:
            raise ValueError(f"{where}: unparseable number {raw!r}")
    return PropertyValue(kind, raw, provenance=prov)


def parse_csv(
    stream,
    mapping: SchemaMapping,
    id_column: str = "id",
    dataset_id: str = "csv",
    source_label: str = "csv",
    entity_type: str = "Entity",
    scrub_geo_sentinel: bool = GEO_SENTINEL_SCRUB_DEFAULT,
    ingested_at: float = 0.0,
) -> Dataset:
    """One entity per data row; empty cells become absent properties.

    Latitude/longitude columns (post-aliasing) are merged into a single
    geopoint property; a (0,0) point is treated as missing by default.
    """
    text = _decode(stream)
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty input: no header row")
    if id_column not in header:
        raise SchemaError(f"id column {id_column!r} not in header {header}")
    prov = Provenance(source_label, ingested_at)
    canon_header = [mapping.canonical(h) for h in header]
    id_idx = header.index(id_column)

    entities = []
    errors: list[RowError] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            errors.append(RowError(line_no, f"expected {len(header)} columns, got {len(row)}"))
            continue
        eid = row[id_idx].strip()
        if not eid:
            errors.append(RowError(line_no, "empty id"))
            continue
        props: dict[str, list[PropertyValue]] = {}
        halves: dict[str, str] = {}
        bad = False
        for idx, cell in enumerate(row):
            if idx == id_idx:
                continue
            name = canon_header[idx]
            if name in (LAT_COLUMN, LON_COLUMN):
                if cell.strip():
                    halves[name] = cell.strip()
                continue
            try:
                value = _make_value(mapping.kind(name), cell, prov, f"line {line_no}, column {header[idx]}")
            except ValueError as exc:
                errors.append(RowError(line_no, str(exc)))
                bad = True
                break
            if value is not None:
                props.setdefault(name, []).append(value)
        if bad:
            continue
        if LAT_COLUMN in halves and LON_COLUMN in halves:
            try:
                lat = float(halves[LAT_COLUMN].replace(",", "."))
                lon = float(halves[LON_COLUMN].replace(",", "."))
            except ValueError:
                errors.append(RowError(line_no, f"unparseable geopoint {halves}"))
                continue
            if not (scrub_geo_sentinel and lat == 0.0 and lon == 0.0):
                props.setdefault(GEO_PROPERTY, []).append(
                    PropertyValue("geopoint", f"{lat},{lon}", provenance=prov)
                )
        if not props:
            errors.append(RowError(line_no, "row has no property values"))
            continue
        entities.append(
            Entity(eid, entity_type, {k: tuple(v) for k, v in props.items()})
        )
    for err in errors:
        log.warning("parse_csv rejected row: %s", err)
    ds = Dataset(dataset_id, tuple(entities), source_label)
    ds_errors = errors  # exposed for callers that need the rejects
    object.__setattr__(ds, "row_errors", tuple(ds_errors))
    return ds


def write_csv(dataset: Dataset, columns: Sequence[str], id_column: str = "id") -> str:
    """Serialize to CSV; multi-values joined with '|', geopoints split back
    into latitude/longitude columns."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([id_column, *columns])
    for e in dataset.entities:
        row = [e.id]
        for col in columns:
            if col == LAT_COLUMN:
                geo = e.values(GEO_PROPERTY)
                row.append(str(geo[0].geopoint[0]) if geo else "")
            elif col == LON_COLUMN:
                geo = e.values(GEO_PROPERTY)
                row.append(str(geo[0].geopoint[1]) if geo else "")
            else:
                row.append("|".join(v.raw for v in e.values(col)))
        writer.writerow(row)
    return out.getvalue()


# ---------------------------------------------------------------------------
# RDF (N-Triples + Turtle subset)

_IRI = re.compile(r"<([^>]*)>")
_PREFIXED = re.compile(r"([A-Za-z][\w.-]*)?:([\w.-]+)")
_LITERAL = re.compile(r'"((?:[^"\\]|\\.)*)"(?:\^\^<[^>]*>|\^\^[\w.-]*:[\w.-]+|@[\w-]+)?')

_NT_TRIPLE = re.compile(
    r'^\s*(<[^>]*>|_:[\w-]+)\s+<([^>]*)>\s+(<[^>]*>|_:[\w-]+|"(?:[^"\\]|\\.)*"(?:\^\^<[^>]*>|@[\w-]+)?)\s*\.\s*$'
)


def _unescape(s: str) -> str:
    return s.encode("utf-8").decode("unicode_escape").encode("latin-1", "backslashreplace").decode("utf-8")


def _literal_text(tok: str) -> Optional[str]:
    m = _LITERAL.match(tok)
    if not m:
        return None
    return _unescape(m.group(1))


def _parse_ntriples(text: str) -> list[tuple[str, str, str]]:
    triples = []
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            m = _NT_TRIPLE.match(stripped)
            if not m:
                raise ParseError(offset, f"malformed N-Triples line: {stripped[:80]!r}")
            triples.append((m.group(1), m.group(2), m.group(3)))
        offset += len(line)
    return triples


class _TurtleParser:
    """A deliberately small Turtle reader: @prefix declarations, simple
    triples, predicate-object lists (';' and ','), literals with optional
    datatype/lang, IRIs and prefixed names. No collections, no nested
    blank-node syntax."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[tuple[str, str, str]] = []

    def error(self, msg: str):
        raise ParseError(self.pos, msg)

    def skip_ws(self):
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl + 1
            elif c.isspace():
                self.pos += 1
            else:
                break

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            self.error(f"expected {token!r}")
        self.pos += len(token)

    def term(self) -> str:
        """Return an IRI (expanded), blank-node label, or literal token."""
        self.skip_ws()
        rest = self.text[self.pos :]
        m = _IRI.match(rest)
        if m:
            self.pos += m.end()
            return f"<{m.group(1)}>"
        if rest.startswith("_:"):
            m2 = re.match(r"_:[\w-]+", rest)
            self.pos += m2.end()
            return m2.group(0)
        if rest.startswith('"'):
            m3 = _LITERAL.match(rest)
            if not m3:
                self.error("unterminated literal")
            self.pos += m3.end()
            return m3.group(0)
        num = re.match(r"[+-]?\d+(\.\d+)?([eE][+-]?\d+)?", rest)
        if num and num.group(0):
            self.pos += num.end()
            return f'"{num.group(0)}"'
        m4 = _PREFIXED.match(rest)
        if m4:
            prefix = m4.group(1) or ""
            if prefix not in self.prefixes:
                self.error(f"undeclared prefix {prefix!r}")
            self.pos += m4.end()
            return f"<{self.prefixes[prefix]}{m4.group(2)}>"
        self.error(f"unexpected token near {rest[:40]!r}")

    def parse(self) -> list[tuple[str, str, str]]:
        while not self.at_end():
            if self.text.startswith("@prefix", self.pos):
                self.pos += len("@prefix")
                self.skip_ws()
                m = re.match(r"([A-Za-z][\w.-]*)?:", self.text[self.pos :])
                if not m:
                    self.error("bad @prefix declaration")
                name = m.group(1) or ""
                self.pos += m.end()
                self.skip_ws()
                iri = _IRI.match(self.text[self.pos :])
                if not iri:
                    self.error("bad @prefix IRI")
                self.pos += iri.end()
                self.prefixes[name] = iri.group(1)
                self.expect(".")
                continue
            subject = self.term()
            while True:
                predicate = self.term()
                if predicate == "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>":
                    predicate = "rdf:type"
                while True:
                    obj = self.term()
                    self.triples.append((subject, predicate if predicate == "rdf:type" else predicate, obj))
                    self.skip_ws()
                    if self.text.startswith(",", self.pos):
                        self.pos += 1
                        continue
                    break
                self.skip_ws()
                if self.text.startswith(";", self.pos):
                    self.pos += 1
                    self.skip_ws()
                    if self.text.startswith(".", self.pos):
                        self.pos += 1
                        break
                    continue
                self.expect(".")
                break
        return self.triples


def _iri_value(tok: str) -> Optional[str]:
    m = _IRI.match(tok)
    return m.group(1) if m else None


# predicates whose objects are nested nodes to flatten one level
NESTED_PREDICATE_HINTS = ("address", "geo")


def parse_rdf(
    stream,
    syntax: str,
    mapping: SchemaMapping,
    dataset_id: str = "rdf",
    source_label: str = "rdf",
    entity_type: str = "Entity",
    ingested_at: float = 0.0,
) -> Dataset:
    """Subject IRIs become entity ids; nested address/geo nodes are flattened
    one level onto the parent; unmapped predicates that stay unmapped are kept
    under their local name."""
    text = _decode(stream).getvalue()
    if syntax == "ntriples":
        raw_triples = _parse_ntriples(text)
    elif syntax in ("turtle", "turtle-subset"):
        raw_triples = _TurtleParser(text).parse()
    else:
        raise SchemaError(f"unknown RDF syntax: {syntax!r}")

    prov = Provenance(source_label, ingested_at)
    by_subject: dict[str, list[tuple[str, str]]] = {}
    for s, p, o in raw_triples:
        by_subject.setdefault(s, []).append((p, o))

    def local_name(iri: str) -> str:
        return re.split(r"[/#]", iri)[-1]

    # subjects that only appear as objects of nesting predicates are nested nodes
    nested_subjects = set()
    for s, pairs in by_subject.items():
        for p, o in pairs:
            if p == "rdf:type":
                continue
            iri = _iri_value(p) or p
            tgt = o if o.startswith("_:") else _iri_value(o)
            if tgt and (f"<{tgt}>" in by_subject or o in by_subject):
                key = o if o.startswith("_:") else f"<{tgt}>"
                if any(h in local_name(iri).lower() for h in NESTED_PREDICATE_HINTS):
                    nested_subjects.add(key)

    skipped = 0
    entities = []
    for subject, pairs in sorted(by_subject.items()):
        if subject in nested_subjects or subject.startswith("_:"):
            continue
        sid = _iri_value(subject)
        if sid is None:
            continue
        props: dict[str, list[PropertyValue]] = {}
        halves: dict[str, str] = {}

        def add_pairs(pred_obj: Iterable[tuple[str, str]], depth: int):
            nonlocal skipped
            for p, o in pred_obj:
                if p == "rdf:type":
                    continue
                iri = _iri_value(p) or p
                name = mapping.canonical(iri)
                if name == iri:
                    name = mapping.canonical(local_name(iri))
                    if name == local_name(iri) and iri in mapping.aliases:
                        name = mapping.aliases[iri]
                lit = _literal_text(o)
                if lit is not None:
                    if name in (LAT_COLUMN, LON_COLUMN):
                        halves[name] = lit
                        continue
                    value = _make_value(mapping.kind(name), lit, prov, subject)
                    if value is not None:
                        props.setdefault(name, []).append(value)
                    continue
                key = o if o.startswith("_:") else o
                if key in by_subject:
                    if depth >= 1:
                        skipped += 1
                        log.warning("parse_rdf: nesting deeper than one level at %s, skipped", subject)
                        continue
                    add_pairs(by_subject[key], depth + 1)
                else:
                    target = _iri_value(o)
                    if target is not None:
                        value = _make_value(
                            "url" if mapping.kind(name) == "text" else mapping.kind(name),
                            target, prov, subject,
                        )
                        if value is not None:
                            props.setdefault(name, []).append(value)

        add_pairs(pairs, 0)
        if LAT_COLUMN in halves and LON_COLUMN in halves:
            try:
                lat = float(halves[LAT_COLUMN])
                lon = float(halves[LON_COLUMN])
                props.setdefault(GEO_PROPERTY, []).append(
                    PropertyValue("geopoint", f"{lat},{lon}", provenance=prov)
                )
            except ValueError:
                log.warning("parse_rdf: bad geopoint halves on %s", subject)
        if not props:
            continue
        entities.append(Entity(sid, entity_type, {k: tuple(v) for k, v in props.items()}))
    if skipped:
        log.info("parse_rdf: skipped %d over-nested triples", skipped)
    return Dataset(dataset_id, tuple(entities), source_label)


def write_ntriples(dataset: Dataset, base: str = "urn:kgdedup:") -> str:
    """Serialize entities back to N-Triples with literal objects."""

    def iri(v: str) -> str:
        return v if re.match(r"^\w+://", v) else base + v

    lines = []
    for e in dataset.entities:
        subj = f"<{iri(e.id)}>"
        for prop in sorted(e.properties):
            for v in e.properties[prop]:
                escaped = v.raw.replace("\\", "\\\\").replace('"', '\\"')
                lines.append(f'{subj} <{base}prop/{prop}> "{escaped}" .')
    return "\n".join(lines) + ("\n" if lines else "")


def apply_mapping(dataset: Dataset, mapping: SchemaMapping) -> Dataset:
    """Rename property keys to canonical names; values under merged aliases
    are concatenated into one multi-valued list preserving source-key order."""
    out = []
    for e in dataset.entities:
        props: dict[str, list[PropertyValue]] = {}
        for key in e.properties:
            props.setdefault(mapping.canonical(key), []).extend(e.properties[key])
        out.append(Entity(e.id, e.type, {k: tuple(v) for k, v in props.items()}))
    return Dataset(dataset.id, tuple(out), dataset.source_label)
