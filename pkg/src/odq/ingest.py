"""Format detection and parsing of distributions into column datasets.

Every supported format is flattened the same way: each record becomes a
mapping of :class:`FeaturePath` to a scalar :class:`Value`, and the dataset
stores one column per path with one slot per record (missing slots are
``Null``).
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import re
import xml.etree.ElementTree as ET
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import PurePosixPath
from typing import Any
from urllib.parse import urlparse

from odq.errors import ParseError, UnsupportedFormat, ValidationError
from odq.standard import FeaturePath

HEAD_SIZE = 4096
ARRAY_JOINER = ";"
# key under which an XML element's own text sits next to its attributes
_TEXT_KEY = object()


class FileFormat(enum.Enum):
    JSON = "JSON"
    JSON_LD = "JSON_LD"
    GEOJSON = "GEOJSON"
    XML = "XML"
    GML = "GML"
    KML = "KML"
    RDF = "RDF"
    CSV = "CSV"
    XLS = "XLS"
    XLSX = "XLSX"
    PDF = "PDF"
    TXT = "TXT"
    UNKNOWN = "Unknown"

    @classmethod
    def from_tag(cls, tag: str) -> FileFormat:
        norm = tag.strip().upper().replace("-", "_")
        for fmt in cls:
            if fmt.value.upper() == norm or fmt.name == norm:
                return fmt
        raise ValueError(f"unknown format tag {tag!r}")


JSON_FAMILY = frozenset({FileFormat.JSON, FileFormat.JSON_LD, FileFormat.GEOJSON})
XML_FAMILY = frozenset({FileFormat.XML, FileFormat.GML, FileFormat.KML})
PARSEABLE = JSON_FAMILY | XML_FAMILY | {FileFormat.CSV, FileFormat.XLSX}


class Kind(enum.Enum):
    NULL = "null"
    BOOL = "bool"
    INTEGER = "integer"
    FLOAT = "float"
    TEXT = "text"


@dataclass(frozen=True)
class Value:
    kind: Kind
    payload: bool | int | float | str | None = None

    @classmethod
    def of(cls, raw: Any) -> Value:
        """Wrap a native scalar (``None``, bool, int, float, str)."""
        if raw is None:
            return NULL
        if isinstance(raw, bool):
            return cls(Kind.BOOL, raw)
        if isinstance(raw, int):
            return cls(Kind.INTEGER, raw)
        if isinstance(raw, float):
            return cls(Kind.FLOAT, raw)
        if isinstance(raw, str):
            return cls(Kind.TEXT, raw)
        raise TypeError(f"not a scalar: {raw!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Value):
            return NotImplemented
        if self.kind is not other.kind:
            return False
        # NaN payloads compare equal so datasets stay comparable
        if self.kind is Kind.FLOAT and math.isnan(self.payload) and math.isnan(other.payload):
            return True
        return self.payload == other.payload

    def __hash__(self) -> int:
        if self.kind is Kind.FLOAT and math.isnan(self.payload):
            return hash((self.kind, "nan"))
        return hash((self.kind, self.payload))

    def to_native(self) -> bool | int | float | str | None:
        return self.payload


NULL = Value(Kind.NULL)


@dataclass(frozen=True)
class FeatureColumn:
    path: FeaturePath
    values: tuple[Value, ...]


@dataclass(frozen=True)
class Dataset:
    record_count: int
    columns: Mapping[FeaturePath, FeatureColumn]
    source_format: FileFormat = FileFormat.UNKNOWN

    def __post_init__(self) -> None:
        if self.record_count < 0:
            raise ValidationError("negative record count")
        for path, col in self.columns.items():
            if col.path != path:
                raise ValidationError(f"column keyed {path} carries path {col.path}")
            if len(col.values) != self.record_count:
                raise ValidationError(
                    f"column {path} has {len(col.values)} slots, expected {self.record_count}"
                )

    @classmethod
    def from_records(
        cls,
        records: Sequence[Mapping[FeaturePath, Value]],
        source_format: FileFormat = FileFormat.UNKNOWN,
    ) -> Dataset:
        order: dict[FeaturePath, None] = {}
        for rec in records:
            order.update(dict.fromkeys(rec))
        columns = {
            path: FeatureColumn(path, tuple(rec.get(path, NULL) for rec in records))
            for path in order
        }
        return cls(len(records), columns, source_format)

    def records(self) -> list[dict[FeaturePath, Value]]:
        return [
            {path: col.values[i] for path, col in self.columns.items()}
            for i in range(self.record_count)
        ]

    def to_canonical_json(self) -> list[dict[str, Any]]:
        """Flat record array keyed by dotted paths; re-parses to an equal dataset."""
        return [
            {str(path): value.to_native() for path, value in rec.items()}
            for rec in self.records()
        ]


def present_paths(dataset: Dataset) -> frozenset[FeaturePath]:
    """Feature names found in the dataset, including all-null columns."""
    if dataset.record_count == 0:
        return frozenset()
    return frozenset(dataset.columns)


# -- format detection ---------------------------------------------------------

_MEDIA_TYPES = {
    "application/json": FileFormat.JSON,
    "text/json": FileFormat.JSON,
    "application/ld+json": FileFormat.JSON_LD,
    "application/geo+json": FileFormat.GEOJSON,
    "application/vnd.geo+json": FileFormat.GEOJSON,
    "application/xml": FileFormat.XML,
    "text/xml": FileFormat.XML,
    "application/gml+xml": FileFormat.GML,
    "application/vnd.ogc.gml": FileFormat.GML,
    "application/vnd.google-earth.kml+xml": FileFormat.KML,
    "application/rdf+xml": FileFormat.RDF,
    "text/turtle": FileFormat.RDF,
    "application/n-triples": FileFormat.RDF,
    "text/n3": FileFormat.RDF,
    "application/trig": FileFormat.RDF,
    "text/csv": FileFormat.CSV,
    "application/csv": FileFormat.CSV,
    "application/vnd.ms-excel": FileFormat.XLS,
    "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet": FileFormat.XLSX,
    "application/pdf": FileFormat.PDF,
    "text/plain": FileFormat.TXT,
}

_EXTENSIONS = {
    ".json": FileFormat.JSON,
    ".jsonld": FileFormat.JSON_LD,
    ".geojson": FileFormat.GEOJSON,
    ".xml": FileFormat.XML,
    ".gml": FileFormat.GML,
    ".kml": FileFormat.KML,
    ".rdf": FileFormat.RDF,
    ".ttl": FileFormat.RDF,
    ".nt": FileFormat.RDF,
    ".n3": FileFormat.RDF,
    ".owl": FileFormat.RDF,
    ".trig": FileFormat.RDF,
    ".csv": FileFormat.CSV,
    ".xls": FileFormat.XLS,
    ".xlsx": FileFormat.XLSX,
    ".pdf": FileFormat.PDF,
    ".txt": FileFormat.TXT,
}

_FEATURE_COLLECTION = re.compile(r'"type"\s*:\s*"FeatureCollection"')
_CONTEXT_KEY = re.compile(r'"@context"\s*:')


def _head_text(content_head: bytes) -> str:
    text = content_head[:HEAD_SIZE].decode("utf-8", errors="ignore")
    return text.lstrip("﻿ \t\r\n")


def detect_format(
    filename: str = "",
    declared_media_type: str | None = None,
    content_head: bytes = b"",
) -> FileFormat:
    """Content sniff, then declared media type, then file extension."""
    head = _head_text(content_head or b"")
    if head[:1] in ("{", "["):
        if _FEATURE_COLLECTION.search(head):
            return FileFormat.GEOJSON
        if _CONTEXT_KEY.search(head):
            return FileFormat.JSON_LD

    if declared_media_type:
        media = declared_media_type.split(";", 1)[0].strip().lower()
        if media in _MEDIA_TYPES:
            return _MEDIA_TYPES[media]

    if filename:
        name = urlparse(filename).path if "://" in filename else filename
        suffix = PurePosixPath(name.replace("\\", "/")).suffix.lower()
        if suffix in _EXTENSIONS:
            return _EXTENSIONS[suffix]

    # last-resort signatures for unlabelled content
    if head[:1] in ("{", "["):
        return FileFormat.JSON
    if head.startswith("<?xml"):
        return FileFormat.XML
    if content_head.startswith(b"%PDF-"):
        return FileFormat.PDF
    return FileFormat.UNKNOWN


# -- flattening ---------------------------------------------------------------


def _path_segments(key: str, where: str) -> tuple[str, ...]:
    segments = tuple(key.split("."))
    if not all(segments):
        raise ParseError(f"{where}: member name {key!r} yields an empty path segment")
    return segments


def _render(raw: Any) -> str:
    if isinstance(raw, bool):
        return "true" if raw else "false"
    if isinstance(raw, float):
        return repr(raw)
    return str(raw)


class _RecordBuilder:
    """Collects the leaf values of one record, several values per path allowed."""

    def __init__(self, where: str) -> None:
        self.where = where
        self.values: dict[FeaturePath, list[Any]] = {}
        self.joined: set[FeaturePath] = set()

    def add(self, path: tuple[str, ...], raw: Any, joined: bool = False) -> None:
        fp = FeaturePath(path)
        self.values.setdefault(fp, []).append(raw)
        if joined:
            self.joined.add(fp)

    def walk(self, prefix: tuple[str, ...], node: Any, in_array: bool = False) -> None:
        if isinstance(node, dict):
            if not node:
                if prefix:
                    self.add(prefix, None, in_array)
                return
            for key, child in node.items():
                if key is _TEXT_KEY:
                    self.walk(prefix, child, in_array)
                    continue
                self.walk(prefix + _path_segments(str(key), self.where), child, in_array)
        elif isinstance(node, list):
            if not node:
                if prefix:
                    self.add(prefix, None, True)
                return
            for item in node:
                self.walk(prefix, item, True)
        else:
            if not prefix:
                raise ParseError(f"{self.where}: record is a bare scalar")
            self.add(prefix, node, in_array)

    def build(self) -> dict[FeaturePath, Value]:
        out: dict[FeaturePath, Value] = {}
        for path, raws in self.values.items():
            if path not in self.joined:
                if len(raws) > 1:
                    raise ParseError(f"{self.where}: path {path} occurs twice in one record")
                out[path] = Value.of(raws[0])
                continue
            parts = [_render(r) for r in raws if r is not None]
            out[path] = Value(Kind.TEXT, ARRAY_JOINER.join(parts)) if parts else NULL
        return out


def flatten_record(obj: Any, where: str = "record") -> dict[FeaturePath, Value]:
    """Flatten one nested JSON-like record into leaf paths.

    Arrays (of scalars or of objects) collapse into a single joined text
    value per leaf path; empty objects and arrays become ``Null``.
    """
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: record must be an object, got {type(obj).__name__}")
    builder = _RecordBuilder(where)
    builder.walk((), obj)
    return builder.build()


# -- JSON family --------------------------------------------------------------


def _split_selector(selector: str) -> list[str]:
    return [part for part in selector.split("/") if part]


def _decode(content: bytes, fmt: FileFormat) -> str:
    try:
        return content.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{fmt.value} content is not valid UTF-8: {exc}") from exc


def _select_json(doc: Any, selector: str) -> Any:
    node = doc
    for part in _split_selector(selector):
        if isinstance(node, dict) and part in node:
            node = node[part]
        elif isinstance(node, list) and part.isdigit() and int(part) < len(node):
            node = node[int(part)]
        else:
            raise ParseError(f"record root {selector!r}: no member {part!r}")
    return node


def _json_records(doc: Any, fmt: FileFormat, record_root: str | None) -> list[Any]:
    if record_root:
        node = _select_json(doc, record_root)
    elif fmt is FileFormat.GEOJSON and isinstance(doc, dict):
        node = doc.get("features", [])
    elif isinstance(doc, dict):
        lists = [v for k, v in doc.items() if isinstance(v, list) and v
                 and all(isinstance(i, dict) for i in v)]
        node = lists[0] if len(lists) == 1 else [doc]
    else:
        node = doc
    if isinstance(node, dict):
        node = [node]
    if not isinstance(node, list):
        raise ParseError(f"record root does not select an array (got {type(node).__name__})")
    if fmt is FileFormat.GEOJSON:
        node = [_geojson_feature(f, i) for i, f in enumerate(node)]
    elif isinstance(doc, dict) and "@context" in doc and node is not doc:
        node = [_inherit_context(rec, doc["@context"]) for rec in node]
    return node


def _inherit_context(record: Any, context: Any) -> Any:
    if isinstance(record, dict) and "@context" not in record:
        return {"@context": context, **record}
    return record


def _geojson_feature(feature: Any, index: int) -> dict[str, Any]:
    if not isinstance(feature, dict):
        raise ParseError(f"features[{index}] is not an object")
    # "type": "Feature" is structural noise, not a data feature
    return {k: v for k, v in feature.items() if k != "type"}


def _parse_json(content: bytes, fmt: FileFormat, record_root: str | None) -> Dataset:
    text = _decode(content, fmt)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    records = _json_records(doc, fmt, record_root)
    flat = [flatten_record(rec, f"record {i}") for i, rec in enumerate(records)]
    return Dataset.from_records(flat, fmt)


# -- XML family ---------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1].split(":")[-1]


def _element_tree(elem: ET.Element) -> Any:
    """Convert an element into a JSON-like node for the shared flattener."""
    node: dict[str, Any] = {}
    for name, value in elem.attrib.items():
        node["@" + _local(name)] = value
    children = list(elem)
    text = (elem.text or "").strip()
    if not children and not node:
        return text if text else None
    groups: dict[str, list[Any]] = {}
    for child in children:
        groups.setdefault(_local(child.tag), []).append(_element_tree(child))
    for name, items in groups.items():
        node[name] = items[0] if len(items) == 1 else items
    if text:
        node[_TEXT_KEY] = text
    return node


def _xml_record(elem: ET.Element, index: int) -> dict[FeaturePath, Value]:
    where = f"record {index}"
    tree = _element_tree(elem)
    if not isinstance(tree, dict):
        tree = {_TEXT_KEY: tree}
    if _TEXT_KEY in tree:
        # text directly inside the record element is keyed by the element name
        tree = {k: v for k, v in tree.items() if k is not _TEXT_KEY}
        tree[_local(elem.tag)] = _element_tree_text(elem)
    builder = _RecordBuilder(where)
    builder.walk((), tree)
    return builder.build()


def _element_tree_text(elem: ET.Element) -> str | None:
    return (elem.text or "").strip() or None


def _xml_record_elements(root: ET.Element, record_root: str | None) -> list[ET.Element]:
    if record_root:
        parts = _split_selector(record_root)
        if parts and parts[0] == _local(root.tag) and len(parts) > 1:
            parts = parts[1:]
        return root.findall("/".join("{*}" + p for p in parts))
    node = root
    while True:
        children = list(node)
        if len(children) == 1 and len(children[0]):
            node = children[0]
            continue
        break
    if not children:
        return []
    counts = Counter(_local(c.tag) for c in children)
    tag, _ = counts.most_common(1)[0]
    return [c for c in children if _local(c.tag) == tag]


def _parse_xml(content: bytes, fmt: FileFormat, record_root: str | None) -> Dataset:
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc
    elements = _xml_record_elements(root, record_root)
    return Dataset.from_records([_xml_record(e, i) for i, e in enumerate(elements)], fmt)


# -- tabular ------------------------------------------------------------------


def _header_paths(header: Sequence[Any]) -> list[FeaturePath]:
    paths: list[FeaturePath] = []
    for i, name in enumerate(header):
        name = "" if name is None else str(name).strip()
        if not name:
            raise ParseError(f"header column {i + 1} is empty")
        paths.append(FeaturePath(_path_segments(name, "header")))
    dupes = [str(p) for p, n in Counter(paths).items() if n > 1]
    if dupes:
        raise ParseError(f"duplicate header names: {', '.join(dupes)}")
    return paths


def _rows_to_dataset(
    rows: Iterable[Sequence[Any]], fmt: FileFormat, cell: Any
) -> Dataset:
    rows = iter(rows)
    try:
        header = next(rows)
    except StopIteration:
        return Dataset(0, {}, fmt)
    paths = _header_paths(header)
    records = []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(c is None for c in row):
            continue
        row = list(row)
        extra = row[len(paths):]
        if any(c not in (None, "") for c in extra):
            raise ParseError(f"row {lineno} has {len(row)} cells for {len(paths)} columns")
        row = row[: len(paths)] + [None] * (len(paths) - len(row))
        records.append({p: NULL if c is None else cell(c) for p, c in zip(paths, row)})
    return Dataset.from_records(records, fmt) if records else Dataset(
        0, {p: FeatureColumn(p, ()) for p in paths}, fmt
    )


def _parse_csv(content: bytes, delimiter: str) -> Dataset:
    text = _decode(content, FileFormat.CSV)
    try:
        reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter, quotechar='"',
                            strict=True)
        rows = list(reader)
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from exc
    return _rows_to_dataset(rows, FileFormat.CSV, lambda c: Value(Kind.TEXT, c))


def _xlsx_cell(raw: Any) -> Value:
    if raw is None:
        return NULL
    if isinstance(raw, (bool, int, float, str)):
        return Value.of(raw)
    if hasattr(raw, "isoformat"):
        return Value(Kind.TEXT, raw.isoformat())
    return Value(Kind.TEXT, str(raw))


def _parse_xlsx(content: bytes) -> Dataset:
    import zipfile

    from openpyxl import load_workbook

    try:
        wb = load_workbook(io.BytesIO(content), read_only=True, data_only=True)
    except (zipfile.BadZipFile, KeyError, OSError, ValueError) as exc:
        raise ParseError(f"malformed XLSX: {exc}") from exc
    try:
        ws = wb.worksheets[0]
        return _rows_to_dataset(ws.iter_rows(values_only=True), FileFormat.XLSX, _xlsx_cell)
    finally:
        wb.close()


def parse_dataset(
    fmt: FileFormat,
    content: bytes,
    record_root: str | None = None,
    csv_delimiter: str = ",",
) -> Dataset:
    if fmt in JSON_FAMILY:
        return _parse_json(content, fmt, record_root)
    if fmt in XML_FAMILY:
        return _parse_xml(content, fmt, record_root)
    if fmt is FileFormat.CSV:
        return _parse_csv(content, csv_delimiter)
    if fmt is FileFormat.XLSX:
        return _parse_xlsx(content)
    raise UnsupportedFormat(f"{fmt.value} distributions are scored but not parsed")
