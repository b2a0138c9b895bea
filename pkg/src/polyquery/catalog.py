"""Catalog: named relational views over delimited text files.

A catalog maps table names to files with explicit schemas, persisted as a
JSON manifest (catalog.json). Relative source paths resolve against the
manifest's directory so a data directory can be relocated as a unit.
"""
from __future__ import annotations

import csv
import json
import re
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import CatalogError, ScanError, SchemaInferenceError
from .model import INT64_MAX, INT64_MIN, Column, ColumnType, Relation, Schema

FORMAT_DELIMITED_TEXT = "DelimitedText"

_INT_RE = re.compile(r"[+-]?\d+\Z")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")
_BOOL_VALUES = {"true": True, "false": False}


def _is_int64(text: str) -> bool:
    return bool(_INT_RE.match(text)) and INT64_MIN <= int(text) <= INT64_MAX


def _is_float(text: str) -> bool:
    return bool(_FLOAT_RE.match(text))


def _is_bool(text: str) -> bool:
    return text.lower() in _BOOL_VALUES


# Narrowing order: Bool < Int64 < Float64 < Utf8. A column's inferred type is
# the first that accepts every sampled non-empty value.
_NARROWING = (
    (ColumnType.BOOL, _is_bool),
    (ColumnType.INT64, _is_int64),
    (ColumnType.FLOAT64, _is_float),
)


@dataclass(frozen=True)
class CatalogEntry:
    table_name: str
    source_path: str
    format: str
    delimiter: str
    has_header: bool
    schema: Schema


def infer_schema(path: str | Path, delimiter: str = ",", has_header: bool = True, sample_rows: int = 1000) -> Schema:
    """Infer per-column types from up to sample_rows records of a delimited file."""
    if sample_rows < 1:
        raise SchemaInferenceError("sample_rows must be >= 1")
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise SchemaInferenceError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle, delimiter=delimiter)
        header = None
        for record in reader:
            if record:
                header = record
                break
        if header is None:
            raise SchemaInferenceError(f"{path} is empty")
        width = len(header)
        if has_header:
            names = list(header)
            candidates: list[set[ColumnType] | None] = [None] * width
            sampled = 0
        else:
            names = [f"col{i}" for i in range(width)]
            candidates = [_candidate_types(field) for field in header]
            sampled = 1
        while sampled < sample_rows:
            try:
                record = next(reader)
            except StopIteration:
                break
            if not record:
                continue  # blank line
            if len(record) != width:
                raise SchemaInferenceError(
                    f"{path}: line {reader.line_num} has {len(record)} fields, expected {width}"
                )
            for i, field in enumerate(record):
                cand = _candidate_types(field)
                if cand is None:
                    continue
                candidates[i] = cand if candidates[i] is None else candidates[i] & cand
            sampled += 1
    columns = []
    for name, cand in zip(names, candidates):
        columns.append(Column(name, _narrowest(cand)))
    schema = Schema(tuple(columns))
    schema.validate_table_schema()
    return schema


def _candidate_types(field: str) -> set[ColumnType] | None:
    """Types consistent with one field; None for empty fields (NULL fits all)."""
    if field == "":
        return None
    types = {ColumnType.UTF8}
    for ctype, accepts in _NARROWING:
        if accepts(field):
            types.add(ctype)
    return types


def _narrowest(candidates: set[ColumnType] | None) -> ColumnType:
    if candidates is None:
        return ColumnType.UTF8
    for ctype, _ in _NARROWING:
        if ctype in candidates:
            return ctype
    return ColumnType.UTF8


def parse_field(field: str, ctype: ColumnType):
    """Decode one text field per the declared type; empty string is NULL."""
    if field == "":
        return None
    if ctype is ColumnType.UTF8:
        return field
    if ctype is ColumnType.INT64:
        if not _is_int64(field):
            raise ValueError(f"{field!r} is not a valid Int64")
        return int(field)
    if ctype is ColumnType.FLOAT64:
        if not _is_float(field):
            raise ValueError(f"{field!r} is not a valid Float64")
        return float(field)
    if not _is_bool(field):
        raise ValueError(f"{field!r} is not a valid Bool")
    return _BOOL_VALUES[field.lower()]


class Catalog:
    """Table registry with single-writer, many-reader semantics.

    Entries are immutable; registration swaps in a new dict under a lock so
    concurrent scans always see a consistent snapshot.
    """

    def __init__(self, base_dir: str | Path | None = None):
        self.base_dir = Path(base_dir) if base_dir else None
        self._entries: dict[str, CatalogEntry] = {}
        self._write_lock = threading.Lock()

    def register(self, entry: CatalogEntry) -> None:
        entry.schema.validate_table_schema()
        with self._write_lock:
            if entry.table_name in self._entries:
                raise CatalogError(f"table {entry.table_name!r} is already registered")
            updated = dict(self._entries)
            updated[entry.table_name] = entry
            self._entries = updated

    def entry(self, table_name: str) -> CatalogEntry:
        try:
            return self._entries[table_name]
        except KeyError:
            raise CatalogError(f"unknown table {table_name!r}") from None

    def schema(self, table_name: str) -> Schema:
        return self.entry(table_name).schema

    def list_tables(self) -> list[CatalogEntry]:
        return sorted(self._entries.values(), key=lambda e: e.table_name)

    def resolve_path(self, entry: CatalogEntry) -> Path:
        path = Path(entry.source_path)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path

    def scan(self, table_name: str) -> Relation:
        """Read the backing file into a single-partition relation in file order."""
        entry = self.entry(table_name)
        path = self.resolve_path(entry)
        types = entry.schema.types()
        width = len(types)
        rows = []
        try:
            handle = path.open("r", encoding="utf-8", newline="")
        except OSError as exc:
            raise ScanError(f"cannot read {path}: {exc}") from exc
        with handle:
            reader = csv.reader(handle, delimiter=entry.delimiter)
            if entry.has_header:
                for record in reader:
                    if record:
                        break  # consumed the header

            for record in reader:
                if not record:
                    continue  # blank line
                if len(record) != width:
                    raise ScanError(
                        f"{table_name}: line {reader.line_num} has {len(record)} fields, expected {width}"
                    )
                try:
                    rows.append(tuple(parse_field(f, t) for f, t in zip(record, types)))
                except ValueError as exc:
                    raise ScanError(f"{table_name}: line {reader.line_num}: {exc}") from exc
        return Relation.from_rows(entry.schema, rows)

    # Manifest persistence.

    def save(self, path: str | Path) -> None:
        payload = [
            {
                "table_name": e.table_name,
                "source_path": e.source_path,
                "format": e.format,
                "delimiter": e.delimiter,
                "has_header": e.has_header,
                "columns": [{"name": c.name, "type": c.ctype.value} for c in e.schema.columns],
            }
            for e in self.list_tables()
        ]
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Catalog":
        path = Path(path)
        catalog = cls(base_dir=path.parent)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CatalogError(f"cannot read manifest {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CatalogError(f"malformed manifest {path}: {exc}") from exc
        if not isinstance(payload, list):
            raise CatalogError(f"manifest {path} must be a JSON list of entries")
        for item in payload:
            try:
                schema = Schema(
                    tuple(Column(c["name"], ColumnType.parse(c["type"])) for c in item["columns"])
                )
                entry = CatalogEntry(
                    table_name=item["table_name"],
                    source_path=item["source_path"],
                    format=item["format"],
                    delimiter=item["delimiter"],
                    has_header=item["has_header"],
                    schema=schema,
                )
            except (KeyError, TypeError) as exc:
                raise CatalogError(f"malformed manifest entry in {path}: {exc}") from exc
            catalog.register(entry)
        return catalog
