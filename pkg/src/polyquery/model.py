"""Relational data model shared by every paradigm.

Values are plain Python scalars (int, float, str, bool) with None playing the
role of SQL NULL; the column type lives in the schema, not on the value.
Relations are partitioned multisets of rows: partition boundaries carry no
meaning and exist only as the unit of parallel work.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

from .errors import EngineError, ExecutionError, PlanError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

Value = int | float | str | bool | None
Row = tuple


class ColumnType(str, Enum):
    INT64 = "Int64"
    FLOAT64 = "Float64"
    UTF8 = "Utf8"
    BOOL = "Bool"

    @classmethod
    def parse(cls, name: str) -> "ColumnType":
        for member in cls:
            if member.value == name:
                return member
        raise EngineError(f"unknown column type {name!r}")


def value_conforms(value, ctype: ColumnType) -> bool:
    if value is None:
        return True
    if ctype is ColumnType.BOOL:
        return isinstance(value, bool)
    if ctype is ColumnType.INT64:
        return isinstance(value, int) and not isinstance(value, bool) and INT64_MIN <= value <= INT64_MAX
    if ctype is ColumnType.FLOAT64:
        return isinstance(value, float)
    return isinstance(value, str)


@dataclass(frozen=True)
class Column:
    name: str
    ctype: ColumnType


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]

    @classmethod
    def of(cls, *cols: tuple[str, ColumnType]) -> "Schema":
        return cls(tuple(Column(n, t) for n, t in cols))

    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def types(self) -> list[ColumnType]:
        return [c.ctype for c in self.columns]

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise PlanError(f"unknown column {name!r}")

    def __len__(self) -> int:
        return len(self.columns)

    def validate_table_schema(self) -> None:
        """Registered tables need non-empty schemas with unique column names."""
        if not self.columns:
            raise EngineError("schema must have at least one column")
        seen = set()
        for c in self.columns:
            if c.name in seen:
                raise EngineError(f"duplicate column name {c.name!r}")
            seen.add(c.name)


@dataclass(frozen=True)
class PlanColumn:
    """A column as the planner sees it: name plus the table it came from."""

    qualifier: str | None
    name: str
    ctype: ColumnType


class PlanSchema:
    """Ordered columns with qualifier-aware resolution for name lookup."""

    def __init__(self, columns: Sequence[PlanColumn]):
        self.columns = list(columns)

    @classmethod
    def from_table(cls, qualifier: str, schema: Schema) -> "PlanSchema":
        return cls([PlanColumn(qualifier, c.name, c.ctype) for c in schema.columns])

    @classmethod
    def unqualified(cls, schema: Schema) -> "PlanSchema":
        return cls([PlanColumn(None, c.name, c.ctype) for c in schema.columns])

    def concat(self, other: "PlanSchema") -> "PlanSchema":
        return PlanSchema(self.columns + other.columns)

    def resolve(self, qualifier: str | None, name: str) -> int:
        matches = [
            i
            for i, c in enumerate(self.columns)
            if c.name == name and (qualifier is None or c.qualifier == qualifier)
        ]
        if not matches:
            label = f"{qualifier}.{name}" if qualifier else name
            raise PlanError(f"unknown column {label!r}")
        if len(matches) > 1:
            raise PlanError(f"ambiguous column {name!r}: qualify it as table.column")
        return matches[0]

    def try_resolve(self, qualifier: str | None, name: str) -> int | None:
        try:
            return self.resolve(qualifier, name)
        except PlanError:
            return None

    def count_matches(self, qualifier: str | None, name: str) -> int:
        return sum(
            1
            for c in self.columns
            if c.name == name and (qualifier is None or c.qualifier == qualifier)
        )

    def to_schema(self) -> Schema:
        """Flatten to an output schema, qualifying names only where they collide."""
        counts = Counter(c.name for c in self.columns)
        cols = []
        for c in self.columns:
            if counts[c.name] > 1 and c.qualifier:
                cols.append(Column(f"{c.qualifier}.{c.name}", c.ctype))
            else:
                cols.append(Column(c.name, c.ctype))
        return Schema(tuple(cols))

    def __len__(self) -> int:
        return len(self.columns)


class Relation:
    """A schema plus a non-empty list of row-list partitions."""

    def __init__(self, schema: Schema, partitions: list[list[Row]]):
        if not partitions:
            partitions = [[]]
        self.schema = schema
        self.partitions = partitions

    @classmethod
    def from_rows(cls, schema: Schema, rows: Sequence[Row]) -> "Relation":
        return cls(schema, [list(rows)])

    def rows(self) -> Iterator[Row]:
        for part in self.partitions:
            yield from part

    def all_rows(self) -> list[Row]:
        out: list[Row] = []
        for part in self.partitions:
            out.extend(part)
        return out

    def num_rows(self) -> int:
        return sum(len(p) for p in self.partitions)

    def check_rows_conform(self) -> None:
        """Debug/test helper: every row matches the schema positionally."""
        types = self.schema.types()
        for row in self.rows():
            if len(row) != len(types):
                raise EngineError(f"row arity {len(row)} != schema arity {len(types)}")
            for v, t in zip(row, types):
                if not value_conforms(v, t):
                    raise EngineError(f"value {v!r} does not conform to {t.value}")

    def __repr__(self) -> str:
        return f"Relation({self.schema.names()}, rows={self.num_rows()}, parts={len(self.partitions)})"


def multiset_equal(a: Relation, b: Relation) -> bool:
    """True iff schemas match by name and type and row multisets are equal."""
    if a.schema.names() != b.schema.names() or a.schema.types() != b.schema.types():
        return False
    return Counter(a.rows()) == Counter(b.rows())


def repartition(r: Relation, n: int) -> Relation:
    """Round-robin the rows into exactly n partitions (sizes differ by <= 1)."""
    if n < 1:
        raise ExecutionError("partition count must be >= 1")
    parts: list[list[Row]] = [[] for _ in range(n)]
    for i, row in enumerate(r.rows()):
        parts[i % n].append(row)
    return Relation(r.schema, parts)


# Canonical row ordering.
#
# Sorting must be deterministic regardless of partitioning, so sort keys wrap
# every value with a null rank (nulls sort after values ascending, before them
# descending, as in PostgreSQL) and ties fall back to whole-row order.

def _null_ranked(value):
    return (1, 0) if value is None else (0, value)


def canonical_row_key(row: Row) -> tuple:
    # Null positions decide first; when they match, the remaining element-wise
    # comparison only ever meets None against None, which is an equality.
    return (tuple(1 if v is None else 0 for v in row), row)


def sort_rows(rows: list[Row], keys: Sequence[tuple[int, bool]]) -> list[Row]:
    """Stable multi-key sort; keys are (column index, ascending) pairs."""
    out = sorted(rows, key=canonical_row_key)
    for idx, ascending in reversed(list(keys)):
        out.sort(key=lambda row: _null_ranked(row[idx]), reverse=not ascending)
    return out


def canonical_order(rows: list[Row]) -> list[Row]:
    return sorted(rows, key=canonical_row_key)
