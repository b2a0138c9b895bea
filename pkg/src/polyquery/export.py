"""Result export: RFC-4180 CSV with a header row.

NULL renders as an empty field, booleans as true/false (matching what the
scanner parses back), and floats via repr so values round-trip exactly.
Output is byte-deterministic for a given relation.
"""
from __future__ import annotations

import csv
import io

from .model import Relation


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def relation_to_csv(relation: Relation) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(relation.schema.names())
    for row in relation.rows():
        writer.writerow(format_value(v) for v in row)
    return buffer.getvalue()
