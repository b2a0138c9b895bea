"""Sampling-based table statistics feeding the cost model.

Row count, per-column min/max and null counts come from a full streaming
pass (cheap). Distinct-value counts are exact up to sample_threshold rows;
above that they come from a fixed-size uniform sample via the Chao84
frequency-of-frequencies estimator.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import EngineError
from .model import Relation

DEFAULT_SAMPLE_THRESHOLD = 10_000


@dataclass(frozen=True)
class ColumnStats:
    ndv_estimate: float
    min: object
    max: object
    null_count: int


@dataclass(frozen=True)
class TableStats:
    row_count: int
    columns: dict  # column name -> ColumnStats


def sample_relation(r: Relation, target_size: int, seed: int) -> Relation:
    """Uniform reservoir sample of min(target_size, |r|) rows; deterministic per seed."""
    if target_size < 1:
        raise EngineError("sample target_size must be >= 1")
    rng = random.Random(seed)
    reservoir = []
    for i, row in enumerate(r.rows()):
        if i < target_size:
            reservoir.append(row)
        else:
            j = rng.randrange(i + 1)
            if j < target_size:
                reservoir[j] = row
    return Relation.from_rows(r.schema, reservoir)


def chao84(distinct: int, f1: int, f2: int) -> float:
    """Distinct-count estimate from sample frequency-of-frequencies."""
    if f2 > 0:
        return distinct + (f1 * f1) / (2.0 * f2)
    return distinct + (f1 * (f1 - 1)) / 2.0


def collect_stats(
    r: Relation,
    sample_threshold: int = DEFAULT_SAMPLE_THRESHOLD,
    seed: int = 0,
) -> TableStats:
    """Exact stats below the threshold, sampled NDV estimates above it."""
    if sample_threshold < 1:
        raise EngineError("sample_threshold must be >= 1")
    names = r.schema.names()
    width = len(names)
    row_count = 0
    null_counts = [0] * width
    mins: list[object] = [None] * width
    maxs: list[object] = [None] * width
    exact = True
    distinct: list[set] = [set() for _ in range(width)]

    for row in r.rows():
        row_count += 1
        if exact and row_count > sample_threshold:
            exact = False
            distinct = []
        for i in range(width):
            v = row[i]
            if v is None:
                null_counts[i] += 1
                continue
            if mins[i] is None or v < mins[i]:
                mins[i] = v
            if maxs[i] is None or v > maxs[i]:
                maxs[i] = v
            if exact:
                distinct[i].add(v)

    columns = {}
    if exact:
        for i, name in enumerate(names):
            columns[name] = ColumnStats(
                ndv_estimate=float(len(distinct[i])),
                min=mins[i],
                max=maxs[i],
                null_count=null_counts[i],
            )
        return TableStats(row_count=row_count, columns=columns)

    sample = sample_relation(r, sample_threshold, seed)
    for i, name in enumerate(names):
        freq = Counter(row[i] for row in sample.rows() if row[i] is not None)
        d = len(freq)
        counts = Counter(freq.values())
        estimate = chao84(d, counts.get(1, 0), counts.get(2, 0))
        estimate = min(max(estimate, float(d)), float(row_count))
        columns[name] = ColumnStats(
            ndv_estimate=estimate,
            min=mins[i],
            max=maxs[i],
            null_count=null_counts[i],
        )
    return TableStats(row_count=row_count, columns=columns)


# Persistence: stats.json keyed by table name.

def save_stats(stats_by_table: dict[str, TableStats], path: str | Path) -> None:
    payload = {
        table: {
            "row_count": ts.row_count,
            "columns": {
                name: {
                    "ndv_estimate": cs.ndv_estimate,
                    "min": cs.min,
                    "max": cs.max,
                    "null_count": cs.null_count,
                }
                for name, cs in ts.columns.items()
            },
        }
        for table, ts in stats_by_table.items()
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_stats(path: str | Path) -> dict[str, TableStats]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise EngineError(f"cannot read stats file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise EngineError(f"malformed stats file {path}: {exc}") from exc
    out = {}
    for table, ts in payload.items():
        columns = {
            name: ColumnStats(
                ndv_estimate=float(cs["ndv_estimate"]),
                min=cs["min"],
                max=cs["max"],
                null_count=int(cs["null_count"]),
            )
            for name, cs in ts["columns"].items()
        }
        out[table] = TableStats(row_count=int(ts["row_count"]), columns=columns)
    return out
