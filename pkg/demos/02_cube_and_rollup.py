"""Grouping sets: one query computing totals at several granularities.

CUBE over (pickup_zone, passengers) aggregates every subset of the grouping
columns in a single pass; the trailing grouping_id column is a bitmask
telling a rolled-up NULL apart from a NULL that was in the data (bit i set
means grouping column i was aggregated away).
"""
from pathlib import Path

from polyquery import Engine
from polyquery.cli import format_table

DATA = Path(__file__).resolve().parent.parent / "data"
engine = Engine(DATA)

print("Revenue by zone and passenger count, with subtotals (ROLLUP):")
print(
    format_table(
        engine.query(
            "SELECT pickup_zone, passengers, SUM(fare) AS revenue "
            "FROM trips WHERE passengers >= 3 "
            "GROUP BY pickup_zone, passengers WITH ROLLUP "
            "ORDER BY revenue DESC"
        ),
        limit=15,
    )
)

print("\nSame grouping as a full CUBE (adds the per-passenger-count slice):")
relation = engine.query(
    "SELECT pickup_zone, passengers, SUM(fare) AS revenue, COUNT(*) AS trips "
    "FROM trips WHERE passengers >= 3 "
    "GROUP BY pickup_zone, passengers WITH CUBE"
)
by_id: dict[int, int] = {}
for row in relation.rows():
    by_id[row[-1]] = by_id.get(row[-1], 0) + 1
print(format_table(relation, limit=12))
print("rows per grouping_id:", dict(sorted(by_id.items())))
