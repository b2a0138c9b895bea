"""Register the bundled traffic corpus and explore it with SQL.

Run from the repository root:

    python3 demos/01_catalog_and_sql.py
"""
from pathlib import Path

from polyquery import Engine
from polyquery.cli import format_table

DATA = Path(__file__).resolve().parent.parent / "data"

engine = Engine(DATA)

print("Registered tables:")
for entry in engine.list_tables():
    cols = ", ".join(f"{c.name}:{c.ctype.value}" for c in entry.schema.columns)
    print(f"  {entry.table_name} <- {entry.source_path} ({cols})")

print("\nBusiest pickup zones:")
print(
    format_table(
        engine.query(
            "SELECT pickup_zone, COUNT(*) AS trips, AVG(fare) AS avg_fare "
            "FROM trips GROUP BY pickup_zone ORDER BY trips DESC LIMIT 5"
        )
    )
)

print("\nLong trips with at least 3 passengers:")
print(
    format_table(
        engine.query(
            "SELECT trip_id, pickup_zone, dropoff_zone, distance_km, fare "
            "FROM trips WHERE distance_km > 12 AND passengers >= 3 "
            "ORDER BY distance_km DESC"
        )
    )
)

# Expressions and NULL handling: 7 trips have no recorded fare, and SQL
# three-valued logic keeps them out of both branches of this predicate.
print("\nFare accounting (NULL fares excluded by the predicate):")
print(
    format_table(
        engine.query(
            "SELECT COUNT(*) AS all_trips, COUNT(fare) AS with_fare, "
            "SUM(fare) AS revenue FROM trips"
        )
    )
)
