"""How the cost-based optimizer sees a query.

Statistics drive everything: row counts, per-column distinct values
(estimated by Chao84 sampling above a threshold), and min/max ranges feed
selectivity and join-cardinality estimates, which in turn pick the join
order. This demo shows the raw numbers and the before/after plans.
"""
from pathlib import Path

from polyquery import Engine
from polyquery.optimizer import estimate_cardinality, optimize, plan_cost
from polyquery.stats import collect_stats, sample_relation

DATA = Path(__file__).resolve().parent.parent / "data"
engine = Engine(DATA)

trips = engine.catalog.scan("trips")
stats = collect_stats(trips)
print("trips statistics (exact, table is below the sampling threshold):")
print(f"  rows: {stats.row_count}")
for name, col in stats.columns.items():
    print(f"  {name:13s} ndv~{col.ndv_estimate:7.1f}  nulls={col.null_count:3d}  range=[{col.min!r}, {col.max!r}]")

print("\nA reservoir sample is deterministic for a fixed seed:")
sample = sample_relation(trips, target_size=5, seed=42)
for row in sample.rows():
    print(" ", row)

sql = (
    "SELECT trips.trip_id, roads.travel_min FROM trips "
    "JOIN roads ON trips.pickup_zone = roads.src "
    "WHERE trips.fare > 30"
)
plan = engine.plan(sql)
table_stats = {t: engine.table_stats(t) for t in ("trips", "roads")}

print(f"\nQuery: {sql}")
print("estimated cardinality, unoptimized plan:",
      round(estimate_cardinality(plan, table_stats, engine.catalog), 1))
optimized = optimize(plan, table_stats, engine.catalog)
print("estimated cardinality, optimized plan:  ",
      round(estimate_cardinality(optimized, table_stats, engine.catalog), 1))
print("join-intermediate cost before:", round(plan_cost(plan, table_stats, engine.catalog), 1))
print("join-intermediate cost after: ", round(plan_cost(optimized, table_stats, engine.catalog), 1))
print("\nThe filter on fare now sits directly over the trips scan and unused")
print("columns are projected away before the join:")
print(optimized)
