"""The graph paradigm: the road network as an edge-list relation.

Any relation with two endpoint columns converts to a directed weighted
graph; results come back as relations, so shortest-path distances can be
joined against trip data again.
"""
from pathlib import Path

from polyquery import Engine, connected_components, relation_to_graph, shortest_paths
from polyquery.cli import format_table
from polyquery.pipeline import join_results

DATA = Path(__file__).resolve().parent.parent / "data"
engine = Engine(DATA)

roads = engine.catalog.scan("roads")
graph = relation_to_graph(roads, "src", "dst", "travel_min")
print(f"road network: {len(graph.nodes)} zones, {graph.edge_count} directed links")

print("\nTravel time from the airport (NULL distance = unreachable):")
reachable = shortest_paths(graph, "airport")
print(format_table(reachable))

print("Connected components of the undirected road map:")
components = connected_components(graph)
print(format_table(components))

# Cross-paradigm: average fare of trips departing zones within 15 minutes
# of the airport. Graph output joins relational output on the zone name.
nearby = engine.query("SELECT pickup_zone, fare FROM trips WHERE fare > 0")
named = shortest_paths(graph, "airport")
# rename: join key must match on both sides
from polyquery.model import Column, ColumnType, Relation, Schema

renamed = Relation.from_rows(
    Schema((Column("pickup_zone", named.schema.columns[0].ctype),) + named.schema.columns[1:]),
    named.all_rows(),
)
joined = join_results(nearby, renamed, ["pickup_zone"])
totals: dict[str, list] = {}
for row in joined.rows():
    zone, fare, dist = row[0], row[1], row[2]
    if dist is not None and dist <= 15.0:
        entry = totals.setdefault(zone, [0, 0.0])
        entry[0] += 1
        entry[1] += fare
print("Zones within 15 min of the airport, by average fare:")
for zone, (count, total) in sorted(totals.items(), key=lambda kv: -kv[1][1] / kv[1][0]):
    print(f"  {zone:12s} {count:3d} trips, avg fare {total / count:6.2f}")
