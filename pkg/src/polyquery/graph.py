"""Graph analytics over edge-list relations.

Graphs are directed multigraphs with non-negative float weights; node ids
are the (Utf8 or Int64) values of the endpoint columns. Results come back
as relations so they can re-enter the relational pipeline.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import GraphError
from .model import Column, ColumnType, Relation, Schema

_NODE_TYPES = (ColumnType.UTF8, ColumnType.INT64)


@dataclass
class Graph:
    node_type: ColumnType
    nodes: set = field(default_factory=set)
    adjacency: dict = field(default_factory=dict)  # node -> list[(dst, weight)]
    edge_count: int = 0

    def add_edge(self, src, dst, weight: float) -> None:
        if weight < 0:
            raise GraphError(f"negative edge weight {weight} on {src!r} -> {dst!r}")
        self.nodes.add(src)
        self.nodes.add(dst)
        self.adjacency.setdefault(src, []).append((dst, weight))
        self.edge_count += 1


def relation_to_graph(
    r: Relation,
    src_col: str,
    dst_col: str,
    weight_col: str | None = None,
) -> Graph:
    """One directed edge per row; rows keep duplicates (multigraph)."""
    names = r.schema.names()
    types = r.schema.types()
    for col in (src_col, dst_col):
        if col not in names:
            raise GraphError(f"unknown column {col!r}")
    src_idx = names.index(src_col)
    dst_idx = names.index(dst_col)
    if types[src_idx] not in _NODE_TYPES or types[dst_idx] not in _NODE_TYPES:
        raise GraphError("endpoint columns must be Utf8 or Int64")
    if types[src_idx] != types[dst_idx]:
        raise GraphError(
            f"endpoint columns must share a type, got {types[src_idx].value} and {types[dst_idx].value}"
        )
    weight_idx = None
    if weight_col is not None:
        if weight_col not in names:
            raise GraphError(f"unknown column {weight_col!r}")
        weight_idx = names.index(weight_col)
        if types[weight_idx] not in (ColumnType.INT64, ColumnType.FLOAT64):
            raise GraphError(f"weight column {weight_col!r} must be numeric")

    graph = Graph(node_type=types[src_idx])
    for row_no, row in enumerate(r.rows()):
        src, dst = row[src_idx], row[dst_idx]
        if src is None or dst is None:
            raise GraphError(f"row {row_no} has a NULL endpoint")
        if weight_idx is None:
            weight = 1.0
        else:
            w = row[weight_idx]
            if w is None:
                raise GraphError(f"row {row_no} has a NULL weight")
            weight = float(w)
        graph.add_edge(src, dst, weight)
    return graph


def shortest_paths(g: Graph, source) -> Relation:
    """Dijkstra from source: (node, distance, predecessor) rows sorted by node.

    Unreachable nodes report NULL distance and NULL predecessor.
    """
    if source not in g.nodes:
        raise GraphError(f"unknown source node {source!r}")
    dist: dict = {source: 0.0}
    pred: dict = {}
    heap: list = [(0.0, source)]
    settled = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        for neighbor, weight in g.adjacency.get(node, ()):
            nd = d + weight
            if neighbor not in dist or nd < dist[neighbor]:
                dist[neighbor] = nd
                pred[neighbor] = node
                heapq.heappush(heap, (nd, neighbor))

    schema = Schema(
        (
            Column("node", g.node_type),
            Column("distance", ColumnType.FLOAT64),
            Column("predecessor", g.node_type),
        )
    )
    rows = []
    for node in sorted(g.nodes):
        if node in dist:
            rows.append((node, dist[node], pred.get(node)))
        else:
            rows.append((node, None, None))
    return Relation.from_rows(schema, rows)


def connected_components(g: Graph) -> Relation:
    """Components of the undirected view; ids densely assigned in order of
    each component's smallest node."""
    undirected: dict = {node: set() for node in g.nodes}
    for src, edges in g.adjacency.items():
        for dst, _w in edges:
            undirected[src].add(dst)
            undirected[dst].add(src)

    component: dict = {}
    next_id = 0
    for node in sorted(g.nodes):
        if node in component:
            continue
        stack = [node]
        component[node] = next_id
        while stack:
            current = stack.pop()
            for neighbor in undirected[current]:
                if neighbor not in component:
                    component[neighbor] = next_id
                    stack.append(neighbor)
        next_id += 1

    schema = Schema(
        (
            Column("node", g.node_type),
            Column("component_id", ColumnType.INT64),
        )
    )
    rows = [(node, component[node]) for node in sorted(g.nodes)]
    return Relation.from_rows(schema, rows)
