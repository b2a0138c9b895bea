"""Independent reference implementations used as test oracles.

Nothing here shares code with the engine's operator kernels: joins are
nested loops, shortest paths are Bellman-Ford relaxation, components come
from union-find, and join-order costs come from exhaustive tree enumeration.
"""
from __future__ import annotations

import itertools
import math

from polyquery.expr import ColumnRef
from polyquery.optimizer import plan_cost
from polyquery.sql.logical import JoinNode


def bellman_ford(nodes, edges, source):
    dist = {n: math.inf for n in nodes}
    dist[source] = 0.0
    for _ in range(len(nodes) - 1):
        changed = False
        for s, d, w in edges:
            if dist[s] + w < dist[d]:
                dist[d] = dist[s] + w
                changed = True
        if not changed:
            break
    return dist


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def nested_loop_join(left_rows, right_rows, left_idx, right_idx, keep_right=None):
    out = []
    for lrow in left_rows:
        for rrow in right_rows:
            ok = True
            for li, ri in zip(left_idx, right_idx):
                lv, rv = lrow[li], rrow[ri]
                if lv is None or rv is None or lv != rv:
                    ok = False
                    break
            if ok:
                extra = rrow if keep_right is None else tuple(rrow[i] for i in keep_right)
                out.append(lrow + extra)
    return out


def exhaustive_best_join_cost(tables, leaves, edges, stats, catalog):
    """Minimum cost over every cross-product-free binary join tree."""

    def trees(subset: frozenset):
        if len(subset) == 1:
            (name,) = subset
            yield leaves[name]
            return
        members = sorted(subset)
        for r in range(1, len(members)):
            for combo in itertools.combinations(members, r):
                left = frozenset(combo)
                right = subset - left
                if min(left) != min(members):
                    continue  # mirrored split costs the same
                crossing = [
                    e
                    for e in edges
                    if (e.left_table in left and e.right_table in right)
                    or (e.left_table in right and e.right_table in left)
                ]
                if not crossing:
                    continue
                pairs = []
                for e in crossing:
                    if e.left_table in left:
                        pairs.append(
                            (ColumnRef(e.left_col, e.left_table), ColumnRef(e.right_col, e.right_table))
                        )
                    else:
                        pairs.append(
                            (ColumnRef(e.right_col, e.right_table), ColumnRef(e.left_col, e.left_table))
                        )
                for lt in trees(left):
                    for rt in trees(right):
                        yield JoinNode(lt, rt, tuple(pairs))

    best = None
    for tree in trees(frozenset(tables)):
        cost = plan_cost(tree, stats, catalog)
        if best is None or cost < best:
            best = cost
    return best
