"""Cost-based optimization: cardinality estimates and plan rewrites.

The cost of a plan is the sum of the estimated cardinalities of its
intermediate (join) results. Estimates use the textbook assumptions:
uniform value distributions within min/max, independent conjuncts, and
equi-join selectivity 1 / max(ndv of either side).

optimize() applies, in order: predicate pushdown (split conjuncts, sink
each to the deepest input that can evaluate it), join reordering (exact
dynamic programming up to 6 relations, greedy beyond), and projection
pruning above the scans. The identity transform is always a legal result,
so anything unrecognized is returned unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

from .catalog import Catalog
from .errors import PlanError
from .expr import ColumnRef, Compare, Expression, Literal, Logic, column_refs
from .model import PlanSchema
from .sql.logical import (
    AggregateNode,
    FilterNode,
    JoinNode,
    LimitNode,
    LogicalPlan,
    ProjectNode,
    ScanNode,
    SortNode,
    output_plan_schema,
)
from .stats import TableStats

DEFAULT_SELECTIVITY = 1.0 / 3.0
EXACT_DP_LIMIT = 6


@dataclass(frozen=True)
class JoinEdge:
    left_table: str
    left_col: str
    right_table: str
    right_col: str


def _column_ndv(ref: ColumnRef, schema: PlanSchema, stats: dict[str, TableStats]) -> float | None:
    idx = schema.try_resolve(ref.qualifier, ref.name)
    if idx is None:
        return None
    col = schema.columns[idx]
    table_stats = stats.get(col.qualifier) if col.qualifier else None
    if table_stats is None:
        return None
    col_stats = table_stats.columns.get(col.name)
    return col_stats.ndv_estimate if col_stats else None


def _column_range(ref: ColumnRef, schema: PlanSchema, stats: dict[str, TableStats]):
    idx = schema.try_resolve(ref.qualifier, ref.name)
    if idx is None:
        return None
    col = schema.columns[idx]
    table_stats = stats.get(col.qualifier) if col.qualifier else None
    if table_stats is None:
        return None
    col_stats = table_stats.columns.get(col.name)
    if col_stats is None:
        return None
    return col_stats.min, col_stats.max


def _clamp(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def selectivity(pred: Expression, schema: PlanSchema, stats: dict[str, TableStats]) -> float:
    """Estimated fraction of rows satisfying pred, in [0, 1]."""
    if isinstance(pred, Literal):
        if pred.value is True:
            return 1.0
        if pred.value is False:
            return 0.0
        return DEFAULT_SELECTIVITY
    if isinstance(pred, Logic):
        if pred.op == "NOT":
            return _clamp(1.0 - selectivity(pred.left, schema, stats))
        ls = selectivity(pred.left, schema, stats)
        rs = selectivity(pred.right, schema, stats)
        if pred.op == "AND":
            return _clamp(ls * rs)
        return _clamp(ls + rs - ls * rs)
    if isinstance(pred, Compare):
        return _compare_selectivity(pred, schema, stats)
    return DEFAULT_SELECTIVITY


def _compare_selectivity(pred: Compare, schema: PlanSchema, stats: dict[str, TableStats]) -> float:
    left, right, op = pred.left, pred.right, pred.op
    if isinstance(left, Literal) and isinstance(right, ColumnRef):
        flipped = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}
        left, right, op = right, left, flipped.get(op, op)
    if isinstance(left, ColumnRef) and isinstance(right, ColumnRef):
        if op == "=":
            l_ndv = _column_ndv(left, schema, stats)
            r_ndv = _column_ndv(right, schema, stats)
            if l_ndv and r_ndv and max(l_ndv, r_ndv) >= 1.0:
                return _clamp(1.0 / max(l_ndv, r_ndv))
        return DEFAULT_SELECTIVITY
    if isinstance(left, ColumnRef) and isinstance(right, Literal):
        if op == "=":
            ndv = _column_ndv(left, schema, stats)
            return _clamp(1.0 / ndv) if ndv and ndv >= 1.0 else DEFAULT_SELECTIVITY
        if op == "<>":
            ndv = _column_ndv(left, schema, stats)
            return _clamp(1.0 - 1.0 / ndv) if ndv and ndv >= 1.0 else DEFAULT_SELECTIVITY
        if op in ("<", "<=", ">", ">="):
            bounds = _column_range(left, schema, stats)
            value = right.value
            if (
                bounds is not None
                and isinstance(value, (int, float))
                and not isinstance(value, bool)
                and isinstance(bounds[0], (int, float))
                and isinstance(bounds[1], (int, float))
            ):
                lo, hi = float(bounds[0]), float(bounds[1])
                v = float(value)
                if hi <= lo:
                    # Degenerate range: the whole column is one point.
                    if op == "<":
                        return 1.0 if lo < v else 0.0
                    if op == "<=":
                        return 1.0 if lo <= v else 0.0
                    if op == ">":
                        return 1.0 if lo > v else 0.0
                    return 1.0 if lo >= v else 0.0
                frac_below = _clamp((v - lo) / (hi - lo))
                if op in ("<", "<="):
                    return frac_below
                return _clamp(1.0 - frac_below)
            return DEFAULT_SELECTIVITY
    return DEFAULT_SELECTIVITY


def estimate_cardinality(plan: LogicalPlan, stats: dict[str, TableStats], catalog: Catalog) -> float:
    """Estimated output row count for a plan node."""
    if isinstance(plan, ScanNode):
        if plan.table not in stats:
            raise PlanError(f"no statistics for table {plan.table!r}; run analyze first")
        return float(stats[plan.table].row_count)
    if isinstance(plan, FilterNode):
        child = estimate_cardinality(plan.input, stats, catalog)
        schema = output_plan_schema(plan.input, catalog)
        return child * selectivity(plan.predicate, schema, stats)
    if isinstance(plan, ProjectNode):
        return estimate_cardinality(plan.input, stats, catalog)
    if isinstance(plan, JoinNode):
        left = estimate_cardinality(plan.left, stats, catalog)
        right = estimate_cardinality(plan.right, stats, catalog)
        left_schema = output_plan_schema(plan.left, catalog)
        right_schema = output_plan_schema(plan.right, catalog)
        card = left * right
        for l_ref, r_ref in plan.pairs:
            l_ndv = _column_ndv(l_ref, left_schema, stats)
            r_ndv = _column_ndv(r_ref, right_schema, stats)
            divisor = max(l_ndv or 0.0, r_ndv or 0.0)
            if divisor >= 1.0:
                card /= divisor
        return card
    if isinstance(plan, AggregateNode):
        child = estimate_cardinality(plan.input, stats, catalog)
        schema = output_plan_schema(plan.input, catalog)
        from .executor import grouping_sets

        names = tuple(ref.name for ref in plan.group_refs)
        ndv_by_name = {}
        for ref in plan.group_refs:
            ndv_by_name[ref.name] = _column_ndv(ref, schema, stats) or 1.0
        total = 0.0
        for subset in grouping_sets(names, plan.mode):
            groups = 1.0
            for name in subset:
                groups *= max(ndv_by_name[name], 1.0)
            total += groups
        return min(total, max(child, 1.0))
    if isinstance(plan, SortNode):
        return estimate_cardinality(plan.input, stats, catalog)
    if isinstance(plan, LimitNode):
        return min(float(plan.n), estimate_cardinality(plan.input, stats, catalog))
    raise PlanError(f"unknown plan node {plan!r}")


def plan_cost(plan: LogicalPlan, stats: dict[str, TableStats], catalog: Catalog) -> float:
    """Sum of estimated cardinalities of all join intermediates in the plan."""
    cost = 0.0
    if isinstance(plan, JoinNode):
        cost += estimate_cardinality(plan, stats, catalog)
        cost += plan_cost(plan.left, stats, catalog) + plan_cost(plan.right, stats, catalog)
    elif isinstance(plan, (FilterNode, ProjectNode, AggregateNode, SortNode, LimitNode)):
        cost += plan_cost(plan.input, stats, catalog)
    return cost


# Join ordering.

def _edge_selectivity(edge: JoinEdge, stats: dict[str, TableStats]) -> float:
    def ndv(table: str, col: str) -> float:
        ts = stats.get(table)
        if ts is None or col not in ts.columns:
            return 0.0
        return ts.columns[col].ndv_estimate

    divisor = max(ndv(edge.left_table, edge.left_col), ndv(edge.right_table, edge.right_col))
    return 1.0 / divisor if divisor >= 1.0 else 1.0


def choose_join_order(
    leaves: dict[str, LogicalPlan],
    edges: list[JoinEdge],
    stats: dict[str, TableStats],
    catalog: Catalog,
) -> LogicalPlan:
    """Pick a join tree: exact DP for <= 6 relations, greedy above that.

    Raises PlanError when the join graph is disconnected (a cross product
    would be required). Ties break toward lexicographically smaller table
    names via deterministic iteration order.
    """
    if not leaves:
        raise PlanError("join ordering needs at least one relation")
    names = sorted(leaves)
    if len(names) == 1:
        return leaves[names[0]]
    index = {name: i for i, name in enumerate(names)}
    leaf_cards = {name: estimate_cardinality(leaves[name], stats, catalog) for name in names}
    for edge in edges:
        if edge.left_table not in index or edge.right_table not in index:
            raise PlanError(f"join edge references unknown relation {edge}")
    sels = [_edge_selectivity(edge, stats) for edge in edges]

    if len(names) <= EXACT_DP_LIMIT:
        return _dp_join_order(names, index, leaf_cards, edges, sels, leaves)
    return _greedy_join_order(names, leaf_cards, edges, sels, leaves)


def _dp_join_order(names, index, leaf_cards, edges, sels, leaves) -> LogicalPlan:
    n = len(names)
    full = (1 << n) - 1
    edge_bits = [
        (1 << index[e.left_table], 1 << index[e.right_table], e, sel)
        for e, sel in zip(edges, sels)
    ]

    card_memo: dict[int, float] = {}

    def subset_card(mask: int) -> float:
        if mask in card_memo:
            return card_memo[mask]
        value = 1.0
        for i in range(n):
            if mask & (1 << i):
                value *= leaf_cards[names[i]]
        for l_bit, r_bit, _edge, sel in edge_bits:
            if (mask & l_bit) and (mask & r_bit):
                value *= sel
        card_memo[mask] = value
        return value

    best_cost: dict[int, float] = {}
    best_plan: dict[int, LogicalPlan] = {}
    for i, name in enumerate(names):
        best_cost[1 << i] = 0.0
        best_plan[1 << i] = leaves[name]

    for mask in range(1, full + 1):
        if mask in best_cost or bin(mask).count("1") < 2:
            continue
        sub = (mask - 1) & mask
        while sub > 0:
            rest = mask ^ sub
            if rest and sub in best_cost and rest in best_cost:
                crossing = [
                    (l_bit, edge)
                    for l_bit, r_bit, edge, _sel in edge_bits
                    if ((sub & l_bit) and (rest & r_bit)) or ((rest & l_bit) and (sub & r_bit))
                ]
                if crossing:
                    cost = best_cost[sub] + best_cost[rest] + subset_card(mask)
                    if mask not in best_cost or cost < best_cost[mask]:
                        pairs = _orient_pairs(crossing, sub)
                        best_cost[mask] = cost
                        best_plan[mask] = JoinNode(best_plan[sub], best_plan[rest], pairs)
            sub = (sub - 1) & mask

    if full not in best_plan:
        raise PlanError("join graph is disconnected; a cross product would be required")
    return best_plan[full]


def _orient_pairs(crossing, left_mask: int):
    pairs = []
    for l_bit, edge in crossing:
        if left_mask & l_bit:
            pairs.append(
                (ColumnRef(edge.left_col, edge.left_table), ColumnRef(edge.right_col, edge.right_table))
            )
        else:
            pairs.append(
                (ColumnRef(edge.right_col, edge.right_table), ColumnRef(edge.left_col, edge.left_table))
            )
    return tuple(pairs)


def _greedy_join_order(names, leaf_cards, edges: list[JoinEdge], sels, leaves) -> LogicalPlan:
    sel_of = {i: s for i, s in enumerate(sels)}
    by_pair: dict[tuple[str, str], list[int]] = {}
    for i, edge in enumerate(edges):
        key = tuple(sorted((edge.left_table, edge.right_table)))
        by_pair.setdefault(key, []).append(i)

    def pair_card(a: str, b: str) -> float:
        card = leaf_cards[a] * leaf_cards[b]
        for i in by_pair.get(tuple(sorted((a, b))), []):
            card *= sel_of[i]
        return card

    if not by_pair:
        raise PlanError("join graph is disconnected; a cross product would be required")
    start = min(sorted(by_pair), key=lambda pair: (pair_card(*pair), pair))
    a, b = start
    joined = {a, b}
    plan: LogicalPlan = JoinNode(
        leaves[a], leaves[b], _orient_named_pairs([edges[i] for i in by_pair[start]], left_tables={a})
    )
    current_card = pair_card(a, b)

    remaining = [t for t in names if t not in joined]
    while remaining:
        scored = []
        for t in remaining:
            crossing = [
                i
                for i, e in enumerate(edges)
                if (e.left_table in joined and e.right_table == t)
                or (e.right_table in joined and e.left_table == t)
            ]
            if not crossing:
                continue
            card = current_card * leaf_cards[t]
            for i in crossing:
                card *= sel_of[i]
            scored.append((card, t, crossing))
        if not scored:
            raise PlanError("join graph is disconnected; a cross product would be required")
        scored.sort(key=lambda item: (item[0], item[1]))
        card, t, crossing = scored[0]
        plan = JoinNode(plan, leaves[t], _orient_named_pairs([edges[i] for i in crossing], left_tables=joined))
        joined.add(t)
        current_card = card
        remaining.remove(t)
    return plan


def _orient_named_pairs(edges: list[JoinEdge], left_tables: set[str]):
    pairs = []
    for edge in edges:
        if edge.left_table in left_tables:
            pairs.append(
                (ColumnRef(edge.left_col, edge.left_table), ColumnRef(edge.right_col, edge.right_table))
            )
        else:
            pairs.append(
                (ColumnRef(edge.right_col, edge.right_table), ColumnRef(edge.left_col, edge.left_table))
            )
    return tuple(pairs)


# Plan rewriting.

class _UnsupportedShape(Exception):
    pass


def split_conjuncts(pred: Expression) -> list[Expression]:
    if isinstance(pred, Logic) and pred.op == "AND":
        return split_conjuncts(pred.left) + split_conjuncts(pred.right)
    return [pred]


def and_combine(preds: list[Expression]) -> Expression:
    combined = preds[0]
    for p in preds[1:]:
        combined = Logic("AND", combined, p)
    return combined


def optimize(plan: LogicalPlan, stats: dict[str, TableStats], catalog: Catalog) -> LogicalPlan:
    """Pushdown + join reordering + projection pruning; semantics-preserving."""
    try:
        return _optimize(plan, stats, catalog)
    except _UnsupportedShape:
        return plan


def _optimize(plan: LogicalPlan, stats: dict[str, TableStats], catalog: Catalog) -> LogicalPlan:
    wrappers = []
    node = plan
    while isinstance(node, (LimitNode, SortNode, ProjectNode, AggregateNode)):
        wrappers.append(node)
        node = node.input

    conjuncts: list[Expression] = []
    leaves: dict[str, LogicalPlan] = {}
    edges: list[JoinEdge] = []

    def walk(region: LogicalPlan) -> None:
        if isinstance(region, FilterNode):
            conjuncts.extend(split_conjuncts(region.predicate))
            walk(region.input)
        elif isinstance(region, JoinNode):
            left_schema = output_plan_schema(region.left, catalog)
            right_schema = output_plan_schema(region.right, catalog)
            for l_ref, r_ref in region.pairs:
                l_col = left_schema.columns[left_schema.resolve(l_ref.qualifier, l_ref.name)]
                r_col = right_schema.columns[right_schema.resolve(r_ref.qualifier, r_ref.name)]
                if l_col.qualifier is None or r_col.qualifier is None:
                    raise _UnsupportedShape()
                edges.append(JoinEdge(l_col.qualifier, l_col.name, r_col.qualifier, r_col.name))
            walk(region.left)
            walk(region.right)
        elif isinstance(region, ScanNode):
            leaves[region.table] = region
        else:
            raise _UnsupportedShape()

    walk(node)
    if not leaves:
        raise _UnsupportedShape()

    region_schema = _region_schema(leaves, catalog)

    # Predicate pushdown: single-table conjuncts sink to their scan.
    per_leaf: dict[str, list[Expression]] = {t: [] for t in leaves}
    cross: list[Expression] = []
    for pred in conjuncts:
        tables = _pred_tables(pred, region_schema)
        if tables is not None and len(tables) == 1:
            per_leaf[next(iter(tables))].append(pred)
        else:
            cross.append(pred)

    leaf_plans: dict[str, LogicalPlan] = {}
    for table, scan in leaves.items():
        if per_leaf[table]:
            leaf_plans[table] = FilterNode(scan, and_combine(per_leaf[table]))
        else:
            leaf_plans[table] = scan

    # Join reordering.
    have_stats = all(t in stats for t in leaves)
    if len(leaves) >= 2 and have_stats:
        region_plan = choose_join_order(leaf_plans, edges, stats, catalog)
    elif len(leaves) == 1:
        region_plan = next(iter(leaf_plans.values()))
    else:
        region_plan = _rebuild_original_joins(node, leaf_plans)

    if cross:
        region_plan = FilterNode(region_plan, and_combine(cross))

    # Projection pruning: keep only columns some consumer references.
    used = _used_region_columns(wrappers, conjuncts, edges, region_schema)
    region_plan = _prune_leaves(region_plan, used, catalog)

    out = region_plan
    for wrapper in reversed(wrappers):
        if isinstance(wrapper, LimitNode):
            out = LimitNode(out, wrapper.n)
        elif isinstance(wrapper, SortNode):
            out = SortNode(out, wrapper.keys)
        elif isinstance(wrapper, ProjectNode):
            out = ProjectNode(out, wrapper.exprs, wrapper.names)
        elif isinstance(wrapper, AggregateNode):
            out = AggregateNode(out, wrapper.group_refs, wrapper.mode, wrapper.aggs)
    return out


def _region_schema(leaves: dict[str, LogicalPlan], catalog: Catalog) -> PlanSchema:
    schema = PlanSchema([])
    for table in sorted(leaves):
        schema = schema.concat(PlanSchema.from_table(table, catalog.schema(table)))
    return schema


def _pred_tables(pred: Expression, region_schema: PlanSchema) -> set[str] | None:
    tables = set()
    for ref in column_refs(pred):
        idx = region_schema.try_resolve(ref.qualifier, ref.name)
        if idx is None:
            return None
        qualifier = region_schema.columns[idx].qualifier
        if qualifier is None:
            return None
        tables.add(qualifier)
    return tables


def _rebuild_original_joins(region: LogicalPlan, leaf_plans: dict[str, LogicalPlan]) -> LogicalPlan:
    if isinstance(region, FilterNode):
        return _rebuild_original_joins(region.input, leaf_plans)
    if isinstance(region, JoinNode):
        return JoinNode(
            _rebuild_original_joins(region.left, leaf_plans),
            _rebuild_original_joins(region.right, leaf_plans),
            region.pairs,
        )
    if isinstance(region, ScanNode):
        return leaf_plans[region.table]
    raise _UnsupportedShape()


def _used_region_columns(wrappers, conjuncts, edges, region_schema: PlanSchema) -> set[tuple[str, str]]:
    used: set[tuple[str, str]] = set()

    def mark(ref: ColumnRef) -> None:
        idx = region_schema.try_resolve(ref.qualifier, ref.name)
        if idx is not None:
            col = region_schema.columns[idx]
            if col.qualifier is not None:
                used.add((col.qualifier, col.name))

    for wrapper in wrappers:
        if isinstance(wrapper, ProjectNode):
            for expr in wrapper.exprs:
                for ref in column_refs(expr):
                    mark(ref)
        elif isinstance(wrapper, AggregateNode):
            for ref in wrapper.group_refs:
                mark(ref)
            for _func, arg in wrapper.aggs:
                if arg is not None:
                    for ref in column_refs(arg):
                        mark(ref)
    for pred in conjuncts:
        for ref in column_refs(pred):
            mark(ref)
    for edge in edges:
        used.add((edge.left_table, edge.left_col))
        used.add((edge.right_table, edge.right_col))
    return used


def _prune_leaves(plan: LogicalPlan, used: set[tuple[str, str]], catalog: Catalog) -> LogicalPlan:
    from .sql.logical import scan_tables

    if isinstance(plan, JoinNode):
        return JoinNode(
            _prune_leaves(plan.left, used, catalog),
            _prune_leaves(plan.right, used, catalog),
            plan.pairs,
        )
    tables = scan_tables(plan)
    if isinstance(plan, FilterNode) and len(tables) > 1:
        # Cross-table filter above the join tree; prune below it.
        return FilterNode(_prune_leaves(plan.input, used, catalog), plan.predicate)
    if len(tables) != 1 or not isinstance(plan, (ScanNode, FilterNode)):
        return plan
    table = tables[0]
    schema = catalog.schema(table)
    keep = [c.name for c in schema.columns if (table, c.name) in used]
    if not keep:
        keep = [schema.columns[0].name]
    if len(keep) == len(schema.columns):
        return plan
    refs = tuple(ColumnRef(name, qualifier=table) for name in keep)
    return ProjectNode(plan, refs, names=None)
