"""Reference interpreter: a naive, single-threaded plan evaluator.

This is the correctness oracle for the parallel executor. Joins are
nested loops, aggregation collects each group's rows and computes results
directly (math.fsum for float sums), and nothing here shares join or
aggregation code with the executor. Semantics match execute() exactly,
including NULL handling, grouping_id emission, sort tie-breaking, and
canonical-order LIMIT.
"""
from __future__ import annotations

import math
from .catalog import Catalog
from .errors import ExecutionError
from .expr import compile_expr
from .model import (
    INT64_MAX,
    INT64_MIN,
    ColumnType,
    PlanSchema,
    Relation,
    Row,
    canonical_order,
    canonical_row_key,
    sort_rows,
)
from .sql.ast import GroupMode
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


def reference_interpret(plan: LogicalPlan, catalog: Catalog) -> Relation:
    rows, plan_schema = _eval(plan, catalog)
    return Relation.from_rows(plan_schema.to_schema(), rows)


def _eval(plan: LogicalPlan, catalog: Catalog) -> tuple[list[Row], PlanSchema]:
    if isinstance(plan, ScanNode):
        relation = catalog.scan(plan.table)
        return relation.all_rows(), PlanSchema.from_table(plan.table, relation.schema)

    if isinstance(plan, FilterNode):
        rows, schema = _eval(plan.input, catalog)
        pred = compile_expr(plan.predicate, schema)
        return [row for row in rows if pred(row) is True], schema

    if isinstance(plan, ProjectNode):
        rows, schema = _eval(plan.input, catalog)
        funcs = [compile_expr(e, schema) for e in plan.exprs]
        return [tuple(f(row) for f in funcs) for row in rows], output_plan_schema(plan, catalog)

    if isinstance(plan, JoinNode):
        left_rows, left_schema = _eval(plan.left, catalog)
        right_rows, right_schema = _eval(plan.right, catalog)
        left_idx = [left_schema.resolve(l.qualifier, l.name) for l, _ in plan.pairs]
        right_idx = [right_schema.resolve(r.qualifier, r.name) for _, r in plan.pairs]
        # Still a nested loop over all pairs; keys are extracted up front and
        # rows with NULL keys dropped (NULL never equals anything).
        lefts = []
        for lrow in left_rows:
            key = tuple(lrow[i] for i in left_idx)
            if None not in key:
                lefts.append((lrow, key))
        rights = []
        for rrow in right_rows:
            key = tuple(rrow[i] for i in right_idx)
            if None not in key:
                rights.append((rrow, key))
        out = []
        for lrow, lkey in lefts:
            for rrow, rkey in rights:
                if lkey == rkey:
                    out.append(lrow + rrow)
        return out, left_schema.concat(right_schema)

    if isinstance(plan, AggregateNode):
        return _eval_aggregate(plan, catalog)

    if isinstance(plan, SortNode):
        rows, schema = _eval(plan.input, catalog)
        names = [c.name for c in schema.to_schema().columns]
        keys = [(names.index(name), ascending) for name, ascending in plan.keys]
        return sort_rows(rows, keys), schema

    if isinstance(plan, LimitNode):
        rows, schema = _eval(plan.input, catalog)
        if not isinstance(plan.input, SortNode):
            rows = canonical_order(rows)
        return rows[: plan.n], schema

    raise ExecutionError(f"unknown plan node {plan!r}")


def _norm(v):
    if isinstance(v, float):
        return v + 0.0
    return v


def _eval_aggregate(plan: AggregateNode, catalog: Catalog) -> tuple[list[Row], PlanSchema]:
    from .executor import grouping_sets  # set expansion only; no kernel sharing
    from .expr import Aggregate, aggregate_type

    rows, schema = _eval(plan.input, catalog)
    group_idx = [schema.resolve(ref.qualifier, ref.name) for ref in plan.group_refs]
    labels = tuple(ref.label() for ref in plan.group_refs)
    label_sets = grouping_sets(labels, plan.mode)
    pos_of = {label: i for i, label in enumerate(labels)}
    sets = [tuple(pos_of[label] for label in subset) for subset in label_sets]

    agg_fns = []
    for func, arg in plan.aggs:
        out_type = aggregate_type(Aggregate(func, arg), schema)
        fn = compile_expr(arg, schema) if arg is not None else None
        agg_fns.append((func, fn, out_type))

    d = len(group_idx)
    out = []
    for set_no, positions in enumerate(sets):
        groups: dict[tuple, list[Row]] = {}
        for row in rows:
            key = tuple(_norm(row[group_idx[p]]) for p in positions)
            groups.setdefault(key, []).append(row)
        if not positions and not groups:
            groups[()] = []
        grouping_id = sum(1 << i for i in range(d) if i not in positions)
        for key in sorted(groups, key=canonical_row_key):
            members = groups[key]
            by_pos = dict(zip(positions, key))
            record = [by_pos.get(i) for i in range(d)]
            for func, fn, out_type in agg_fns:
                record.append(_compute_aggregate(func, fn, out_type, members))
            if plan.mode is not GroupMode.PLAIN:
                record.append(grouping_id)
            out.append(tuple(record))
    return out, output_plan_schema(plan, catalog)


def _compute_aggregate(func: str, fn, out_type: ColumnType, members: list[Row]):
    if func == "COUNT":
        if fn is None:
            return len(members)
        return sum(1 for row in members if fn(row) is not None)
    values = [v for v in (fn(row) for row in members) if v is not None]
    if func == "SUM":
        if not values:
            return None
        if out_type is ColumnType.FLOAT64:
            return math.fsum(values)
        total = sum(values)
        if total > INT64_MAX or total < INT64_MIN:
            raise ExecutionError("Int64 overflow in SUM")
        return total
    if func == "AVG":
        if not values:
            return None
        if all(isinstance(v, int) for v in values):
            return sum(values) / len(values)
        return math.fsum(values) / len(values)
    if func == "MIN":
        return min(values) if values else None
    if func == "MAX":
        return max(values) if values else None
    raise ExecutionError(f"unknown aggregate {func!r}")
