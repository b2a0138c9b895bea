"""Lowers a parsed query to a LogicalPlan with all names resolved and typed.

Plan shape: Limit?(Sort?(Project(Aggregate?(Filter?(join tree))))). ORDER BY
keys resolve against the projected output (select aliases or output column
names). In aggregate queries every column reference outside an aggregate
argument must be one of the GROUP BY columns.
"""
from __future__ import annotations

from ..catalog import Catalog
from ..errors import PlanError
from ..expr import (
    Aggregate,
    Arith,
    ColumnRef,
    Compare,
    Expression,
    Logic,
    contains_aggregate,
    infer_type,
)
from ..model import ColumnType, PlanSchema
from .ast import GroupMode, Query, expr_to_sql
from .logical import (
    GROUPING_ID,
    AggregateNode,
    FilterNode,
    JoinNode,
    LimitNode,
    LogicalPlan,
    ProjectNode,
    ScanNode,
    SortNode,
    agg_output_name,
    output_plan_schema,
)


def plan_query(query: Query, catalog: Catalog) -> LogicalPlan:
    plan, schema = _plan_from(query, catalog)

    if query.where is not None:
        if contains_aggregate(query.where):
            raise PlanError("aggregates are not allowed in WHERE")
        if infer_type(query.where, schema) is not ColumnType.BOOL:
            raise PlanError("WHERE predicate must be boolean")
        plan = FilterNode(plan, query.where)

    is_aggregate = bool(query.group_by) or any(
        contains_aggregate(item.expr) for item in (query.select or ())
    )
    if is_aggregate:
        plan, out_names, out_exprs = _plan_aggregate(query, plan, schema)
    else:
        out_names, out_exprs = _select_outputs(query, schema)
        plan = ProjectNode(plan, tuple(out_exprs), tuple(out_names))

    project_schema = output_plan_schema(plan, catalog)

    if query.order_by:
        keys = []
        for item in query.order_by:
            keys.append((_resolve_order_key(item.ref, project_schema), item.ascending))
        plan = SortNode(plan, tuple(keys))
    if query.limit is not None:
        plan = LimitNode(plan, query.limit)
    # Forces full type checking of every expression in the plan.
    output_plan_schema(plan, catalog)
    return plan


def _plan_from(query: Query, catalog: Catalog) -> tuple[LogicalPlan, PlanSchema]:
    seen = {query.table}
    plan: LogicalPlan = ScanNode(query.table)
    schema = PlanSchema.from_table(query.table, catalog.schema(query.table))
    for join in query.joins:
        if join.table in seen:
            raise PlanError(f"table {join.table!r} appears twice; self-joins are not supported")
        seen.add(join.table)
        right_schema = PlanSchema.from_table(join.table, catalog.schema(join.table))
        left_ref, right_ref = _orient_join_pair(join.left, join.right, schema, right_schema)
        _check_join_types(left_ref, right_ref, schema, right_schema)
        plan = JoinNode(plan, ScanNode(join.table), ((left_ref, right_ref),))
        schema = schema.concat(right_schema)
    return plan, schema


def _orient_join_pair(a: ColumnRef, b: ColumnRef, left: PlanSchema, right: PlanSchema):
    def side_of(ref: ColumnRef) -> str:
        in_left = left.count_matches(ref.qualifier, ref.name)
        in_right = right.count_matches(ref.qualifier, ref.name)
        if in_left + in_right == 0:
            raise PlanError(f"unknown column {ref.label()!r} in join condition")
        if in_left + in_right > 1:
            raise PlanError(f"ambiguous column {ref.label()!r} in join condition: qualify it")
        return "left" if in_left else "right"

    a_side = side_of(a)
    b_side = side_of(b)
    if a_side == b_side:
        raise PlanError(
            f"join condition {a.label()} = {b.label()} must reference one column "
            "from each side of the join"
        )
    return (a, b) if a_side == "left" else (b, a)


def _check_join_types(left_ref: ColumnRef, right_ref: ColumnRef, left: PlanSchema, right: PlanSchema) -> None:
    lt = left.columns[left.resolve(left_ref.qualifier, left_ref.name)].ctype
    rt = right.columns[right.resolve(right_ref.qualifier, right_ref.name)].ctype
    numeric = (ColumnType.INT64, ColumnType.FLOAT64)
    if lt != rt and not (lt in numeric and rt in numeric):
        raise PlanError(f"join columns have incompatible types {lt.value} and {rt.value}")


def _select_outputs(query: Query, schema: PlanSchema) -> tuple[list[str], list[Expression]]:
    if query.select is None:
        names = [c.name for c in output_names_for_star(schema)]
        exprs: list[Expression] = [
            ColumnRef(c.name, qualifier=c.qualifier) for c in schema.columns
        ]
        return names, exprs
    names = []
    exprs = []
    for item in query.select:
        names.append(item.alias or _default_output_name(item.expr))
        exprs.append(item.expr)
    return names, exprs


def _default_output_name(expr: Expression) -> str:
    # Bare references keep just the column name, like mainstream engines.
    if isinstance(expr, ColumnRef):
        return expr.name
    return expr_to_sql(expr)


def output_names_for_star(schema: PlanSchema):
    return schema.to_schema().columns


def _plan_aggregate(query: Query, plan: LogicalPlan, schema: PlanSchema):
    if query.select is None:
        raise PlanError("SELECT * cannot be used in an aggregate query")
    group_refs = list(query.group_by)
    group_indexes = []
    for ref in group_refs:
        idx = schema.resolve(ref.qualifier, ref.name)
        if idx in group_indexes:
            raise PlanError(f"duplicate GROUP BY column {ref.label()!r}")
        group_indexes.append(idx)

    aggs: list[tuple[str, Expression | None]] = []
    agg_names: dict[Aggregate, str] = {}
    for item in query.select:
        for agg in _collect_aggregates(item.expr):
            if agg.arg is not None and contains_aggregate(agg.arg):
                raise PlanError("aggregate calls cannot be nested")
            if agg not in agg_names:
                agg_names[agg] = agg_output_name(agg.func, agg.arg)
                aggs.append((agg.func, agg.arg))
        _check_bare_refs(item.expr, schema, group_indexes)

    agg_node = AggregateNode(plan, tuple(group_refs), query.group_mode, tuple(aggs))

    out_names = []
    out_exprs = []
    for item in query.select:
        out_names.append(item.alias or _default_output_name(item.expr))
        out_exprs.append(_rewrite_aggregates(item.expr, agg_names))
    if query.group_mode is not GroupMode.PLAIN:
        out_names.append(GROUPING_ID)
        out_exprs.append(ColumnRef(GROUPING_ID))
    return ProjectNode(agg_node, tuple(out_exprs), tuple(out_names)), out_names, out_exprs


def _collect_aggregates(expr: Expression) -> list[Aggregate]:
    if isinstance(expr, Aggregate):
        return [expr]
    if isinstance(expr, (Arith, Compare)):
        return _collect_aggregates(expr.left) + _collect_aggregates(expr.right)
    if isinstance(expr, Logic):
        found = _collect_aggregates(expr.left)
        if expr.right is not None:
            found += _collect_aggregates(expr.right)
        return found
    return []


def _check_bare_refs(expr: Expression, schema: PlanSchema, group_indexes: list[int]) -> None:
    """Column refs outside aggregate arguments must be GROUP BY columns."""
    if isinstance(expr, Aggregate):
        return
    if isinstance(expr, ColumnRef):
        idx = schema.resolve(expr.qualifier, expr.name)
        if idx not in group_indexes:
            raise PlanError(
                f"column {expr.label()!r} must appear in GROUP BY or inside an aggregate"
            )
        return
    if isinstance(expr, (Arith, Compare)):
        _check_bare_refs(expr.left, schema, group_indexes)
        _check_bare_refs(expr.right, schema, group_indexes)
    elif isinstance(expr, Logic):
        _check_bare_refs(expr.left, schema, group_indexes)
        if expr.right is not None:
            _check_bare_refs(expr.right, schema, group_indexes)


def _rewrite_aggregates(expr: Expression, agg_names: dict[Aggregate, str]) -> Expression:
    if isinstance(expr, Aggregate):
        return ColumnRef(agg_names[expr])
    if isinstance(expr, Arith):
        return Arith(expr.op, _rewrite_aggregates(expr.left, agg_names), _rewrite_aggregates(expr.right, agg_names))
    if isinstance(expr, Compare):
        return Compare(expr.op, _rewrite_aggregates(expr.left, agg_names), _rewrite_aggregates(expr.right, agg_names))
    if isinstance(expr, Logic):
        right = None if expr.right is None else _rewrite_aggregates(expr.right, agg_names)
        return Logic(expr.op, _rewrite_aggregates(expr.left, agg_names), right)
    return expr


def _resolve_order_key(ref: ColumnRef, project_schema: PlanSchema) -> str:
    wanted = ref.label()
    names = [c.name for c in project_schema.to_schema().columns]
    if wanted in names:
        return wanted
    if ref.qualifier is None and ref.name in names:
        return ref.name
    raise PlanError(f"ORDER BY column {wanted!r} is not in the select list")
