"""Logical plan operators.

Nodes are frozen dataclasses so plans compare and hash structurally. Column
references stay symbolic (qualifier, name); each consumer resolves them
against its input's PlanSchema, which keeps rewrites such as predicate
pushdown and join reordering free of index bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..catalog import Catalog
from ..errors import PlanError
from ..expr import Aggregate, ColumnRef, Expression, aggregate_type, infer_type
from ..model import ColumnType, PlanColumn, PlanSchema, Schema
from .ast import GroupMode

GROUPING_ID = "grouping_id"


@dataclass(frozen=True)
class ScanNode:
    table: str


@dataclass(frozen=True)
class FilterNode:
    input: "LogicalPlan"
    predicate: Expression


@dataclass(frozen=True)
class ProjectNode:
    input: "LogicalPlan"
    exprs: tuple[Expression, ...]
    # Output column names; None keeps each column's source qualifier and name
    # (used by pruning projections so qualified references still resolve).
    names: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class JoinNode:
    left: "LogicalPlan"
    right: "LogicalPlan"
    # Equi-join pairs, each (left side ref, right side ref).
    pairs: tuple[tuple[ColumnRef, ColumnRef], ...]


@dataclass(frozen=True)
class AggregateNode:
    input: "LogicalPlan"
    group_refs: tuple[ColumnRef, ...]
    mode: GroupMode
    # (function, argument) pairs; argument None means COUNT(*).
    aggs: tuple[tuple[str, Optional[Expression]], ...]


@dataclass(frozen=True)
class SortNode:
    input: "LogicalPlan"
    # (column name in input schema, ascending) pairs.
    keys: tuple[tuple[str, bool], ...]


@dataclass(frozen=True)
class LimitNode:
    input: "LogicalPlan"
    n: int


LogicalPlan = Union[ScanNode, FilterNode, ProjectNode, JoinNode, AggregateNode, SortNode, LimitNode]


def agg_output_name(func: str, arg: Optional[Expression]) -> str:
    from .ast import expr_to_sql

    return f"{func}(*)" if arg is None else f"{func}({expr_to_sql(arg)})"


def output_plan_schema(plan: LogicalPlan, catalog: Catalog) -> PlanSchema:
    """Compute a node's output schema; raises PlanError on inconsistencies."""
    if isinstance(plan, ScanNode):
        return PlanSchema.from_table(plan.table, catalog.schema(plan.table))
    if isinstance(plan, FilterNode):
        return output_plan_schema(plan.input, catalog)
    if isinstance(plan, ProjectNode):
        child = output_plan_schema(plan.input, catalog)
        cols = []
        for i, expr in enumerate(plan.exprs):
            ctype = infer_type(expr, child)
            if plan.names is not None:
                cols.append(PlanColumn(None, plan.names[i], ctype))
            else:
                if not isinstance(expr, ColumnRef):
                    raise PlanError("qualifier-preserving projections may only reference columns")
                idx = child.resolve(expr.qualifier, expr.name)
                cols.append(child.columns[idx])
        return PlanSchema(cols)
    if isinstance(plan, JoinNode):
        return output_plan_schema(plan.left, catalog).concat(output_plan_schema(plan.right, catalog))
    if isinstance(plan, AggregateNode):
        child = output_plan_schema(plan.input, catalog)
        cols = []
        for ref in plan.group_refs:
            idx = child.resolve(ref.qualifier, ref.name)
            cols.append(child.columns[idx])
        for func, arg in plan.aggs:
            cols.append(PlanColumn(None, agg_output_name(func, arg), aggregate_type(Aggregate(func, arg), child)))
        if plan.mode is not GroupMode.PLAIN:
            cols.append(PlanColumn(None, GROUPING_ID, ColumnType.INT64))
        return PlanSchema(cols)
    if isinstance(plan, SortNode):
        return output_plan_schema(plan.input, catalog)
    if isinstance(plan, LimitNode):
        return output_plan_schema(plan.input, catalog)
    raise PlanError(f"unknown plan node {plan!r}")


def output_schema(plan: LogicalPlan, catalog: Catalog) -> Schema:
    return output_plan_schema(plan, catalog).to_schema()


def scan_tables(plan: LogicalPlan) -> list[str]:
    """All Scan leaf table names, in plan order."""
    if isinstance(plan, ScanNode):
        return [plan.table]
    if isinstance(plan, (FilterNode, ProjectNode, AggregateNode, SortNode, LimitNode)):
        return scan_tables(plan.input)
    if isinstance(plan, JoinNode):
        return scan_tables(plan.left) + scan_tables(plan.right)
    return []


def children(plan: LogicalPlan) -> tuple[LogicalPlan, ...]:
    if isinstance(plan, (FilterNode, ProjectNode, AggregateNode, SortNode, LimitNode)):
        return (plan.input,)
    if isinstance(plan, JoinNode):
        return (plan.left, plan.right)
    return ()
