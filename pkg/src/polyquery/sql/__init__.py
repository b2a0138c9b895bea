from .ast import Query, SelectItem, JoinClause, OrderItem, GroupMode, query_to_sql
from .parser import parse_sql
from .logical import (
    LogicalPlan,
    ScanNode,
    FilterNode,
    ProjectNode,
    JoinNode,
    AggregateNode,
    SortNode,
    LimitNode,
    output_plan_schema,
    output_schema,
)
from .planner import plan_query

__all__ = [
    "Query",
    "SelectItem",
    "JoinClause",
    "OrderItem",
    "GroupMode",
    "query_to_sql",
    "parse_sql",
    "LogicalPlan",
    "ScanNode",
    "FilterNode",
    "ProjectNode",
    "JoinNode",
    "AggregateNode",
    "SortNode",
    "LimitNode",
    "output_plan_schema",
    "output_schema",
    "plan_query",
]
