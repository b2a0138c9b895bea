"""Query AST produced by the parser, plus a printer that round-trips."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..expr import Aggregate, Arith, ColumnRef, Compare, Expression, Literal, Logic


class GroupMode(str, Enum):
    PLAIN = "Plain"
    ROLLUP = "Rollup"
    CUBE = "Cube"


@dataclass(frozen=True)
class SelectItem:
    expr: Expression
    alias: str | None = None


@dataclass(frozen=True)
class JoinClause:
    table: str
    left: ColumnRef
    right: ColumnRef


@dataclass(frozen=True)
class OrderItem:
    ref: ColumnRef
    ascending: bool = True


@dataclass(frozen=True)
class Query:
    select: tuple[SelectItem, ...] | None  # None means SELECT *
    table: str
    joins: tuple[JoinClause, ...] = ()
    where: Optional[Expression] = None
    group_by: tuple[ColumnRef, ...] = ()
    group_mode: GroupMode = GroupMode.PLAIN
    order_by: tuple[OrderItem, ...] = ()
    limit: Optional[int] = None


def expr_to_sql(expr: Expression) -> str:
    if isinstance(expr, ColumnRef):
        return expr.label()
    if isinstance(expr, Literal):
        v = expr.value
        if isinstance(v, bool):
            return "TRUE" if v else "FALSE"
        if isinstance(v, str):
            return "'" + v.replace("'", "''") + "'"
        return repr(v)
    if isinstance(expr, Arith):
        return f"({expr_to_sql(expr.left)} {expr.op} {expr_to_sql(expr.right)})"
    if isinstance(expr, Compare):
        return f"({expr_to_sql(expr.left)} {expr.op} {expr_to_sql(expr.right)})"
    if isinstance(expr, Logic):
        if expr.op == "NOT":
            return f"(NOT {expr_to_sql(expr.left)})"
        return f"({expr_to_sql(expr.left)} {expr.op} {expr_to_sql(expr.right)})"
    if isinstance(expr, Aggregate):
        arg = "*" if expr.arg is None else expr_to_sql(expr.arg)
        return f"{expr.func}({arg})"
    raise TypeError(f"unsupported expression node {expr!r}")


def query_to_sql(q: Query) -> str:
    if q.select is None:
        select = "*"
    else:
        parts = []
        for item in q.select:
            text = expr_to_sql(item.expr)
            if item.alias:
                text += f" AS {item.alias}"
            parts.append(text)
        select = ", ".join(parts)
    out = [f"SELECT {select} FROM {q.table}"]
    for j in q.joins:
        out.append(f"JOIN {j.table} ON {j.left.label()} = {j.right.label()}")
    if q.where is not None:
        out.append(f"WHERE {expr_to_sql(q.where)}")
    if q.group_by:
        out.append("GROUP BY " + ", ".join(ref.label() for ref in q.group_by))
        if q.group_mode is GroupMode.ROLLUP:
            out.append("WITH ROLLUP")
        elif q.group_mode is GroupMode.CUBE:
            out.append("WITH CUBE")
    if q.order_by:
        keys = ", ".join(f"{o.ref.label()} {'ASC' if o.ascending else 'DESC'}" for o in q.order_by)
        out.append(f"ORDER BY {keys}")
    if q.limit is not None:
        out.append(f"LIMIT {q.limit}")
    return " ".join(out)
