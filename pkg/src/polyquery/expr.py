"""Scalar expressions: nodes, SQL three-valued evaluation, and static typing.

Expressions are immutable trees. Evaluation follows SQL semantics: any
arithmetic or comparison with a NULL operand yields NULL, AND/OR use
three-valued logic, Int64 operands coerce to Float64 when mixed, and Int64
arithmetic checks for overflow. Everything else is a type error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

from .errors import ExecutionError, PlanError
from .model import INT64_MAX, INT64_MIN, ColumnType, PlanSchema, Row, Schema

ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("=", "<>", "<", "<=", ">", ">=")
LOGIC_OPS = ("AND", "OR", "NOT")
AGG_FUNCS = ("COUNT", "SUM", "AVG", "MIN", "MAX")


@dataclass(frozen=True)
class ColumnRef:
    name: str
    qualifier: str | None = None

    def label(self) -> str:
        return f"{self.qualifier}.{self.name}" if self.qualifier else self.name


@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str, bool]


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Logic:
    op: str
    left: "Expression"
    right: Optional["Expression"] = None  # None for NOT


@dataclass(frozen=True)
class Aggregate:
    func: str
    arg: Optional["Expression"] = None  # None means COUNT(*)


Expression = Union[ColumnRef, Literal, Arith, Compare, Logic, Aggregate]


def walk(expr: Expression) -> Iterator[Expression]:
    yield expr
    if isinstance(expr, (Arith, Compare)):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Logic):
        yield from walk(expr.left)
        if expr.right is not None:
            yield from walk(expr.right)
    elif isinstance(expr, Aggregate) and expr.arg is not None:
        yield from walk(expr.arg)


def contains_aggregate(expr: Expression) -> bool:
    return any(isinstance(node, Aggregate) for node in walk(expr))


def column_refs(expr: Expression) -> list[ColumnRef]:
    return [node for node in walk(expr) if isinstance(node, ColumnRef)]


def literal_type(value) -> ColumnType:
    if isinstance(value, bool):
        return ColumnType.BOOL
    if isinstance(value, int):
        return ColumnType.INT64
    if isinstance(value, float):
        return ColumnType.FLOAT64
    if isinstance(value, str):
        return ColumnType.UTF8
    raise PlanError(f"unsupported literal {value!r}")


_NUMERIC = (ColumnType.INT64, ColumnType.FLOAT64)


def infer_type(expr: Expression, schema: PlanSchema) -> ColumnType:
    """Static type of an expression, raising PlanError on mismatches."""
    if isinstance(expr, ColumnRef):
        return schema.columns[schema.resolve(expr.qualifier, expr.name)].ctype
    if isinstance(expr, Literal):
        return literal_type(expr.value)
    if isinstance(expr, Arith):
        lt = infer_type(expr.left, schema)
        rt = infer_type(expr.right, schema)
        if lt not in _NUMERIC or rt not in _NUMERIC:
            raise PlanError(f"arithmetic {expr.op!r} needs numeric operands, got {lt.value} and {rt.value}")
        if ColumnType.FLOAT64 in (lt, rt):
            return ColumnType.FLOAT64
        return ColumnType.INT64
    if isinstance(expr, Compare):
        lt = infer_type(expr.left, schema)
        rt = infer_type(expr.right, schema)
        comparable = lt == rt or (lt in _NUMERIC and rt in _NUMERIC)
        if not comparable:
            raise PlanError(f"cannot compare {lt.value} with {rt.value}")
        return ColumnType.BOOL
    if isinstance(expr, Logic):
        lt = infer_type(expr.left, schema)
        if lt is not ColumnType.BOOL:
            raise PlanError(f"{expr.op} needs boolean operands, got {lt.value}")
        if expr.right is not None:
            rt = infer_type(expr.right, schema)
            if rt is not ColumnType.BOOL:
                raise PlanError(f"{expr.op} needs boolean operands, got {rt.value}")
        return ColumnType.BOOL
    if isinstance(expr, Aggregate):
        return aggregate_type(expr, schema)
    raise PlanError(f"unsupported expression node {expr!r}")


def aggregate_type(agg: Aggregate, schema: PlanSchema) -> ColumnType:
    if agg.func == "COUNT":
        return ColumnType.INT64
    if agg.arg is None:
        raise PlanError(f"{agg.func} requires an argument")
    arg_type = infer_type(agg.arg, schema)
    if agg.func == "SUM":
        if arg_type not in _NUMERIC:
            raise PlanError(f"SUM needs a numeric argument, got {arg_type.value}")
        return arg_type
    if agg.func == "AVG":
        if arg_type not in _NUMERIC:
            raise PlanError(f"AVG needs a numeric argument, got {arg_type.value}")
        return ColumnType.FLOAT64
    if agg.func in ("MIN", "MAX"):
        return arg_type
    raise PlanError(f"unknown aggregate {agg.func!r}")


# Runtime kernels. Values reaching these conform to the static types above;
# the isinstance checks exist to turn schema drift into clean errors instead
# of silent misbehavior (bool is an int subclass in Python).

def _check_int64(v: int) -> int:
    if v > INT64_MAX or v < INT64_MIN:
        raise ExecutionError("Int64 overflow")
    return v


def _numeric(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ExecutionError(f"expected a numeric value, got {type(v).__name__}")
    return v


def arith_value(op: str, a, b):
    if a is None or b is None:
        return None
    a = _numeric(a)
    b = _numeric(b)
    both_int = isinstance(a, int) and isinstance(b, int)
    if op == "+":
        return _check_int64(a + b) if both_int else a + b
    if op == "-":
        return _check_int64(a - b) if both_int else a - b
    if op == "*":
        return _check_int64(a * b) if both_int else a * b
    if op == "/":
        if b == 0:
            raise ExecutionError("division by zero")
        if both_int:
            q = a // b
            if q < 0 and q * b != a:
                q += 1  # truncate toward zero, not floor
            return _check_int64(q)
        return a / b
    raise ExecutionError(f"unknown arithmetic operator {op!r}")


def compare_value(op: str, a, b):
    if a is None or b is None:
        return None
    if isinstance(a, bool) != isinstance(b, bool):
        raise ExecutionError("cannot compare Bool with non-Bool")
    if isinstance(a, str) != isinstance(b, str):
        raise ExecutionError("cannot compare Utf8 with non-Utf8")
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ExecutionError(f"unknown comparison operator {op!r}")


def logic_and(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def logic_or(a, b):
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


def logic_not(a):
    return None if a is None else not a


def compile_expr(expr: Expression, schema: PlanSchema) -> Callable[[Row], object]:
    """Compile an aggregate-free expression into a row -> value closure."""
    if isinstance(expr, ColumnRef):
        idx = schema.resolve(expr.qualifier, expr.name)
        return lambda row: row[idx]
    if isinstance(expr, Literal):
        value = expr.value
        return lambda row: value
    if isinstance(expr, Arith):
        f = compile_expr(expr.left, schema)
        g = compile_expr(expr.right, schema)
        op = expr.op
        return lambda row: arith_value(op, f(row), g(row))
    if isinstance(expr, Compare):
        f = compile_expr(expr.left, schema)
        g = compile_expr(expr.right, schema)
        op = expr.op
        return lambda row: compare_value(op, f(row), g(row))
    if isinstance(expr, Logic):
        f = compile_expr(expr.left, schema)
        if expr.op == "NOT":
            return lambda row: logic_not(f(row))
        g = compile_expr(expr.right, schema)
        if expr.op == "AND":
            return lambda row: logic_and(f(row), g(row))
        return lambda row: logic_or(f(row), g(row))
    if isinstance(expr, Aggregate):
        raise PlanError("aggregate expressions cannot be evaluated per row")
    raise PlanError(f"unsupported expression node {expr!r}")


def eval_expression(expr: Expression, row: Row, schema: Schema) -> object:
    """Evaluate one aggregate-free expression against a single row."""
    return compile_expr(expr, PlanSchema.unqualified(schema))(row)
