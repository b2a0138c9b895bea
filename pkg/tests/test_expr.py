import pytest
from hypothesis import given, strategies as st

from polyquery.errors import ExecutionError, PlanError
from polyquery.expr import (
    Aggregate,
    Arith,
    ColumnRef,
    Compare,
    Literal,
    Logic,
    arith_value,
    compare_value,
    eval_expression,
    infer_type,
)
from polyquery.model import INT64_MAX, ColumnType, PlanSchema, Schema

SCHEMA = Schema.of(
    ("fare", ColumnType.FLOAT64),
    ("city", ColumnType.UTF8),
    ("n", ColumnType.INT64),
    ("flag", ColumnType.BOOL),
)


def ev(expr, row):
    return eval_expression(expr, row, SCHEMA)


class TestEval:
    def test_literal(self):
        assert ev(Literal(5), (1.0, "a", 1, True)) == 5

    def test_range_predicate(self):
        pred = Logic(
            "AND",
            Compare(">", ColumnRef("fare"), Literal(10)),
            Compare("<", ColumnRef("fare"), Literal(20)),
        )
        assert ev(pred, (12.5, "a", 1, True)) is True
        assert ev(pred, (25.0, "a", 1, True)) is False

    def test_null_comparison_yields_null(self):
        assert ev(Compare("=", ColumnRef("city"), Literal("a")), (1.0, None, 1, True)) is None

    def test_int_float_coercion(self):
        assert ev(Compare("=", ColumnRef("n"), Literal(2.0)), (0.0, "a", 2, True)) is True
        assert ev(Arith("+", ColumnRef("n"), Literal(0.5)), (0.0, "a", 2, True)) == 2.5

    def test_unknown_column(self):
        with pytest.raises(PlanError):
            ev(ColumnRef("nope"), (1.0, "a", 1, True))

    def test_aggregate_rejected_per_row(self):
        with pytest.raises(PlanError):
            ev(Aggregate("SUM", ColumnRef("n")), (1.0, "a", 1, True))

    def test_int_division_truncates_toward_zero(self):
        assert arith_value("/", 7, 2) == 3
        assert arith_value("/", -7, 2) == -3

    def test_division_by_zero(self):
        with pytest.raises(ExecutionError):
            arith_value("/", 1, 0)
        with pytest.raises(ExecutionError):
            arith_value("/", 1.0, 0.0)

    def test_int64_overflow(self):
        with pytest.raises(ExecutionError):
            arith_value("+", INT64_MAX, 1)

    def test_utf8_arithmetic_rejected(self):
        with pytest.raises(ExecutionError):
            arith_value("+", "a", 1)

    def test_bool_vs_int_comparison_rejected(self):
        with pytest.raises(ExecutionError):
            compare_value("=", True, 1)


class TestNullPropagation:
    values = st.one_of(st.none(), st.integers(-100, 100), st.floats(-100, 100, allow_nan=False))

    @given(v=values)
    def test_arith_null_absorbs(self, v):
        for op in ("+", "-", "*", "/"):
            assert arith_value(op, None, v) is None
            assert arith_value(op, v, None) is None

    @given(v=values)
    def test_compare_null_absorbs(self, v):
        for op in ("=", "<>", "<", "<=", ">", ">="):
            assert compare_value(op, None, v) is None
            assert compare_value(op, v, None) is None


class TestThreeValuedLogic:
    def test_and_table(self):
        land = lambda a, b: ev(Logic("AND", Literal(True), Literal(True)), ())
        cases = {
            (True, True): True, (True, False): False, (False, True): False,
            (False, False): False, (True, None): None, (None, True): None,
            (False, None): False, (None, False): False, (None, None): None,
        }
        from polyquery.expr import logic_and, logic_or, logic_not
        for (a, b), want in cases.items():
            assert logic_and(a, b) is want
        assert logic_or(None, True) is True
        assert logic_or(None, False) is None
        assert logic_not(None) is None


class TestInferType:
    schema = PlanSchema.unqualified(SCHEMA)

    def test_arith_promotes_to_float(self):
        assert infer_type(Arith("+", ColumnRef("n"), ColumnRef("fare")), self.schema) is ColumnType.FLOAT64

    def test_int_arith_stays_int(self):
        assert infer_type(Arith("*", ColumnRef("n"), Literal(2)), self.schema) is ColumnType.INT64

    def test_utf8_plus_int_is_plan_error(self):
        with pytest.raises(PlanError):
            infer_type(Arith("+", ColumnRef("city"), ColumnRef("n")), self.schema)

    def test_compare_type_mismatch(self):
        with pytest.raises(PlanError):
            infer_type(Compare("=", ColumnRef("city"), ColumnRef("n")), self.schema)

    def test_logic_needs_bool(self):
        with pytest.raises(PlanError):
            infer_type(Logic("AND", ColumnRef("n"), ColumnRef("flag")), self.schema)

    def test_aggregate_types(self):
        assert infer_type(Aggregate("COUNT", None), self.schema) is ColumnType.INT64
        assert infer_type(Aggregate("SUM", ColumnRef("n")), self.schema) is ColumnType.INT64
        assert infer_type(Aggregate("AVG", ColumnRef("n")), self.schema) is ColumnType.FLOAT64
        assert infer_type(Aggregate("MAX", ColumnRef("city")), self.schema) is ColumnType.UTF8
