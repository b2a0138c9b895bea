import random

import pytest
from hypothesis import given, settings, strategies as st

from polyquery.errors import SqlSyntaxError
from polyquery.expr import Aggregate, Arith, ColumnRef, Compare, Literal, Logic
from polyquery.sql.ast import GroupMode, Query, SelectItem, query_to_sql
from polyquery.sql.parser import parse_sql


class TestParse:
    def test_select_star(self):
        q = parse_sql("SELECT * FROM trips")
        assert q.select is None
        assert q.table == "trips"

    def test_cube_mode(self):
        q = parse_sql("SELECT city, SUM(fare) FROM trips GROUP BY city WITH CUBE")
        assert q.group_mode is GroupMode.CUBE
        assert q.group_by == (ColumnRef("city"),)

    def test_rollup_mode(self):
        q = parse_sql("select city from trips group by city with rollup")
        assert q.group_mode is GroupMode.ROLLUP

    def test_syntax_error_position(self):
        with pytest.raises(SqlSyntaxError) as err:
            parse_sql("SELEC x")
        assert err.value.line == 1
        assert err.value.column == 1
        assert "SELEC" in str(err.value)

    def test_keywords_case_insensitive_identifiers_not(self):
        q = parse_sql("select Fare from Trips where fare > 1")
        assert q.table == "Trips"
        assert q.select[0].expr == ColumnRef("Fare")

    def test_string_literal_with_escaped_quote(self):
        q = parse_sql("SELECT * FROM t WHERE c = 'it''s'")
        assert q.where == Compare("=", ColumnRef("c"), Literal("it's"))

    def test_joins_and_clauses(self):
        q = parse_sql(
            "SELECT a.x FROM a JOIN b ON a.k = b.k JOIN c ON b.j = c.j "
            "WHERE a.x > 3 GROUP BY a.x ORDER BY x DESC LIMIT 7"
        )
        assert [j.table for j in q.joins] == ["b", "c"]
        assert q.joins[0].left == ColumnRef("k", qualifier="a")
        assert q.limit == 7
        assert q.order_by[0].ascending is False

    def test_precedence(self):
        q = parse_sql("SELECT * FROM t WHERE a + 1 * 2 = 3 AND NOT b = 4 OR c = 5")
        want = Logic(
            "OR",
            Logic(
                "AND",
                Compare("=", Arith("+", ColumnRef("a"), Arith("*", Literal(1), Literal(2))), Literal(3)),
                Logic("NOT", Compare("=", ColumnRef("b"), Literal(4))),
            ),
            Compare("=", ColumnRef("c"), Literal(5)),
        )
        assert q.where == want

    def test_negative_literals(self):
        q = parse_sql("SELECT * FROM t WHERE a > -1.5 AND b < -2")
        assert q.where.left.right == Literal(-1.5)
        assert q.where.right.right == Literal(-2)

    def test_count_star_only(self):
        parse_sql("SELECT COUNT(*) FROM t")
        with pytest.raises(SqlSyntaxError):
            parse_sql("SELECT SUM(*) FROM t")

    def test_aggregate_case_insensitive(self):
        q = parse_sql("SELECT sum(x) FROM t")
        assert q.select[0].expr == Aggregate("SUM", ColumnRef("x"))

    def test_aggregate_named_column_still_parses(self):
        # `sum` not followed by ( is a plain identifier
        q = parse_sql("SELECT sum FROM t")
        assert q.select[0].expr == ColumnRef("sum")

    def test_trailing_garbage(self):
        with pytest.raises(SqlSyntaxError, match="trailing"):
            parse_sql("SELECT * FROM t pelican")

    def test_unterminated_string(self):
        with pytest.raises(SqlSyntaxError, match="unterminated"):
            parse_sql("SELECT * FROM t WHERE c = 'oops")

    def test_limit_requires_integer(self):
        with pytest.raises(SqlSyntaxError):
            parse_sql("SELECT * FROM t LIMIT x")

    def test_empty_input(self):
        with pytest.raises(SqlSyntaxError):
            parse_sql("")


class TestParseTotality:
    @given(st.text(max_size=80))
    @settings(max_examples=300, deadline=None)
    def test_arbitrary_text_parses_or_positioned_error(self, text):
        try:
            parse_sql(text)
        except SqlSyntaxError as exc:
            assert exc.line >= 1
            assert exc.column >= 1

    @given(st.binary(max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_arbitrary_bytes_decoded(self, blob):
        try:
            parse_sql(blob.decode("utf-8", errors="replace"))
        except SqlSyntaxError:
            pass


def _random_ast(rng: random.Random) -> Query:
    def colref():
        name = rng.choice(["a", "b", "c"])
        return ColumnRef(name, qualifier=rng.choice([None, "t", "u"]))

    def expr(depth=0):
        kind = rng.randrange(6 if depth < 2 else 2)
        if kind == 0:
            return colref()
        if kind == 1:
            return Literal(rng.choice([1, -2, 2.5, "s", True, False]))
        if kind == 2:
            return Arith(rng.choice(["+", "-", "*", "/"]), expr(depth + 1), expr(depth + 1))
        if kind == 3:
            return Compare(rng.choice(["=", "<>", "<", "<=", ">", ">="]), expr(depth + 1), expr(depth + 1))
        if kind == 4:
            return Logic("NOT", expr(depth + 1))
        return Logic(rng.choice(["AND", "OR"]), expr(depth + 1), expr(depth + 1))

    select = None
    if rng.random() < 0.8:
        select = tuple(
            SelectItem(expr(), alias=rng.choice([None, f"out{i}"]))
            for i in range(rng.randrange(1, 4))
        )
        if rng.random() < 0.4:
            select = select + (SelectItem(Aggregate("SUM", colref()), alias="s"),)
    joins = ()
    where = expr() if rng.random() < 0.6 else None
    group_by = ()
    group_mode = GroupMode.PLAIN
    if select is not None and rng.random() < 0.3:
        group_by = (ColumnRef("a"), ColumnRef("b"))[: rng.randrange(1, 3)]
        group_mode = rng.choice(list(GroupMode))
    order_by = ()
    limit = rng.choice([None, 0, 5, 100])
    return Query(
        select=select,
        table=rng.choice(["t", "u"]),
        joins=joins,
        where=where,
        group_by=group_by,
        group_mode=group_mode,
        order_by=order_by,
        limit=limit,
    )


class TestPrintParseRoundTrip:
    def test_round_trip_on_random_asts(self):
        rng = random.Random(1234)
        for _ in range(300):
            ast = _random_ast(rng)
            printed = query_to_sql(ast)
            reparsed = parse_sql(printed)
            assert reparsed == ast, printed
