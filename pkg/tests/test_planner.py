import pytest

from polyquery.errors import CatalogError, PlanError
from polyquery.expr import ColumnRef
from polyquery.sql.logical import (
    AggregateNode,
    FilterNode,
    JoinNode,
    LimitNode,
    ProjectNode,
    ScanNode,
    SortNode,
    output_schema,
)
from polyquery.sql.parser import parse_sql
from polyquery.sql.planner import plan_query


def plan(sql, engine):
    return plan_query(parse_sql(sql), engine.catalog)


class TestPlanShapes:
    def test_select_star_is_project_over_scan(self, trips_engine):
        p = plan("SELECT * FROM trips", trips_engine)
        assert isinstance(p, ProjectNode)
        assert isinstance(p.input, ScanNode)
        assert output_schema(p, trips_engine.catalog).names() == [
            "trip_id", "city", "fare", "duration",
        ]

    def test_where_becomes_filter(self, trips_engine):
        p = plan("SELECT city FROM trips WHERE fare > 1", trips_engine)
        assert isinstance(p, ProjectNode)
        assert isinstance(p.input, FilterNode)

    def test_order_and_limit_wrap_project(self, trips_engine):
        p = plan("SELECT city FROM trips ORDER BY city LIMIT 3", trips_engine)
        assert isinstance(p, LimitNode)
        assert isinstance(p.input, SortNode)

    def test_join_schema_is_left_then_right(self, trips_engine):
        p = plan("SELECT * FROM trips JOIN zones ON trips.city = zones.city", trips_engine)
        names = output_schema(p, trips_engine.catalog).names()
        assert names == ["trip_id", "trips.city", "fare", "duration", "zones.city", "zone"]

    def test_join_condition_orientation_flips(self, trips_engine):
        p = plan("SELECT zone FROM trips JOIN zones ON zones.city = trips.city", trips_engine)
        join = p.input
        assert isinstance(join, JoinNode)
        left_ref, right_ref = join.pairs[0]
        assert left_ref.qualifier == "trips"
        assert right_ref.qualifier == "zones"

    def test_aggregate_query_plan(self, trips_engine):
        p = plan("SELECT city, SUM(fare) FROM trips GROUP BY city", trips_engine)
        assert isinstance(p, ProjectNode)
        agg = p.input
        assert isinstance(agg, AggregateNode)
        assert agg.aggs == (("SUM", ColumnRef("fare")),)
        assert output_schema(p, trips_engine.catalog).names() == ["city", "SUM(fare)"]

    def test_grouping_id_appended_for_cube(self, trips_engine):
        p = plan("SELECT city, COUNT(*) FROM trips GROUP BY city WITH CUBE", trips_engine)
        assert output_schema(p, trips_engine.catalog).names() == ["city", "COUNT(*)", "grouping_id"]


class TestValidation:
    def test_unknown_table(self, trips_engine):
        with pytest.raises(CatalogError, match="unknown table"):
            plan("SELECT * FROM ghosts", trips_engine)

    def test_unknown_column(self, trips_engine):
        with pytest.raises(PlanError, match="unknown column"):
            plan("SELECT nope FROM trips", trips_engine)

    def test_ambiguous_column_requires_qualifier(self, trips_engine):
        with pytest.raises(PlanError, match="ambiguous"):
            plan("SELECT city FROM trips JOIN zones ON trips.city = zones.city", trips_engine)

    def test_non_grouped_bare_column(self, trips_engine):
        with pytest.raises(PlanError, match="GROUP BY"):
            plan("SELECT city, fare FROM trips GROUP BY city", trips_engine)

    def test_group_expression_over_group_column_allowed(self, trips_engine):
        p = plan("SELECT duration * 2 FROM trips GROUP BY duration", trips_engine)
        assert isinstance(p, ProjectNode)

    def test_nested_aggregate_rejected(self, trips_engine):
        with pytest.raises(PlanError, match="nested"):
            plan("SELECT SUM(AVG(fare)) FROM trips", trips_engine)

    def test_type_error_in_predicate(self, trips_engine):
        with pytest.raises(PlanError):
            plan("SELECT * FROM trips WHERE city + 1 = 2", trips_engine)

    def test_where_must_be_boolean(self, trips_engine):
        with pytest.raises(PlanError, match="boolean"):
            plan("SELECT * FROM trips WHERE fare + 1", trips_engine)

    def test_select_star_with_group_by(self, trips_engine):
        with pytest.raises(PlanError):
            plan("SELECT * FROM trips GROUP BY city", trips_engine)

    def test_duplicate_group_column(self, trips_engine):
        with pytest.raises(PlanError, match="duplicate"):
            plan("SELECT city FROM trips GROUP BY city, city", trips_engine)

    def test_self_join_rejected(self, trips_engine):
        with pytest.raises(PlanError, match="twice"):
            plan("SELECT * FROM trips JOIN trips ON trips.city = trips.city", trips_engine)

    def test_join_condition_must_span_sides(self, trips_engine):
        with pytest.raises(PlanError):
            plan("SELECT * FROM trips JOIN zones ON trips.city = trips.city", trips_engine)

    def test_order_by_must_be_in_output(self, trips_engine):
        with pytest.raises(PlanError, match="ORDER BY"):
            plan("SELECT city FROM trips ORDER BY fare", trips_engine)

    def test_aggregate_in_where_rejected(self, trips_engine):
        with pytest.raises(PlanError):
            plan("SELECT city FROM trips WHERE SUM(fare) > 1 GROUP BY city", trips_engine)


class TestRoundTripPlans:
    def test_plan_of_printed_ast_matches(self, trips_engine):
        from polyquery.sql.ast import query_to_sql

        for sql in [
            "SELECT * FROM trips",
            "SELECT trip_id, fare * 2.0 AS double_fare FROM trips WHERE fare > 10 ORDER BY double_fare DESC LIMIT 3",
            "SELECT city, COUNT(*) AS n FROM trips GROUP BY city WITH ROLLUP",
            "SELECT trips.trip_id, zones.zone FROM trips JOIN zones ON trips.city = zones.city",
        ]:
            ast = parse_sql(sql)
            assert plan_query(parse_sql(query_to_sql(ast)), trips_engine.catalog) == plan_query(
                ast, trips_engine.catalog
            )
