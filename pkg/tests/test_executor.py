import pytest

from gen import make_test_catalog, random_query
from polyquery.errors import ExecutionError, PlanError
from polyquery.executor import PHashJoin, compile_physical, execute, grouping_sets
from polyquery.interpreter import reference_interpret
from polyquery.model import multiset_equal
from polyquery.optimizer import optimize
from polyquery.sql.ast import GroupMode
from polyquery.sql.parser import parse_sql
from polyquery.sql.planner import plan_query


def run_sql(engine, sql, workers=2):
    plan = plan_query(parse_sql(sql), engine.catalog)
    stats = {t: engine.table_stats(t) for t in _tables(plan)}
    compiled = compile_physical(optimize(plan, stats, engine.catalog), stats, engine.catalog)
    return execute(compiled, workers)


def _tables(plan):
    from polyquery.sql.logical import scan_tables

    return scan_tables(plan)


class TestGroupingSets:
    def test_cube_power_set(self):
        assert grouping_sets(("a", "b"), GroupMode.CUBE) == [("a", "b"), ("a",), ("b",), ()]

    def test_rollup_prefixes(self):
        assert grouping_sets(("a", "b"), GroupMode.ROLLUP) == [("a", "b"), ("a",), ()]

    def test_plain(self):
        assert grouping_sets(("a",), GroupMode.PLAIN) == [("a",)]

    def test_zero_columns(self):
        assert grouping_sets((), GroupMode.CUBE) == [()]
        assert grouping_sets((), GroupMode.ROLLUP) == [()]
        assert grouping_sets((), GroupMode.PLAIN) == [()]

    def test_duplicate_column_rejected(self):
        with pytest.raises(PlanError, match="duplicate"):
            grouping_sets(("a", "a"), GroupMode.CUBE)

    def test_cube_output_order(self):
        sets = grouping_sets(("b", "a", "c"), GroupMode.CUBE)
        assert sets[0] == ("b", "a", "c")
        assert sets[-1] == ()
        sizes = [len(s) for s in sets]
        assert sizes == sorted(sizes, reverse=True)


class TestCompile:
    def test_build_side_is_smaller_input(self, trips_engine):
        sql = "SELECT zone FROM trips JOIN zones ON trips.city = zones.city"
        plan = plan_query(parse_sql(sql), trips_engine.catalog)
        stats = {t: trips_engine.table_stats(t) for t in ("trips", "zones")}
        compiled = compile_physical(plan, stats, trips_engine.catalog)

        def find_join(node):
            if isinstance(node, PHashJoin):
                return node
            return find_join(node.input)

        join = find_join(compiled.root)
        assert join.build_left is False  # zones (3 rows) < trips (5 rows)

    def test_build_side_left_on_tie_or_no_stats(self, trips_engine):
        sql = "SELECT zone FROM trips JOIN zones ON trips.city = zones.city"
        plan = plan_query(parse_sql(sql), trips_engine.catalog)
        compiled = compile_physical(plan, None, trips_engine.catalog)

        def find_join(node):
            if isinstance(node, PHashJoin):
                return node
            return find_join(node.input)

        assert find_join(compiled.root).build_left is True


class TestExecute:
    def test_identity_scan(self, trips_engine):
        out = run_sql(trips_engine, "SELECT * FROM trips")
        assert out.num_rows() == 5

    def test_small_group_by(self, trips_engine):
        out = run_sql(trips_engine, "SELECT city, SUM(fare) FROM trips GROUP BY city")
        assert sorted(out.rows()) == [("a", 30.5), ("b", 7.25), ("c", 33.0)]

    def test_cube_single_column(self, trips_engine):
        out = run_sql(
            trips_engine, "SELECT city, COUNT(*) AS n FROM trips GROUP BY city WITH CUBE"
        )
        rows = list(out.rows())
        ids = {row[-1] for row in rows}
        assert ids == {0, 1}
        assert (None, 5, 1) in rows  # grand total

    def test_count_star_on_empty_input(self, trips_engine):
        sql = "SELECT COUNT(*) FROM trips WHERE fare < 0"
        out = run_sql(trips_engine, sql)
        assert list(out.rows()) == [(0,)]
        ref = reference_interpret(plan_query(parse_sql(sql), trips_engine.catalog), trips_engine.catalog)
        assert list(ref.rows()) == [(0,)]

    def test_grouped_aggregate_on_empty_input_has_no_rows(self, trips_engine):
        sql = "SELECT city, COUNT(*) FROM trips WHERE fare < 0 GROUP BY city"
        assert run_sql(trips_engine, sql).num_rows() == 0
        ref = reference_interpret(plan_query(parse_sql(sql), trips_engine.catalog), trips_engine.catalog)
        assert ref.num_rows() == 0

    def test_sum_on_empty_input_is_null(self, trips_engine):
        out = run_sql(trips_engine, "SELECT SUM(fare) FROM trips WHERE fare < 0")
        assert list(out.rows()) == [(None,)]

    def test_count_col_skips_nulls(self, trips_engine):
        out = run_sql(trips_engine, "SELECT COUNT(fare) AS c, COUNT(*) AS n FROM trips")
        assert list(out.rows()) == [(4, 5)]

    def test_aggregates_ignore_nulls(self, trips_engine):
        out = run_sql(trips_engine, "SELECT MIN(fare) AS lo, MAX(fare) AS hi FROM trips")
        assert list(out.rows()) == [(7.25, 33.0)]

    def test_division_by_zero_identifies_operator(self, trips_engine):
        with pytest.raises(ExecutionError, match="project|filter"):
            run_sql(trips_engine, "SELECT fare / (duration - duration) FROM trips")

    def test_sort_sequence_identical_across_worker_counts(self, trips_engine):
        sql = "SELECT city, fare FROM trips ORDER BY city"
        rows = [list(run_sql(trips_engine, sql, workers=w).rows()) for w in (1, 2, 4, 8)]
        assert all(r == rows[0] for r in rows)

    def test_limit_without_sort_is_worker_count_invariant(self, trips_engine):
        sql = "SELECT trip_id FROM trips LIMIT 3"
        rows = [sorted(run_sql(trips_engine, sql, workers=w).rows()) for w in (1, 2, 4, 8)]
        assert all(r == rows[0] for r in rows)

    def test_join_matches_nested_loop_reference(self, trips_engine):
        sql = "SELECT trips.trip_id, zones.zone FROM trips JOIN zones ON trips.city = zones.city"
        got = run_sql(trips_engine, sql)
        want = reference_interpret(plan_query(parse_sql(sql), trips_engine.catalog), trips_engine.catalog)
        assert multiset_equal(got, want)

    def test_workers_must_be_positive(self, trips_engine):
        plan = plan_query(parse_sql("SELECT * FROM trips"), trips_engine.catalog)
        compiled = compile_physical(plan, None, trips_engine.catalog)
        with pytest.raises(ExecutionError):
            execute(compiled, 0)


class TestGroupingIdCounts:
    @pytest.mark.parametrize("mode,expected", [("CUBE", 4), ("ROLLUP", 3)])
    def test_two_column_modes(self, trips_engine, mode, expected):
        out = run_sql(
            trips_engine,
            f"SELECT city, duration, COUNT(*) FROM trips GROUP BY city, duration WITH {mode}",
        )
        ids = {row[-1] for row in out.rows()}
        assert len(ids) == expected


class TestOracleEquivalence:
    def test_hundred_random_equi_joins_match_nested_loop(self, tmp_path, rng):
        catalog, stats = make_test_catalog(tmp_path, rng, n_tables=4, max_rows=40)
        names = [e.table_name for e in catalog.list_tables()]
        checked = 0
        while checked < 100:
            sql = random_query(rng, names)
            if " JOIN " not in sql:
                continue
            checked += 1
            plan = plan_query(parse_sql(sql), catalog)
            got = execute(compile_physical(plan, stats, catalog), workers=2)
            want = reference_interpret(plan, catalog)
            assert multiset_equal(got, want), sql

    def test_random_corpus_small(self, tmp_path, rng):
        catalog, stats = make_test_catalog(tmp_path, rng)
        names = [e.table_name for e in catalog.list_tables()]
        for _ in range(60):
            sql = random_query(rng, names)
            plan = plan_query(parse_sql(sql), catalog)
            optimized = optimize(plan, stats, catalog)
            got = execute(compile_physical(optimized, stats, catalog), workers=3)
            want = reference_interpret(plan, catalog)
            assert multiset_equal(got, want), sql

    def test_partition_count_never_changes_results(self, tmp_path, rng):
        catalog, stats = make_test_catalog(tmp_path, rng, n_tables=3)
        names = [e.table_name for e in catalog.list_tables()]
        for _ in range(15):
            sql = random_query(rng, names)
            plan = plan_query(parse_sql(sql), catalog)
            compiled = compile_physical(plan, stats, catalog)
            results = [execute(compiled, workers=w) for w in (1, 2, 4, 8)]
            for other in results[1:]:
                assert multiset_equal(results[0], other), sql
