"""The engine facade: a data directory bound to catalog, statistics, and the
full query path (parse -> plan -> optimize -> compile -> execute).

A data directory holds the delimited files plus catalog.json and stats.json.
Statistics persist only via analyze(); queries against unanalyzed tables
collect throwaway stats in memory so the optimizer always has numbers.
"""
from __future__ import annotations

import os
import threading
from pathlib import Path

from .catalog import Catalog, CatalogEntry, FORMAT_DELIMITED_TEXT, infer_schema
from .errors import EngineError
from .executor import compile_physical, execute
from .graph import connected_components, relation_to_graph, shortest_paths
from .model import Relation
from .optimizer import optimize
from .sql.logical import LogicalPlan, scan_tables
from .sql.parser import parse_sql
from .sql.planner import plan_query
from .stats import DEFAULT_SAMPLE_THRESHOLD, TableStats, collect_stats, load_stats, save_stats

CATALOG_FILE = "catalog.json"
STATS_FILE = "stats.json"
DATA_DIR_ENV = "HMDAP_DATA_DIR"


def default_workers() -> int:
    return os.cpu_count() or 1


class Engine:
    def __init__(
        self,
        data_dir: str | Path,
        workers: int | None = None,
        sample_threshold: int = DEFAULT_SAMPLE_THRESHOLD,
    ):
        self.data_dir = Path(data_dir)
        if not self.data_dir.is_dir():
            raise EngineError(f"data directory {self.data_dir} does not exist")
        self.workers = workers if workers else default_workers()
        self.sample_threshold = sample_threshold
        manifest = self.data_dir / CATALOG_FILE
        if manifest.exists():
            self.catalog = Catalog.load(manifest)
        else:
            self.catalog = Catalog(base_dir=self.data_dir)
        stats_path = self.data_dir / STATS_FILE
        self._stats: dict[str, TableStats] = load_stats(stats_path) if stats_path.exists() else {}
        self._stats_lock = threading.Lock()

    # catalog management

    def load_table(
        self,
        name: str,
        path: str | Path,
        delimiter: str = ",",
        has_header: bool = True,
        sample_rows: int = 1000,
    ) -> CatalogEntry:
        """Infer a schema for the file and register it under name."""
        schema = infer_schema(path, delimiter=delimiter, has_header=has_header, sample_rows=sample_rows)
        source = Path(path)
        try:
            source = source.relative_to(self.data_dir)
        except ValueError:
            pass  # outside the data dir; keep as given
        entry = CatalogEntry(
            table_name=name,
            source_path=str(source),
            format=FORMAT_DELIMITED_TEXT,
            delimiter=delimiter,
            has_header=has_header,
            schema=schema,
        )
        self.catalog.register(entry)
        self.catalog.save(self.data_dir / CATALOG_FILE)
        return entry

    def list_tables(self) -> list[CatalogEntry]:
        return self.catalog.list_tables()

    # statistics

    def analyze(self, table: str, seed: int = 0) -> TableStats:
        """Collect statistics for a table and persist them to stats.json."""
        relation = self.catalog.scan(table)
        stats = collect_stats(relation, self.sample_threshold, seed=seed)
        with self._stats_lock:
            self._stats[table] = stats
            save_stats(self._stats, self.data_dir / STATS_FILE)
        return stats

    def table_stats(self, table: str) -> TableStats:
        with self._stats_lock:
            cached = self._stats.get(table)
        if cached is not None:
            return cached
        relation = self.catalog.scan(table)
        stats = collect_stats(relation, self.sample_threshold)
        with self._stats_lock:
            self._stats[table] = stats  # in-memory only; analyze() persists
        return stats

    # queries

    def plan(self, sql: str) -> LogicalPlan:
        return plan_query(parse_sql(sql), self.catalog)

    def query(self, sql: str, workers: int | None = None) -> Relation:
        plan = self.plan(sql)
        stats = {table: self.table_stats(table) for table in scan_tables(plan)}
        optimized = optimize(plan, stats, self.catalog)
        compiled = compile_physical(optimized, stats, self.catalog)
        return execute(compiled, workers or self.workers)

    # graph paradigm entry points

    def graph_shortest_paths(
        self,
        table: str,
        src_col: str,
        dst_col: str,
        source,
        weight_col: str | None = None,
    ) -> Relation:
        graph = relation_to_graph(self.catalog.scan(table), src_col, dst_col, weight_col)
        return shortest_paths(graph, source)

    def graph_components(
        self,
        table: str,
        src_col: str,
        dst_col: str,
        weight_col: str | None = None,
    ) -> Relation:
        graph = relation_to_graph(self.catalog.scan(table), src_col, dst_col, weight_col)
        return connected_components(graph)
