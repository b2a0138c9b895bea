"""polyquery: a hybrid analytical engine.

Relational queries (an extended SQL dialect with ROLLUP/CUBE) over local
delimited files, cost-based optimization driven by sampled statistics,
clustering/classification and shortest-path analytics, and XML-configured
pipelines that move results between the paradigms.
"""
from .catalog import Catalog, CatalogEntry, infer_schema
from .engine import Engine
from .errors import EngineError
from .executor import compile_physical, execute, grouping_sets
from .export import relation_to_csv
from .graph import Graph, connected_components, relation_to_graph, shortest_paths
from .interpreter import reference_interpret
from .ml import (
    FeatureMatrix,
    KMeansModel,
    LogRegModel,
    kmeans_predict,
    kmeans_train,
    logreg_loss_grad,
    logreg_predict,
    logreg_train,
    relation_to_matrix,
)
from .model import ColumnType, Relation, Schema, multiset_equal, repartition
from .optimizer import choose_join_order, estimate_cardinality, optimize
from .pipeline import (
    DbConfig,
    PipelineConfig,
    PipelineResult,
    execute_pipeline,
    join_results,
    parse_db_config,
    parse_ml_config,
    serialize_db_config,
    serialize_ml_config,
)
from .sql import parse_sql, plan_query
from .stats import TableStats, chao84, collect_stats, sample_relation

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CatalogEntry",
    "ColumnType",
    "DbConfig",
    "Engine",
    "EngineError",
    "FeatureMatrix",
    "Graph",
    "KMeansModel",
    "LogRegModel",
    "PipelineConfig",
    "PipelineResult",
    "Relation",
    "Schema",
    "TableStats",
    "chao84",
    "choose_join_order",
    "collect_stats",
    "compile_physical",
    "connected_components",
    "estimate_cardinality",
    "execute",
    "execute_pipeline",
    "grouping_sets",
    "infer_schema",
    "join_results",
    "kmeans_predict",
    "kmeans_train",
    "logreg_loss_grad",
    "logreg_predict",
    "logreg_train",
    "multiset_equal",
    "optimize",
    "parse_db_config",
    "parse_ml_config",
    "parse_sql",
    "plan_query",
    "reference_interpret",
    "relation_to_csv",
    "relation_to_graph",
    "relation_to_matrix",
    "repartition",
    "sample_relation",
    "serialize_db_config",
    "serialize_ml_config",
    "shortest_paths",
    "__version__",
]
