"""Graph-query execution strategies over an instrumented property graph.

Three ways to answer the same query are implemented and compared by modeled
cost: direct declarative execution (``naive``), client-side algorithms over
elementary queries (``client_algorithm``), and the latter with metadata reads
offloaded to a key-value store (``polyglot``).
"""

from .bench import (
    DEFAULT_GENERATOR,
    BenchConfig,
    canonical_queries,
    emit_results,
    markdown_table,
    read_csv,
    run_benchmark,
)
from .elementary import BackendHandle, CallCounts, CostModel, ElementaryCounter, modeled_cost
from .kv import KVStore, build_from_graph, kv_get
from .naive import builtin_shortest_path, execute_naive
from .optimizer import (
    Plan,
    PlanningError,
    Strategy,
    client_first_by,
    execute_plan,
    graph_bfs_shortest_path,
    kv_requirements,
    plan,
    run_query,
)
from .property_graph import (
    Edge,
    GeneratorConfig,
    GraphStats,
    Node,
    PropertyGraph,
    generate_synthetic,
    graph_stats,
    load_graph,
    save_graph,
)
from .query_model import QueryClassification, classify, format_query, parse_query
from .results import ExecutionReport, Path, ResultTable

__all__ = [
    "BackendHandle",
    "BenchConfig",
    "CallCounts",
    "CostModel",
    "DEFAULT_GENERATOR",
    "Edge",
    "ElementaryCounter",
    "ExecutionReport",
    "GeneratorConfig",
    "GraphStats",
    "KVStore",
    "Node",
    "Path",
    "Plan",
    "PlanningError",
    "PropertyGraph",
    "QueryClassification",
    "ResultTable",
    "Strategy",
    "build_from_graph",
    "builtin_shortest_path",
    "canonical_queries",
    "classify",
    "client_first_by",
    "emit_results",
    "execute_naive",
    "execute_plan",
    "format_query",
    "generate_synthetic",
    "graph_bfs_shortest_path",
    "graph_stats",
    "kv_get",
    "kv_requirements",
    "load_graph",
    "markdown_table",
    "modeled_cost",
    "parse_query",
    "plan",
    "read_csv",
    "run_benchmark",
    "run_query",
    "save_graph",
]
