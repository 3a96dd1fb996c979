"""``graphopt`` command line: ``bench``, ``classify`` and ``query``.

Exit codes: 0 success, 1 usage or I/O error, 2 strategy results disagree.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    DEFAULT_GENERATOR,
    QUERY_IDS,
    BenchConfig,
    BenchmarkError,
    EquivalenceError,
    csv_rows,
    emit_results,
    markdown_table,
    run_benchmark,
)
from .elementary import BackendHandle, CostModel
from .kv import build_from_graph
from .optimizer import PlanningError, Strategy, kv_requirements, run_query
from .property_graph import GeneratorConfig, GraphError, load_graph
from .query_model import QueryError, classify, parse_query


def _csv_list(text: str) -> list:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run the canonical queries under several strategies")
    source = bench.add_mutually_exclusive_group()
    source.add_argument("--graph", type=Path, help="JSONL graph to load")
    source.add_argument("--generate", action="store_true", help="generate a synthetic graph (default)")
    d = DEFAULT_GENERATOR
    bench.add_argument("--entities", type=int, default=d.entity_count)
    bench.add_argument("--docs", type=int, default=d.document_count)
    bench.add_argument("--authors", type=int, default=d.author_count)
    bench.add_argument("--relations", type=int, default=d.relation_count)
    bench.add_argument("--contradictions", type=float, default=d.contradiction_fraction,
                       help="fraction of relations forming increases/decreases pairs")
    bench.add_argument("--seed", type=int, default=d.seed)
    bench.add_argument("--queries", type=_csv_list, default=list(QUERY_IDS))
    bench.add_argument("--strategies", type=_csv_list, default=["naive", "opt1", "opt2"])
    bench.add_argument("--reps", type=int, default=20)
    bench.add_argument("--cost-model", type=Path, help="JSON file with per-call latencies")
    bench.add_argument("--out", type=Path, default=Path("bench-out"))
    bench.add_argument("--allow-disconnected", action="store_true")

    cls = sub.add_parser("classify", help="print the taxonomy classification of a query as JSON")
    cls.add_argument("query_file", type=Path)
    cls.add_argument("--graph", type=Path, help="optional graph for attribute datatypes")

    query = sub.add_parser("query", help="run one query and print its result table")
    query.add_argument("--graph", type=Path, required=True)
    query.add_argument("--strategy", default="naive")
    query.add_argument("query_file", type=Path)
    return parser


def _bench(args) -> int:
    cost_model = CostModel.from_json(args.cost_model) if args.cost_model else CostModel()
    if args.graph is not None:
        config = BenchConfig(graph_path=args.graph)
    else:
        config = BenchConfig(
            generator=GeneratorConfig(
                entity_count=args.entities,
                document_count=args.docs,
                author_count=args.authors,
                relation_count=args.relations,
                contradiction_fraction=args.contradictions,
                seed=args.seed,
                anchors=True,
                q1_evidence=min(DEFAULT_GENERATOR.q1_evidence, max(0, args.docs - 3)),
            )
        )
    config.queries = args.queries
    config.strategies = args.strategies
    config.repetitions = args.reps
    config.cost_model = cost_model
    config.allow_disconnected = args.allow_disconnected
    reports = run_benchmark(config)
    emit_results(reports, args.out)
    sys.stdout.write(markdown_table(csv_rows(reports)))
    return 0


def _classify(args) -> int:
    query = parse_query(args.query_file.read_text(encoding="utf-8"))
    graph = load_graph(args.graph) if args.graph else None
    print(json.dumps(classify(query, graph).to_json(), indent=2))
    return 0


def _query(args) -> int:
    query = parse_query(args.query_file.read_text(encoding="utf-8"))
    graph = load_graph(args.graph)
    strategy = Strategy.parse(args.strategy)
    kv = None
    if strategy is Strategy.POLYGLOT:
        pairs = sorted(kv_requirements(query))
        if pairs:
            kv = build_from_graph(graph, pairs)
    table, _ = run_query(query, strategy, BackendHandle(graph), kv)
    print(table.to_text())
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"bench": _bench, "classify": _classify, "query": _query}
    try:
        return handlers[args.command](args)
    except EquivalenceError as exc:
        print(f"graphopt: equivalence mismatch: {exc}", file=sys.stderr)
        return 2
    except (BenchmarkError, GraphError, QueryError, PlanningError, OSError, ValueError) as exc:
        print(f"graphopt: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
