"""Benchmark harness: canonical queries, repeated runs, equivalence checks,
and CSV / Markdown / SVG output."""

from __future__ import annotations

import csv
import io
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .elementary import BackendHandle, CostModel
from .kv import KVStore, build_from_graph
from .optimizer import PlanningError, Strategy, execute_plan, kv_requirements, plan
from .property_graph import (
    ANCHOR_Q1_SOURCE,
    ANCHOR_Q1_TARGET,
    ANCHOR_Q4_SOURCE,
    ANCHOR_Q4_TARGET,
    ANCHOR_Q12_SOURCE,
    ANCHOR_Q12_TARGET,
    GeneratorConfig,
    PropertyGraph,
    generate_synthetic,
    load_graph,
)
from .query_model import parse_query
from .query_model.parser import format_literal
from .results import ExecutionReport

QUERY_IDS = ("q1", "q4", "q12", "q15")

Q1_TEMPLATE = (
    "MATCH (n:Entity {{preferredLabel: {src}}})-[r:hasRelation {{function: \"increases\"}}]->"
    "(m:Entity {{preferredLabel: {dst}}}), "
    "(doc:Document {{documentID: r.context}})<-[r2:isAuthor]-(author:Author) "
    "RETURN doc, author ORDER BY doc.publicationDate LIMIT 1"
)
Q4_TEMPLATE = (
    "MATCH (entity1:Entity {{preferredLabel: {src}}}), (entity2:Entity {{preferredLabel: {dst}}}) "
    "RETURN shortestPath(entity1, entity2)"
)
Q12_TEMPLATE = (
    "MATCH (doc1:Document {{documentID: {src}}}), (doc2:Document {{documentID: {dst}}}) "
    "RETURN shortestPath(doc1, doc2)"
)
Q15_TEXT = (
    "MATCH (e1:Entity)-[r1:hasRelation {function: \"increases\"}]->(e2:Entity), "
    "(e1)-[r2:hasRelation {function: \"decreases\"}]->(e2) "
    "RETURN DISTINCT e1.preferredLabel, e2.preferredLabel, count(r1) AS `increases`, "
    "count(r2) AS `decreases` ORDER BY count(r1) DESC"
)

DEFAULT_GENERATOR = GeneratorConfig(
    entity_count=5000,
    document_count=2000,
    author_count=500,
    relation_count=40000,
    contradiction_fraction=0.05,
    seed=42,
    anchors=True,
)


class BenchmarkError(Exception):
    pass


class EquivalenceError(BenchmarkError):
    def __init__(self, query_id: str, strategies: tuple, index: int, left, right):
        self.query_id = query_id
        self.strategies = strategies
        self.index = index
        self.left = left
        self.right = right
        super().__init__(
            f"{query_id}: {strategies[0]} and {strategies[1]} disagree at row {index}: {left!r} != {right!r}"
        )


def _undirected_distances(graph: PropertyGraph, source: int) -> dict:
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for v in frontier:
            for eid in graph.out_edges(v):
                w = graph.edges[eid].end
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
            for eid in graph.in_edges(v):
                w = graph.edges[eid].start
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def _path_endpoints(graph, label, key, anchors, allow_disconnected):
    src_name, dst_name = anchors
    src = graph.lookup(label, key, src_name)
    dst = graph.lookup(label, key, dst_name)
    if len(src) == 1 and len(dst) == 1:
        a, b = src[0], dst[0]
    else:
        # no anchors: lowest-id node and the farthest node reachable from it
        ids = graph.nodes_with_label(label)
        ids = [i for i in ids if graph.nodes[i].props.get(key) is not None]
        if len(ids) < 2:
            raise BenchmarkError(f"graph has fewer than two {label} nodes with {key}")
        a = ids[0]
        dist = _undirected_distances(graph, a)
        reachable = [i for i in ids if i in dist and i != a]
        if reachable:
            b = max(reachable, key=lambda i: (dist[i], -i))
        else:
            b = ids[1]
    if not allow_disconnected and b not in _undirected_distances(graph, a):
        raise BenchmarkError(f"shortest-path endpoints {a} and {b} are disconnected")
    return graph.nodes[a].props[key], graph.nodes[b].props[key]


def _q1_endpoints(graph):
    src = graph.lookup("Entity", "preferredLabel", ANCHOR_Q1_SOURCE)
    dst = graph.lookup("Entity", "preferredLabel", ANCHOR_Q1_TARGET)
    if len(src) == 1 and len(dst) == 1:
        return ANCHOR_Q1_SOURCE, ANCHOR_Q1_TARGET
    tally: dict = {}
    for edge in graph.edges.values():
        if edge.type == "hasRelation" and edge.props.get("function") == "increases":
            tally[(edge.start, edge.end)] = tally.get((edge.start, edge.end), 0) + 1
    if not tally:
        raise BenchmarkError("graph has no 'increases' relations for Q1")
    s, t = min(tally, key=lambda p: (-tally[p], p))
    return graph.nodes[s].props["preferredLabel"], graph.nodes[t].props["preferredLabel"]


def canonical_queries(graph: PropertyGraph, allow_disconnected: bool = False) -> "OrderedDict[str, str]":
    """Instantiate Q1, Q4, Q12 and Q15 against ``graph``.

    Planted anchors are used when present; otherwise endpoints are chosen
    deterministically from the data.
    """
    out: OrderedDict = OrderedDict()
    src, dst = _q1_endpoints(graph)
    out["q1"] = Q1_TEMPLATE.format(src=format_literal(src), dst=format_literal(dst))
    src, dst = _path_endpoints(
        graph, "Entity", "preferredLabel", (ANCHOR_Q4_SOURCE, ANCHOR_Q4_TARGET), allow_disconnected
    )
    out["q4"] = Q4_TEMPLATE.format(src=format_literal(src), dst=format_literal(dst))
    src, dst = _path_endpoints(
        graph, "Document", "documentID", (ANCHOR_Q12_SOURCE, ANCHOR_Q12_TARGET), allow_disconnected
    )
    out["q12"] = Q12_TEMPLATE.format(src=format_literal(src), dst=format_literal(dst))
    out["q15"] = Q15_TEXT
    return out


@dataclass
class BenchConfig:
    graph_path: Optional[Union[str, Path]] = None
    generator: Optional[GeneratorConfig] = None
    queries: Sequence[str] = QUERY_IDS
    strategies: Sequence[Union[str, Strategy]] = ("naive", "opt1", "opt2")
    repetitions: int = 20
    cost_model: CostModel = field(default_factory=CostModel)
    seed: Optional[int] = None
    allow_disconnected: bool = False

    def validate(self) -> None:
        if not isinstance(self.repetitions, int) or self.repetitions < 1:
            raise BenchmarkError("repetitions must be a positive integer")
        if not self.queries:
            raise BenchmarkError("no queries selected")
        unknown = [q for q in self.queries if q not in QUERY_IDS]
        if unknown:
            raise BenchmarkError(f"unknown queries: {unknown}")
        if not self.strategies:
            raise BenchmarkError("no strategies selected")
        for s in self.strategies:
            try:
                Strategy.parse(s)
            except ValueError as exc:
                raise BenchmarkError(str(exc)) from None
        if self.graph_path is not None and self.generator is not None:
            raise BenchmarkError("give either a graph path or a generator config, not both")

    def load(self) -> PropertyGraph:
        if self.graph_path is not None:
            return load_graph(self.graph_path)
        gen = self.generator or DEFAULT_GENERATOR
        if self.seed is not None:
            gen = GeneratorConfig(**{**gen.__dict__, "seed": self.seed})
        return generate_synthetic(gen)


def run_benchmark(config: BenchConfig, graph: Optional[PropertyGraph] = None) -> list:
    """Run every (query, strategy) ``repetitions`` times.

    Result tables must agree across strategies; a mismatch raises
    :class:`EquivalenceError`.
    """
    config.validate()
    if graph is None:
        graph = config.load()
    texts = canonical_queries(graph, config.allow_disconnected)
    strategies = [Strategy.parse(s) for s in config.strategies]
    queries = {qid: parse_query(texts[qid]) for qid in config.queries}

    kv: Optional[KVStore] = None
    if Strategy.POLYGLOT in strategies:
        pairs = sorted(set().union(*(kv_requirements(q) for q in queries.values())))
        if pairs:
            kv = build_from_graph(graph, pairs)

    reports = []
    for qid, query in queries.items():
        reference: Optional[tuple] = None
        for strategy in strategies:
            try:
                p = plan(query, strategy, kv=kv)
            except PlanningError as exc:
                raise BenchmarkError(f"{qid}/{strategy.short}: {exc}") from None
            merged = ExecutionReport(qid, strategy.short)
            for _ in range(config.repetitions):
                handle = BackendHandle(graph, cost_model=config.cost_model)
                if kv is not None:
                    kv.counter.reset()
                table, report = execute_plan(p, handle, kv, qid)
                merged.merge(report)
                merged.checksum = report.checksum
                merged.candidates_visited = report.candidates_visited
                if reference is None:
                    reference = (strategy.short, table)
                elif table != reference[1]:
                    index, left, right = reference[1].first_difference(table)
                    raise EquivalenceError(qid, (reference[0], strategy.short), index, left, right)
            reports.append(merged)
    return reports


# --- output ---------------------------------------------------------------------

CSV_COLUMNS = (
    "query",
    "strategy",
    "run",
    "wall_us",
    "modeled_us",
    "node_lookup",
    "index_lookup",
    "neighbours",
    "attribute_access",
    "edges_between",
    "rows",
    "kv_lookup",
)


def csv_rows(reports: Sequence[ExecutionReport]) -> list:
    rows = []
    for report in reports:
        for run, (wall, counts, modeled) in enumerate(zip(report.wall_us, report.counts, report.modeled_us)):
            c = counts.as_dict()
            rows.append(
                {
                    "query": report.query_id,
                    "strategy": report.strategy,
                    "run": str(run),
                    "wall_us": f"{wall:.1f}",
                    "modeled_us": f"{modeled:.1f}",
                    "node_lookup": str(c["node_lookup"]),
                    "index_lookup": str(c["index_lookup"]),
                    "neighbours": str(c["neighbours"]),
                    "attribute_access": str(c["attribute_access"]),
                    "edges_between": str(c["edges_between"]),
                    "rows": str(c["rows_transferred"]),
                    "kv_lookup": str(c["kv_lookup"]),
                }
            )
    return rows


def summarize(rows: Sequence[dict]) -> "OrderedDict":
    """Mean wall and modeled cost per (query, strategy), from CSV-shaped rows."""
    acc: OrderedDict = OrderedDict()
    for row in rows:
        key = (row["query"], row["strategy"])
        entry = acc.setdefault(key, [0, 0.0, 0.0])
        entry[0] += 1
        entry[1] += float(row["wall_us"])
        entry[2] += float(row["modeled_us"])
    out: OrderedDict = OrderedDict()
    for key, (n, wall, modeled) in acc.items():
        out[key] = {"runs": n, "mean_wall_us": wall / n, "mean_modeled_us": modeled / n}
    return out


def speedups(summary: "OrderedDict") -> dict:
    """Speedup of each strategy over the baseline of its query (naive if run,
    otherwise the first strategy). Empty when a query has one strategy."""
    per_query: OrderedDict = OrderedDict()
    for (q, s), stats in summary.items():
        per_query.setdefault(q, OrderedDict())[s] = stats
    out = {}
    for q, strategies in per_query.items():
        if len(strategies) < 2:
            continue
        base_name = "naive" if "naive" in strategies else next(iter(strategies))
        base = strategies[base_name]
        for s, stats in strategies.items():
            out[(q, s)] = (
                _ratio(base["mean_modeled_us"], stats["mean_modeled_us"]),
                _ratio(base["mean_wall_us"], stats["mean_wall_us"]),
            )
    return out


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return math.inf if a > 0 else 1.0
    return a / b


def markdown_table(rows: Sequence[dict]) -> str:
    summary = summarize(rows)
    factors = speedups(summary)
    lines = [
        "| query | strategy | runs | mean wall (us) | mean modeled (us) | speedup (modeled) | speedup (wall) |",
        "|---|---|---:|---:|---:|---:|---:|",
    ]
    for (q, s), stats in summary.items():
        if (q, s) in factors:
            fm, fw = factors[(q, s)]
            sm, sw = f"{fm:.2f}", f"{fw:.2f}"
        else:
            sm = sw = ""
        lines.append(
            f"| {q} | {s} | {stats['runs']} | {stats['mean_wall_us']:.1f} | "
            f"{stats['mean_modeled_us']:.1f} | {sm} | {sw} |"
        )
    return "\n".join(lines) + "\n"


_PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e")


def svg_chart(query_id: str, rows: Sequence[dict]) -> str:
    """Line chart of modeled cost per run (log scale), one line per strategy."""
    series: OrderedDict = OrderedDict()
    for row in rows:
        if row["query"] == query_id:
            series.setdefault(row["strategy"], []).append(float(row["modeled_us"]))
    width, height, left, right, top, bottom = 640, 360, 70, 130, 30, 40
    plot_w, plot_h = width - left - right, height - top - bottom
    values = [v for vs in series.values() for v in vs if v > 0]
    lo = math.floor(math.log10(min(values))) if values else 0
    hi = math.ceil(math.log10(max(values))) if values else 1
    if hi == lo:
        hi = lo + 1
    runs = max((len(vs) for vs in series.values()), default=1)

    def x(i: int) -> float:
        return left + (plot_w * i / (runs - 1) if runs > 1 else plot_w / 2)

    def y(v: float) -> float:
        v = max(v, 10.0**lo)
        return top + plot_h * (1 - (math.log10(v) - lo) / (hi - lo))

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
              f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n')
    out.write(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
              f'{query_id}: modeled cost per run</text>\n')
    out.write(f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>\n')
    out.write(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>\n')
    for exp in range(lo, hi + 1):
        yy = y(10.0**exp)
        out.write(f'<line x1="{left - 4}" y1="{yy:.1f}" x2="{left + plot_w}" y2="{yy:.1f}" stroke="#ddd"/>\n')
        out.write(f'<text x="{left - 6}" y="{yy + 4:.1f}" text-anchor="end">1e{exp} us</text>\n')
    for i in range(runs):
        out.write(f'<text x="{x(i):.1f}" y="{top + plot_h + 14}" text-anchor="middle">{i}</text>\n')
    out.write(f'<text x="{left + plot_w / 2:.1f}" y="{height - 6}" text-anchor="middle">run</text>\n')
    for k, (name, vs) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        points = " ".join(f"{x(i):.1f},{y(v):.1f}" for i, v in enumerate(vs))
        out.write(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>\n')
        ly = top + 16 * k + 10
        out.write(f'<line x1="{left + plot_w + 10}" y1="{ly}" x2="{left + plot_w + 30}" y2="{ly}" '
                  f'stroke="{color}" stroke-width="2"/>\n')
        out.write(f'<text x="{left + plot_w + 34}" y="{ly + 4}">{name}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


def emit_results(
    reports: Sequence[ExecutionReport],
    out_dir: Union[str, Path],
    formats: Sequence[str] = ("csv", "md-table", "svg-lines"),
) -> list:
    """Write results under ``out_dir``; returns the written paths."""
    if not reports:
        raise BenchmarkError("no reports to emit")
    unknown = set(formats) - {"csv", "md-table", "svg-lines"}
    if unknown:
        raise BenchmarkError(f"unknown output formats: {sorted(unknown)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = csv_rows(reports)
    written = []
    if "csv" in formats:
        path = out / "results.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        written.append(path)
    if "md-table" in formats:
        path = out / "summary.md"
        path.write_text(markdown_table(rows), encoding="utf-8")
        written.append(path)
    if "svg-lines" in formats:
        for qid in OrderedDict.fromkeys(r.query_id for r in reports):
            path = out / f"{qid}_modeled.svg"
            path.write_text(svg_chart(qid, rows), encoding="utf-8")
            written.append(path)
    return written


def read_csv(path: Union[str, Path]) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
