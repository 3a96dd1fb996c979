"""End-to-end acceptance checks.

Each ``criterion_N`` function returns ``(ok, detail)``; the pytest wrappers
print one ``[PASS]``/``[FAIL]`` line per criterion and then assert. Run the
file directly (``python3 tests/test_acceptance.py``) for the same lines
without pytest.
"""

import csv
import io
import random
import shutil
import subprocess
import sys
import tempfile
import time
from collections import deque
from dataclasses import replace
from pathlib import Path

import pytest

from graphopt.bench import DEFAULT_GENERATOR, BenchConfig, canonical_queries, run_benchmark
from graphopt.elementary import BackendHandle
from graphopt.kv import build_from_graph
from graphopt.naive import builtin_shortest_path
from graphopt.optimizer import Strategy, graph_bfs_shortest_path, kv_requirements, plan, run_query
from graphopt.property_graph import Edge, Node, PropertyGraph, generate_synthetic
from graphopt.query_model import classify, parse_query
from graphopt.query_model.classify import attribute_reads
from graphopt.query_model.parser import QueryError

from fixtures import Q1_TEXT
from gen import random_graph, random_query
from replay import linearity_holds, replay_case

ROOT = Path(__file__).resolve().parents[1]


# --- criterion 1: BFS optimality ---------------------------------------------------

def _plain_bfs(adj, s, e):
    dist = {s: 0}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == e:
            return dist[v]
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return None


def criterion_1():
    started = time.perf_counter()
    cfg = random.Random(2024)
    configs = [(cfg.randint(1000, 5000), cfg.uniform(4, 16)) for _ in range(20)]
    checked = wrong = 0
    for k, (n, degree) in enumerate(configs):
        seed = k % 3 + 1
        rng = random.Random(seed * 1_000_003 + k)
        m = round(n * degree / 2)
        ends = [(rng.randrange(n), rng.randrange(n)) for _ in range(m)]
        g = PropertyGraph(
            [Node(i, frozenset({"N"}), {}) for i in range(n)],
            [Edge(n + j, "t", s, t, {}) for j, (s, t) in enumerate(ends)],
        )
        adj = [[] for _ in range(n)]
        for s, t in ends:
            adj[s].append(t)
            adj[t].append(s)
        for _ in range(100):
            s, e = rng.randrange(n), rng.randrange(n)
            path = graph_bfs_shortest_path(s, e, BackendHandle(g))
            want = _plain_bfs(adj, s, e)
            got = None if path is None else path.length
            checked += 1
            wrong += got != want
    elapsed = time.perf_counter() - started
    ok = wrong == 0 and elapsed < 60
    return ok, f"{checked - wrong}/{checked} path lengths match over 20 graphs in {elapsed:.1f}s"


# --- criterion 2: strategy equivalence ---------------------------------------------

def _tables(graph, query):
    out = {s: run_query(query, s, BackendHandle(graph))[0] for s in ("naive", "opt1")}
    pairs = kv_requirements(query)
    if all(label is not None and label in graph.labels for label, _ in pairs):
        kv = build_from_graph(graph, sorted(pairs)) if pairs else None
        out["opt2"] = run_query(query, "opt2", BackendHandle(graph), kv)[0]
    return out


def criterion_2():
    rng = random.Random(77)
    valid = agree = with_opt2 = 0
    while valid < 200:
        g = random_graph(rng, rng.randint(1, 200), rng.randint(0, 400))
        try:
            q = parse_query(random_query(rng))
        except QueryError:
            continue
        valid += 1
        tables = _tables(g, q)
        with_opt2 += "opt2" in tables
        first = tables["naive"]
        agree += all(t == first for t in tables.values())
    return agree == valid, f"{agree}/{valid} queries agree ({with_opt2} also planned for opt2)"


# --- criterion 3: shortest-path ordering ---------------------------------------------

_default_graph = None


def default_graph():
    global _default_graph
    if _default_graph is None:
        _default_graph = generate_synthetic(DEFAULT_GENERATOR)
    return _default_graph


def _endpoints(graph, text):
    q = parse_query(text)
    return [graph.lookup(n.label, *n.prop_filters[0])[0] for ch in q.chains for n in ch.nodes]


def criterion_3():
    g = default_graph()
    texts = canonical_queries(g)
    ok, parts = True, []
    for qid in ("q4", "q12"):
        s, e = _endpoints(g, texts[qid])
        bfs, builtin = BackendHandle(g), BackendHandle(g)
        p1 = graph_bfs_shortest_path(s, e, bfs)
        p2 = builtin_shortest_path(s, e, builtin)
        explored = builtin.counter.rows_transferred
        ratio = builtin.modeled_cost() / bfs.modeled_cost()
        good = (
            p1 is not None and p1 == p2
            and bfs.modeled_cost() * 5 <= builtin.modeled_cost()
            and bfs.counter.attribute_access == 0
            and builtin.counter.attribute_access >= explored >= 1
        )
        ok &= good
        parts.append(f"{qid} builtin/bfs={ratio:.1f}x bfs attr={bfs.counter.attribute_access} "
                     f"builtin attr={builtin.counter.attribute_access} explored={explored}")
    return ok, "; ".join(parts)


# --- criterion 4: Q1 ordering -------------------------------------------------------

def criterion_4():
    ok, parts = True, []
    for seed in (42, 43, 44):
        reports = run_benchmark(BenchConfig(generator=replace(DEFAULT_GENERATOR, seed=seed),
                                            queries=["q1"], repetitions=1))
        cost = {r.strategy: r.mean_modeled_us for r in reports}
        naive, opt1, opt2 = cost["naive"], cost["opt1"], cost["opt2"]
        good = naive > opt1 > opt2 and naive / opt1 >= 2 and naive / opt2 >= 10
        ok &= good
        parts.append(f"seed {seed}: naive/opt1={naive / opt1:.1f}x naive/opt2={naive / opt2:.1f}x")
    return ok, "; ".join(parts)


# --- criterion 5: Q15 parity ---------------------------------------------------------

def criterion_5():
    g = default_graph()
    reports = run_benchmark(BenchConfig(queries=["q15"], strategies=["naive", "opt1"], repetitions=1), g)
    cost = {r.strategy: r.mean_modeled_us for r in reports}
    gap = abs(cost["opt1"] - cost["naive"]) / cost["naive"]
    q15 = parse_query(canonical_queries(g)["q15"])
    same_plan = plan(q15, Strategy.POLYGLOT) == plan(q15, Strategy.CLIENT)
    return gap <= 0.25 and same_plan, f"|opt1-naive|/naive={gap:.3f}, polyglot plan == client plan: {same_plan}"


# --- criterion 6: classifier goldens -------------------------------------------------

def criterion_6():
    texts = canonical_queries(default_graph())
    want = {
        "q1": ("pattern/CRPQ", "local"),
        "q4": ("reachability/shortest-path", "local_and_global"),
        "q12": ("reachability/shortest-path", "local_and_global"),
        "q15": ("pattern/CRPQ", "local"),
    }
    got = {qid: classify(parse_query(texts[qid])) for qid in want}
    ok = all((got[q].category, got[q].scope) == want[q] for q in want)
    q15_reads = attribute_reads(parse_query(texts["q15"]))
    q15_order_return = sum(1 for sources in q15_reads.values() if sources & {"order", "return"})
    q1_count = classify(parse_query(Q1_TEXT)).attribute_access_count
    ok &= q1_count == got["q1"].attribute_access_count and q1_count > q15_order_return
    summary = ", ".join(f"{q}={got[q].category}/{got[q].scope}" for q in want)
    return ok, f"{summary}; q1 reads {q1_count} > q15 order/return reads {q15_order_return}"


# --- criterion 7: instrumentation exactness --------------------------------------------

def criterion_7():
    rng = random.Random(7)
    bad_cases = 0
    for _ in range(10_000):
        g = random_graph(rng, rng.randint(1, 25), rng.randint(0, 60))
        bad_cases += bool(replay_case(rng, g, rng.randint(1, 30)))
    lin = random.Random(8)
    linear = sum(linearity_holds(lin) for _ in range(1000))
    return bad_cases == 0 and linear == 1000, (
        f"{10_000 - bad_cases}/10000 replay cases exact, {linear}/1000 linearity pairs exact")


# --- criterion 8: reproducible CLI output -------------------------------------------------

def _cli():
    exe = shutil.which("graphopt")
    return [exe] if exe else [sys.executable, "-c", "import sys; from graphopt.cli import main; sys.exit(main())"]


def _without_wall(path):
    rows = list(csv.reader(open(path, newline="")))
    drop = rows[0].index("wall_us")
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows([r[:drop] + r[drop + 1:] for r in rows])
    return buf.getvalue().encode()


def criterion_8():
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for name in ("a", "b"):
            out = Path(tmp) / name
            proc = subprocess.run(_cli() + ["bench", "--generate", "--reps", "2", "--out", str(out)],
                                  capture_output=True, text=True, cwd=ROOT)
            if proc.returncode != 0:
                return False, f"run {name} exited {proc.returncode}: {proc.stderr.strip()[-200:]}"
            outs.append(_without_wall(out / "results.csv"))
    same = outs[0] == outs[1]
    return same, f"CSVs without wall_us are byte-identical: {same} ({len(outs[0])} bytes)"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


def _report(number, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, 9))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number - 1]()
    with capsys.disabled():
        print("\n" + _report(number, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for number, check in enumerate(CRITERIA, 1):
        ok, detail = check()
        failures += not ok
        print(_report(number, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
