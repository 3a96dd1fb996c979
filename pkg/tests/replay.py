"""Replay random elementary-op sequences against a shadow tally.

The shadow computes both the expected answer and the expected counter
increments directly from the graph's dicts.
"""

from __future__ import annotations

import random

from graphopt.elementary import COUNTER_FIELDS, BackendHandle, CallCounts, CostModel, UnknownElementError, modeled_cost

import reference as ref

OPS = ("find_nodes", "scan_nodes", "get_labels", "get_neighbours", "get_attribute", "edges_between")
KEYS = ("name", "score", "when", "ref", "kind", "missing")


def _random_op(rng, graph, ids, max_id):
    op = rng.choice(OPS)
    some_id = rng.choice(ids) if ids and rng.random() < 0.9 else rng.randint(0, max_id + 5)
    if op == "find_nodes":
        value = rng.choice(("n0", "n1", "n5", 0, 1, 1.0, 2, "zz"))
        return op, (rng.choice(("A", "B", "C", "Z")), rng.choice(KEYS), value)
    if op == "scan_nodes":
        return op, (rng.choice(("A", "B", "C", "Z", None)),)
    if op == "get_labels":
        return op, (some_id,)
    if op == "get_neighbours":
        return op, (some_id, rng.choice(("out", "in", "both")), rng.choice((None, "X", "Y", "Q")))
    if op == "get_attribute":
        return op, (some_id, rng.choice(KEYS))
    other = rng.choice(ids) if ids and rng.random() < 0.9 else rng.randint(0, max_id + 5)
    return op, (some_id, other, rng.choice((None, "X", "Y")))


def _shadow(graph, op, args):
    """(expected result or the exception type, increments)."""
    nodes, edges = graph.nodes, graph.edges
    if op == "find_nodes":
        label, key, value = args
        hits = sorted(
            v.id for v in nodes.values()
            if label in v.labels and key in v.props and ref.tag(v.props[key]) == ref.tag(value)
        )
        return hits, {"index_lookup": 1, "rows_transferred": len(hits)}
    if op == "scan_nodes":
        (label,) = args
        hits = sorted(v.id for v in nodes.values() if label is None or label in v.labels)
        return hits, {"node_lookup": 1, "rows_transferred": len(hits)}
    if op == "get_labels":
        (v,) = args
        if v not in nodes:
            return UnknownElementError, {}
        return nodes[v].labels, {"node_lookup": 1}
    if op == "get_neighbours":
        v, direction, etype = args
        if v not in nodes:
            return UnknownElementError, {}
        out = []
        for e in edges.values():
            if etype is not None and e.type != etype:
                continue
            if direction in ("out", "both") and e.start == v:
                out.append((e.id, e.end))
            if direction in ("in", "both") and e.end == v:
                out.append((e.id, e.start))
        return sorted(out), {"neighbours": 1, "rows_transferred": len(out)}
    if op == "get_attribute":
        ident, key = args
        owner = nodes.get(ident) or edges.get(ident)
        if owner is None:
            return UnknownElementError, {}
        return owner.props.get(key), {"attribute_access": 1}
    a, b, etype = args
    if a not in nodes or b not in nodes:
        return UnknownElementError, {}
    hits = sorted(e.id for e in edges.values() if e.start == a and e.end == b and (etype is None or e.type == etype))
    return hits, {"edges_between": 1}


def _normalise(op, result):
    if op in ("get_neighbours",):
        return sorted(result)
    if op == "edges_between":
        return sorted(e.id for e in result)
    if op in ("find_nodes", "scan_nodes"):
        return sorted(result)
    return result


def replay_case(rng: random.Random, graph, steps: int) -> list:
    """Run one random sequence; returns a list of discrepancy descriptions."""
    handle = BackendHandle(graph)
    tally = dict.fromkeys(COUNTER_FIELDS, 0)
    ids = sorted(graph.nodes) + sorted(graph.edges)
    max_id = max(ids) if ids else 0
    problems = []
    for _ in range(steps):
        op, args = _random_op(rng, graph, ids, max_id)
        expected, increments = _shadow(graph, op, args)
        try:
            got = _normalise(op, getattr(handle, op)(*args))
        except UnknownElementError:
            got = UnknownElementError
        if expected is UnknownElementError or got is UnknownElementError:
            if expected is not got:
                problems.append(f"{op}{args}: expected {expected}, got {got}")
        elif ref.tag(got) != ref.tag(expected) if op == "get_attribute" else got != expected:
            problems.append(f"{op}{args}: expected {expected!r}, got {got!r}")
        for name, amount in increments.items():
            tally[name] += amount
        snap = handle.counter.snapshot().as_dict()
        if snap != tally:
            problems.append(f"{op}{args}: counter {snap} != shadow {tally}")
            tally = snap
    return problems


def random_counts(rng: random.Random) -> CallCounts:
    return CallCounts(*(rng.randint(0, 10**6) for _ in COUNTER_FIELDS))


def random_model(rng: random.Random) -> CostModel:
    attribute = rng.randint(1, 1000)
    return CostModel(
        node_lookup_us=rng.randint(0, 1000),
        index_lookup_us=rng.randint(0, 1000),
        neighbours_us=rng.randint(0, 1000),
        attribute_access_us=attribute,
        edges_between_us=rng.randint(0, 1000),
        row_transfer_us=rng.randint(0, 100),
        kv_lookup_us=rng.randint(0, attribute - 1),
    )


def linearity_holds(rng: random.Random) -> bool:
    model = random_model(rng)
    a, b = random_counts(rng), random_counts(rng)
    return modeled_cost(a + b, model) == modeled_cost(a, model) + modeled_cost(b, model)
