"""Client-side execution plans over elementary queries, with optional
key-value offload of metadata reads.

Rewrite rules used by :func:`plan` for the ``client_algorithm`` strategy:

* single-node chains with one literal filter become index lookups;
* ``shortestPath(a, b)`` becomes a client-side BFS over ``get_neighbours``;
* chains joined to the rest only through a cross-reference filter are split
  off and seeded with an index lookup on the referenced value;
* the remaining chains ("core") still run as one server-side pattern match,
  but stripped of ORDER BY, LIMIT, DISTINCT and ``count``: it only reads the
  keys used by its own filters, its returned properties and outgoing
  cross-references;
* sorting, first-by, grouping and counting happen on the client, and
  ORDER BY keys are fetched only for rows that survived the match.

``polyglot`` additionally routes client-side reads of attributes that are
never used as match filters to a :class:`~graphopt.kv.KVStore`.
"""

from __future__ import annotations

import enum
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .elementary import BackendHandle, CallCounts
from .kv import KVStore
from .naive import (
    PATH_SLOT,
    PatternMatcher,
    _run_naive,
    make_evaluator,
    name_variables,
)
from .query_model.ast import Chain, CrossRef, PropItem, Query, ReturnClause, VarItem
from .query_model.classify import QueryClassification, attribute_reads, classify
from .results import ExecutionReport, Path, ResultTable, cell_key, column_names, project, row_key


class Strategy(str, enum.Enum):
    NAIVE = "naive"
    CLIENT = "client_algorithm"
    POLYGLOT = "polyglot"

    @classmethod
    def parse(cls, name: Union[str, "Strategy"]) -> "Strategy":
        if isinstance(name, Strategy):
            return name
        aliases = {"naive": cls.NAIVE, "opt1": cls.CLIENT, "client_algorithm": cls.CLIENT,
                   "opt2": cls.POLYGLOT, "polyglot": cls.POLYGLOT}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown strategy {name!r}") from None

    @property
    def short(self) -> str:
        return {"naive": "naive", "client_algorithm": "opt1", "polyglot": "opt2"}[self.value]


class PlanningError(ValueError):
    def __init__(self, message: str, missing: tuple = ()):
        self.missing = missing
        super().__init__(message)


class AttributeResolutionError(LookupError):
    pass


# --- plan steps ---------------------------------------------------------------


@dataclass(frozen=True)
class NaiveStep:
    query: Query


@dataclass(frozen=True)
class EntryLookup:
    var: str
    label: str
    key: str
    value: object


@dataclass(frozen=True)
class ServerMatch:
    chains: tuple
    eager_keys: frozenset


@dataclass(frozen=True)
class DependentMatch:
    chain: Chain


@dataclass(frozen=True)
class GraphBfs:
    source: str
    target: str


@dataclass(frozen=True)
class ResolveAttribute:
    var: str
    key: str
    source: str  # "graph" | "kv"


@dataclass(frozen=True)
class FirstBy:
    var: str
    key: str
    descending: bool
    source: str
    return_clause: ReturnClause


@dataclass(frozen=True)
class ClientAggregate:
    return_clause: ReturnClause


@dataclass(frozen=True)
class Plan:
    steps: tuple
    strategy: Strategy = field(default=Strategy.NAIVE, compare=False)

    def describe(self) -> list:
        out = []
        for step in self.steps:
            name = type(step).__name__
            if isinstance(step, EntryLookup):
                out.append(f"{name}({step.var}:{step.label} {{{step.key}: {step.value!r}}})")
            elif isinstance(step, ServerMatch):
                out.append(f"{name}({len(step.chains)} chain(s), reads {sorted(step.eager_keys)})")
            elif isinstance(step, DependentMatch):
                out.append(f"{name}({', '.join(n.var for n in step.chain.nodes)})")
            elif isinstance(step, GraphBfs):
                out.append(f"{name}({step.source} -> {step.target})")
            elif isinstance(step, (ResolveAttribute, FirstBy)):
                out.append(f"{name}({step.var}.{step.key} via {step.source})")
            else:
                out.append(name)
        return out


# --- planning -----------------------------------------------------------------


def _chain_vars(chain: Chain) -> set:
    return {n.var for n in chain.nodes} | {r.var for r in chain.rels}


def _filters(chain: Chain):
    for node in chain.nodes:
        for key, value in node.prop_filters:
            yield node.var, key, value
    for rel in chain.rels:
        for key, value in rel.prop_filters:
            yield rel.var, key, value


def _split(query: Query) -> tuple:
    """Partition chain indices into entry, dependent and core."""
    chains = query.chains
    referenced = {v.var for ch in chains for _, _, v in _filters(ch) if isinstance(v, CrossRef)}
    occurrences: dict = {}
    for ci, chain in enumerate(chains):
        for var in _chain_vars(chain):
            occurrences.setdefault(var, set()).add(ci)

    def private(ci: int) -> bool:
        return all(occurrences[v] == {ci} and v not in referenced for v in _chain_vars(chains[ci]))

    entry, dependent, core = [], [], []
    for ci, chain in enumerate(chains):
        if not private(ci):
            core.append(ci)
            continue
        node = chain.nodes[0]
        filters = list(_filters(chain))
        if (
            not chain.rels
            and node.label is not None
            and len(filters) == 1
            and not isinstance(filters[0][2], CrossRef)
        ):
            entry.append(ci)
        elif any(
            n.label is not None and any(isinstance(v, CrossRef) for _, v in n.prop_filters)
            for n in chain.nodes
        ):
            dependent.append(ci)
        else:
            core.append(ci)
    core_vars = set().union(*(_chain_vars(chains[ci]) for ci in core)) if core else set()
    # dependent chains may only reference core variables (or nothing else bound)
    for ci in list(dependent):
        refs = {v.var for _, _, v in _filters(chains[ci]) if isinstance(v, CrossRef)}
        if not refs <= core_vars:
            dependent.remove(ci)
            core.append(ci)
    core.sort()
    return entry, dependent, core


def _core_keys(query: Query, core: list) -> frozenset:
    chains = query.chains
    core_vars = set().union(*(_chain_vars(chains[ci]) for ci in core)) if core else set()
    keys = set()
    for ci in core:
        for _, key, value in _filters(chains[ci]):
            keys.add(key)
            if isinstance(value, CrossRef):
                keys.add(value.key)
    for chain in chains:
        for _, _, value in _filters(chain):
            if isinstance(value, CrossRef) and value.var in core_vars:
                keys.add(value.key)
    for item in query.return_clause.items:
        if isinstance(item.expr, PropItem) and item.expr.var in core_vars:
            keys.add(item.expr.key)
    return frozenset(keys)


def kv_requirements(query: Query) -> frozenset:
    """``(label, key)`` pairs a polyglot plan of ``query`` would read from the KV store."""
    try:
        return frozenset(_offload_pairs(name_variables(query), _polyglot_targets(name_variables(query))))
    except PlanningError as exc:
        return frozenset(exc.missing)


def _polyglot_targets(query: Query) -> list:
    """Client-resolved ``(var, key)`` reads of a client_algorithm plan that
    are never used as match filters."""
    steps = _client_steps(query, Strategy.CLIENT, None)
    reads = attribute_reads(query)
    out = []
    for step in steps:
        if isinstance(step, (ResolveAttribute, FirstBy)):
            sources = reads.get((step.var, step.key), set())
            if "filter" not in sources and "crossref" not in sources:
                out.append((step.var, step.key))
    return out


def _offload_pairs(query: Query, targets: list) -> list:
    pairs, missing = [], []
    rel_vars = set(query.rel_vars())
    for var, key in targets:
        label = None if var in rel_vars else query.var_label(var)
        if label is None:
            missing.append((None, key))
        else:
            pairs.append((label, key))
    if missing:
        raise PlanningError(
            "polyglot offload needs labelled node variables for " + ", ".join(f"{k}" for _, k in missing),
            tuple(missing),
        )
    return pairs


def _client_steps(query: Query, strategy: Strategy, kv: Optional[Union[KVStore, frozenset]]) -> tuple:
    entry, dependent, core = _split(query)
    chains = query.chains
    ret = query.return_clause
    steps: list = []
    for ci in entry:
        node = chains[ci].nodes[0]
        key, value = node.prop_filters[0]
        steps.append(EntryLookup(node.var, node.label, key, value))
    core_keys = _core_keys(query, core)
    if core:
        steps.append(ServerMatch(tuple(chains[ci] for ci in core), core_keys))
    for ci in dependent:
        steps.append(DependentMatch(chains[ci]))
    sp = query.shortest_path
    if sp is not None:
        steps.append(GraphBfs(*sp))

    core_vars = set().union(*(_chain_vars(chains[ci]) for ci in core)) if core else set()

    def server_has(var: str, key: str) -> bool:
        return var in core_vars and key in core_keys

    resolved = set()
    for item in ret.items:
        expr = item.expr
        if isinstance(expr, PropItem) and not server_has(expr.var, expr.key) and (expr.var, expr.key) not in resolved:
            resolved.add((expr.var, expr.key))
            steps.append(ResolveAttribute(expr.var, expr.key, "graph"))

    order = ret.order_by
    final = ClientAggregate(ret)
    if order is not None and isinstance(order.expr, PropItem):
        var, key = order.expr.var, order.expr.key
        if not server_has(var, key) and (var, key) not in resolved:
            first_by_ok = (
                ret.limit == 1
                and not ret.has_aggregate
                and not ret.distinct
                and VarItem(var) in [i.expr for i in ret.items]
            )
            if first_by_ok:
                final = FirstBy(var, key, order.descending, "graph", ret)
            else:
                steps.append(ResolveAttribute(var, key, "graph"))
    steps.append(final)

    if strategy is Strategy.POLYGLOT:
        reads = attribute_reads(query)

        def offloadable(var, key):
            sources = reads.get((var, key), set())
            return "filter" not in sources and "crossref" not in sources

        targets = [
            (s.var, s.key) for s in steps if isinstance(s, (ResolveAttribute, FirstBy)) and offloadable(s.var, s.key)
        ]
        if targets:
            pairs = _offload_pairs(query, targets)
            if kv is None:
                raise PlanningError(
                    "polyglot plan needs a key-value store covering " + ", ".join(f"{l}.{k}" for l, k in pairs),
                    tuple(pairs),
                )
            coverage = kv.coverage if isinstance(kv, KVStore) else frozenset(kv)
            missing = tuple(p for p in pairs if p not in coverage)
            if missing:
                raise PlanningError(
                    "key-value store lacks " + ", ".join(f"{l}.{k}" for l, k in missing), missing
                )
            retagged = []
            for s in steps:
                if isinstance(s, ResolveAttribute) and offloadable(s.var, s.key):
                    s = ResolveAttribute(s.var, s.key, "kv")
                elif isinstance(s, FirstBy) and offloadable(s.var, s.key):
                    s = FirstBy(s.var, s.key, s.descending, "kv", s.return_clause)
                retagged.append(s)
            steps = retagged
    return tuple(steps)


def plan(
    query: Query,
    strategy: Union[Strategy, str],
    classification: Optional[QueryClassification] = None,
    kv: Optional[Union[KVStore, frozenset]] = None,
) -> Plan:
    """Build an execution plan for ``query`` under ``strategy``.

    ``kv`` (a store or a coverage set of ``(label, key)``) is consulted only
    for the polyglot strategy.
    """
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.NAIVE:
        return Plan((NaiveStep(query),), strategy)
    if classification is None:
        classification = classify(query)
    named = name_variables(query)
    if classification.category == "reachability/shortest-path" and named.shortest_path is None:
        raise PlanningError("classification says shortest path but the query has none")
    return Plan(_client_steps(named, strategy, kv), strategy)


# --- client algorithms --------------------------------------------------------


@dataclass
class BfsState:
    queue: deque = field(default_factory=deque)
    discovered: set = field(default_factory=set)
    parent: dict = field(default_factory=dict)


def _reconstruct(parent: dict, s: int, v: int) -> Path:
    path = [v]
    while path[-1] != s:
        path.append(parent[path[-1]])
    path.reverse()
    return Path(tuple(path))


def graph_bfs_shortest_path(
    s: int, e: int, handle: BackendHandle, goal_test: str = "dequeue"
) -> Optional[Path]:
    """Breadth-first search over the undirected view using only
    ``get_neighbours``; returns the path ``s -> e`` or ``None``.

    Neighbourhoods are scanned in ascending node id, so among equally short
    paths the lexicographically smallest is returned.
    """
    handle._require_node(s)
    handle._require_node(e)
    if goal_test not in ("dequeue", "discovery"):
        raise ValueError("goal_test must be 'dequeue' or 'discovery'")
    state = BfsState()
    state.discovered.add(s)
    state.queue.append(s)
    if goal_test == "discovery" and s == e:
        return Path((s,))
    discovered, parent, queue = state.discovered, state.parent, state.queue
    on_discovery = goal_test == "discovery"
    while queue:
        v = queue.popleft()
        if v == e and not on_discovery:
            return _reconstruct(parent, s, v)
        fresh = {w for _, w in handle.get_neighbours(v, "both")} - discovered
        for w in sorted(fresh):
            discovered.add(w)
            parent[w] = v
            queue.append(w)
            if on_discovery and w == e:
                return _reconstruct(parent, s, w)
    return None


def client_first_by(
    rows: ResultTable,
    column: Union[int, str],
    key: str,
    resolve: Callable[[int, str], object],
    descending: bool = False,
) -> ResultTable:
    """Return the single row whose ``column`` element has the smallest
    (or largest, with ``descending``) ``key``; ties go to the lowest
    canonical row. ``resolve`` is called exactly once per input row."""
    if isinstance(column, str):
        column = rows.columns.index(column)
    if not rows.rows:
        return ResultTable(rows.columns, (), rows.distinct, True)
    keyed = []
    for row in rows.rows:
        try:
            value = resolve(row[column], key)
        except Exception as exc:
            raise AttributeResolutionError(f"cannot resolve {key!r} for row {row!r}: {exc}") from exc
        keyed.append((cell_key(value), row_key(row), row))
    if descending:
        best = max(k[0] for k in keyed)
        candidates = [k for k in keyed if k[0] == best]
    else:
        best = min(k[0] for k in keyed)
        candidates = [k for k in keyed if k[0] == best]
    winner = min(candidates, key=lambda k: k[1])[2]
    return ResultTable(rows.columns, (winner,), rows.distinct, True)


def execute_plan(
    plan: Plan,
    handle: BackendHandle,
    kv: Optional[KVStore] = None,
    query_id: str = "query",
) -> tuple:
    """Run ``plan``; returns ``(ResultTable, ExecutionReport)``."""
    before = handle.counter.snapshot()
    kv_before = kv.counter.snapshot() if kv is not None else CallCounts()
    started = time.perf_counter_ns()
    table, visited = _execute(plan, handle, kv)
    wall = (time.perf_counter_ns() - started) / 1000.0
    counts = handle.counter.snapshot() - before
    if kv is not None:
        counts = counts + (kv.counter.snapshot() - kv_before)
    report = ExecutionReport(query_id, plan.strategy.value, checksum=table.checksum(), candidates_visited=visited)
    report.add_run(wall, counts, handle.cost_model)
    return table, report


def _resolver(source: str, handle: BackendHandle, kv: Optional[KVStore]):
    if source == "kv":
        if kv is None:
            raise PlanningError("plan reads from a key-value store but none was supplied")
        return kv.get
    return handle.get_attribute


def _execute(plan: Plan, handle: BackendHandle, kv: Optional[KVStore]) -> tuple:
    if not plan.steps:
        return ResultTable((), ()), 0
    if isinstance(plan.steps[0], NaiveStep):
        return _run_naive(name_variables(plan.steps[0].query), handle)

    known: dict = {}
    visited = 0
    rows: list = [({}, frozenset())]
    evaluate = make_evaluator(known)
    for step in plan.steps:
        if isinstance(step, EntryLookup):
            hits = handle.find_nodes(step.label, step.key, step.value)
            rows = [({**b, step.var: h}, used) for b, used in rows for h in hits]
        elif isinstance(step, ServerMatch):
            if not rows:
                continue
            matcher = PatternMatcher(handle, step.chains, eager_keys=step.eager_keys, known=known)
            core = [(dict(b), used) for b, used in matcher.match()]
            visited += matcher.candidates_visited
            rows = [({**b, **cb}, used | cu) for b, used in rows for cb, cu in core]
        elif isinstance(step, DependentMatch):
            matcher = PatternMatcher(
                handle, (step.chain,), eager_keys=None, crossref_entry=True, known=known
            )
            out = []
            for b, used in rows:
                out.extend((dict(nb), nu) for nb, nu in matcher.match(b, used))
            visited += matcher.candidates_visited
            rows = out
        elif isinstance(step, GraphBfs):
            for b, _ in rows:
                b[PATH_SLOT] = graph_bfs_shortest_path(b[step.source], b[step.target], handle)
        elif isinstance(step, ResolveAttribute):
            get = _resolver(step.source, handle, kv)
            for b, _ in rows:
                ident = b[step.var]
                known[(ident, step.key)] = get(ident, step.key)
        elif isinstance(step, FirstBy):
            ret = step.return_clause
            table = ResultTable(
                column_names(ret),
                tuple(tuple(evaluate(b, it.expr) for it in ret.items) for b, _ in rows),
            )
            column = [i.expr for i in ret.items].index(VarItem(step.var))
            return client_first_by(table, column, step.key, _resolver(step.source, handle, kv), step.descending), visited
        elif isinstance(step, ClientAggregate):
            return project([b for b, _ in rows], step.return_clause, evaluate), visited
        else:
            raise TypeError(f"unknown plan step {step!r}")
    raise ValueError("plan does not end with an aggregation step")


def run_query(
    query: Query,
    strategy: Union[Strategy, str],
    handle: BackendHandle,
    kv: Optional[KVStore] = None,
    query_id: str = "query",
) -> tuple:
    """Plan and execute ``query`` in one go."""
    return execute_plan(plan(query, strategy, kv=kv), handle, kv, query_id)
