"""Direct declarative execution, emulating a server that runs the whole query.

The emulation keeps three deliberately costly habits of the server side:

* every candidate binding (node or relationship) eagerly reads *every*
  property key named anywhere in the query, even if the candidate is
  discarded right after;
* cross-reference filters (``{documentID: r.context}``) are never used as
  index seeks; such patterns fall back to a label scan plus filter;
* the built-in shortest path is a uniform-cost search that probes a
  ``weight`` attribute on every relaxed edge.

All graph access goes through :class:`~graphopt.elementary.BackendHandle`.
Results are exact; only the cost differs from the optimized strategies.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .elementary import BackendHandle
from .property_graph import values_equal
from .query_model.ast import Chain, CrossRef, PropItem, Query, ShortestPathItem, VarItem
from .query_model.classify import attribute_reads
from .results import ExecutionReport, Path, project

PATH_SLOT = "#path"
WEIGHT_KEY = "weight"


def name_variables(query: Query) -> Query:
    """Give every anonymous pattern an internal variable name (``#n0.1``)."""
    chains = []
    for ci, chain in enumerate(query.chains):
        nodes = tuple(
            n if n.var is not None else replace(n, var=f"#n{ci}.{pos}") for pos, n in enumerate(chain.nodes)
        )
        rels = tuple(
            r if r.var is not None else replace(r, var=f"#r{ci}.{pos}") for pos, r in enumerate(chain.rels)
        )
        chains.append(Chain(nodes, rels))
    return replace(query, chains=tuple(chains))


@dataclass
class _Constraints:
    labels: dict = field(default_factory=dict)  # node var -> set of labels
    literals: dict = field(default_factory=dict)  # var -> [(key, value)]
    crossrefs: list = field(default_factory=list)  # (var, key, ref_var, ref_key)
    rel_vars: set = field(default_factory=set)


def _constraints(chains) -> _Constraints:
    c = _Constraints()
    for chain in chains:
        for node in chain.nodes:
            labels = c.labels.setdefault(node.var, set())
            if node.label is not None:
                labels.add(node.label)
            for key, value in node.prop_filters:
                if isinstance(value, CrossRef):
                    c.crossrefs.append((node.var, key, value.var, value.key))
                else:
                    c.literals.setdefault(node.var, []).append((key, value))
        for rel in chain.rels:
            c.rel_vars.add(rel.var)
            for key, value in rel.prop_filters:
                if isinstance(value, CrossRef):
                    c.crossrefs.append((rel.var, key, value.var, value.key))
                else:
                    c.literals.setdefault(rel.var, []).append((key, value))
    return c


class PatternMatcher:
    """Backtracking matcher over chains of node/relationship patterns.

    ``eager_keys`` set: every binding reads all of them (server emulation).
    ``eager_keys`` ``None``: reads happen on demand and are memoised per run.
    ``crossref_entry``: allow an index seek on a cross-reference value when a
    chain has no bound node (client-side rewrite).
    """

    def __init__(
        self,
        handle: BackendHandle,
        chains,
        eager_keys: Optional[frozenset] = None,
        crossref_entry: bool = False,
        known: Optional[dict] = None,
        outer_constraints: Optional[_Constraints] = None,
    ):
        self.handle = handle
        self.chains = tuple(chains)
        self.eager_keys = tuple(sorted(eager_keys)) if eager_keys is not None else None
        self.crossref_entry = crossref_entry
        self.known = known if known is not None else {}
        self.cons = outer_constraints or _constraints(self.chains)
        self.candidates_visited = 0

    # --- values
    def value(self, ident: int, key: str):
        slot = (ident, key)
        if slot not in self.known:
            self.known[slot] = self.handle.get_attribute(ident, key)
        return self.known[slot]

    def _bind_reads(self, ident: int) -> None:
        self.candidates_visited += 1
        if self.eager_keys is not None:
            get = self.handle.get_attribute
            for key in self.eager_keys:
                self.known[(ident, key)] = get(ident, key)

    def _satisfied(self, var: str, binding: dict) -> bool:
        ident = binding[var]
        for key, literal in self.cons.literals.get(var, ()):
            if not values_equal(self.value(ident, key), literal):
                return False
        for owner, key, ref, ref_key in self.cons.crossrefs:
            if var not in (owner, ref) or owner not in binding or ref not in binding:
                continue
            if not values_equal(self.value(binding[owner], key), self.value(binding[ref], ref_key)):
                return False
        return True

    def _label_ok(self, var: str, ident: int, known_label: Optional[str]) -> bool:
        required = self.cons.labels.get(var, set())
        if not required or required == {known_label}:
            return True
        return required <= self.handle.get_labels(ident)

    # --- matching
    def match(self, binding: Optional[dict] = None, used: frozenset = frozenset()) -> Iterator[tuple]:
        """Yield ``(binding, used_edges)`` for every match extending ``binding``."""
        yield from self._chain(0, dict(binding or {}), used)

    def _chain(self, ci: int, binding: dict, used: frozenset):
        if ci == len(self.chains):
            yield binding, used
            return
        chain = self.chains[ci]
        anchor = next((p for p, n in enumerate(chain.nodes) if n.var in binding), None)
        if anchor is not None:
            yield from self._extend(ci, chain, anchor, self._walk_order(chain, anchor), 0, binding, used)
            return
        anchor, candidates, known_label = self._entry(chain, binding)
        var = chain.nodes[anchor].var
        order = self._walk_order(chain, anchor)
        for ident in candidates:
            if not self._label_ok(var, ident, known_label):
                continue
            binding[var] = ident
            self._bind_reads(ident)
            if self._satisfied(var, binding):
                yield from self._extend(ci, chain, anchor, order, 0, binding, used)
            del binding[var]

    def _entry(self, chain: Chain, binding: dict):
        best = None
        for pos, node in enumerate(chain.nodes):
            if node.label is None:
                continue
            for key, value in node.prop_filters:
                if isinstance(value, CrossRef):
                    if not self.crossref_entry or value.var not in binding:
                        continue
                    value = self.value(binding[value.var], value.key)
                    if value is None:
                        hits = []
                    else:
                        hits = self.handle.find_nodes(node.label, key, value)
                else:
                    hits = self.handle.find_nodes(node.label, key, value)
                if best is None or len(hits) < len(best[1]):
                    best = (pos, hits, node.label)
        if best is not None:
            return best
        label = chain.nodes[0].label
        return 0, self.handle.scan_nodes(label), label

    @staticmethod
    def _walk_order(chain: Chain, anchor: int) -> list:
        steps = []
        for p in range(anchor, len(chain.rels)):
            rel = chain.rels[p]
            steps.append((p, p + 1, rel, "out" if rel.direction == "right" else "in"))
        for p in range(anchor, 0, -1):
            rel = chain.rels[p - 1]
            steps.append((p, p - 1, rel, "in" if rel.direction == "right" else "out"))
        return steps

    def _extend(self, ci, chain, anchor, steps, k, binding, used):
        if k == len(steps):
            yield from self._chain(ci + 1, binding, used)
            return
        src_pos, dst_pos, rel, direction = steps[k]
        src = binding[chain.nodes[src_pos].var]
        dst_var = chain.nodes[dst_pos].var
        if dst_var in binding:
            dst = binding[dst_var]
            if direction == "out":
                found = self.handle.edges_between(src, dst, rel.type)
            else:
                found = self.handle.edges_between(dst, src, rel.type)
            candidates = [(e.id, dst) for e in found]
        else:
            candidates = self.handle.get_neighbours(src, direction, rel.type)
        for eid, w in candidates:
            if eid in used:
                continue
            binding[rel.var] = eid
            self._bind_reads(eid)
            if self._satisfied(rel.var, binding):
                if dst_var in binding:
                    yield from self._extend(ci, chain, anchor, steps, k + 1, binding, used | {eid})
                elif self._label_ok(dst_var, w, None):
                    binding[dst_var] = w
                    self._bind_reads(w)
                    if self._satisfied(dst_var, binding):
                        yield from self._extend(ci, chain, anchor, steps, k + 1, binding, used | {eid})
                    del binding[dst_var]
            del binding[rel.var]


def builtin_shortest_path(a: int, b: int, handle: BackendHandle) -> Optional[Path]:
    """Uniform-cost search over the undirected view, one weight probe per
    relaxed edge. Absent weights count as 1, so the result is a shortest path
    by edge count (the lexicographically smallest one among ties)."""
    for v in (a, b):
        handle._require_node(v)
    dist = {a: 0}
    parent: dict = {}
    heap = [(0, 0, a)]
    seq = 1
    settled = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u == b:
            path = [u]
            while u != a:
                u = parent[u]
                path.append(u)
            return Path(tuple(reversed(path)))
        for eid, w in sorted(handle.get_neighbours(u, "both"), key=lambda p: (p[1], p[0])):
            handle.get_attribute(eid, WEIGHT_KEY)
            nd = d + 1
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                parent[w] = u
                heapq.heappush(heap, (nd, seq, w))
                seq += 1
    return None


def all_named_keys(query: Query) -> frozenset:
    return frozenset(key for _, key in attribute_reads(query))


def make_evaluator(matcher_known: dict):
    def evaluate(binding: dict, expr):
        if isinstance(expr, VarItem):
            return binding[expr.var]
        if isinstance(expr, PropItem):
            return matcher_known[(binding[expr.var], expr.key)]
        if isinstance(expr, ShortestPathItem):
            return binding[PATH_SLOT]
        raise TypeError(f"cannot evaluate {expr!r}")

    return evaluate


def execute_naive(query: Query, handle: BackendHandle, query_id: str = "query") -> tuple:
    """Run ``query`` server-side; returns ``(ResultTable, ExecutionReport)``."""
    before = handle.counter.snapshot()
    started = time.perf_counter_ns()
    table, visited = _run_naive(name_variables(query), handle)
    wall = (time.perf_counter_ns() - started) / 1000.0
    report = ExecutionReport(query_id, "naive", checksum=table.checksum(), candidates_visited=visited)
    report.add_run(wall, handle.counter.snapshot() - before, handle.cost_model)
    return table, report


def _run_naive(query: Query, handle: BackendHandle) -> tuple:
    matcher = PatternMatcher(handle, query.chains, eager_keys=all_named_keys(query))
    bindings = [dict(b) for b, _ in matcher.match()]
    sp = query.shortest_path
    if sp is not None:
        for b in bindings:
            b[PATH_SLOT] = builtin_shortest_path(b[sp[0]], b[sp[1]], handle)
    table = project(bindings, query.return_clause, make_evaluator(matcher.known))
    return table, matcher.candidates_visited
