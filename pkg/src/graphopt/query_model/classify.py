"""Map a parsed query onto the graph-query taxonomy.

Decision rules over the implemented subset:

* a ``shortestPath`` item makes the query ``reachability/shortest-path``;
* a RETURN made only of ``count()`` items over a single, cross-reference-free
  chain is ``summarization``;
* several chains sharing variables, or any cross-reference, give
  ``pattern/CRPQ``;
* anything else is ``pattern/CQ``.

Variable-length paths are not in the grammar, so ``pattern/RPQ`` and
``pattern/ECRPQ`` are never produced; :data:`NOT_EXPRESSIBLE` lists them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..property_graph import PropertyGraph, datatype_of
from .ast import CountItem, CrossRef, PropItem, Query

LOCAL = "local"
LOCAL_AND_GLOBAL = "local_and_global"

CATEGORIES = (
    "adjacency",
    "reachability/fixed-length",
    "reachability/regular-simple-path",
    "reachability/shortest-path",
    "pattern/CQ",
    "pattern/RPQ",
    "pattern/CRPQ",
    "pattern/ECRPQ",
    "summarization",
)

NOT_EXPRESSIBLE = frozenset({"pattern/RPQ", "pattern/ECRPQ"})


@dataclass(frozen=True)
class QueryClassification:
    scope: str
    category: str
    attribute_access_count: int
    attribute_datatypes: frozenset
    touched_node_labels: frozenset
    touched_edge_types: frozenset
    has_entry_point: bool

    def to_json(self) -> dict:
        return {
            "scope": self.scope,
            "category": self.category,
            "attribute_access_count": self.attribute_access_count,
            "attribute_datatypes": sorted(self.attribute_datatypes),
            "touched_node_labels": sorted(self.touched_node_labels),
            "touched_edge_types": sorted(self.touched_edge_types),
            "has_entry_point": self.has_entry_point,
        }


def attribute_reads(query: Query) -> dict:
    """Distinct ``(var, key)`` property reads implied by the query.

    Maps each read to the set of places it comes from: ``filter``,
    ``crossref`` (the referenced side), ``order`` or ``return``.
    Anonymous patterns are keyed by their position.
    """
    reads: dict = {}

    def note(var, key, source):
        reads.setdefault((var, key), set()).add(source)

    for ci, pos, node in query.node_patterns():
        var = node.var if node.var is not None else f"#n{ci}.{pos}"
        for key, value in node.prop_filters:
            note(var, key, "filter")
            if isinstance(value, CrossRef):
                note(value.var, value.key, "crossref")
    for ci, pos, rel in query.rel_patterns():
        var = rel.var if rel.var is not None else f"#r{ci}.{pos}"
        for key, value in rel.prop_filters:
            note(var, key, "filter")
            if isinstance(value, CrossRef):
                note(value.var, value.key, "crossref")
    ret = query.return_clause
    for item in ret.items:
        if isinstance(item.expr, PropItem):
            note(item.expr.var, item.expr.key, "return")
    if ret.order_by is not None and isinstance(ret.order_by.expr, PropItem):
        note(ret.order_by.expr.var, ret.order_by.expr.key, "order")
    return reads


def _shares_variables(query: Query) -> bool:
    seen: set = set()
    for chain in query.chains:
        names = {n.var for n in chain.nodes if n.var is not None}
        if names & seen:
            return True
        seen |= names
    return False


def _has_crossref(query: Query) -> bool:
    for _, _, node in query.node_patterns():
        if any(isinstance(v, CrossRef) for _, v in node.prop_filters):
            return True
    for _, _, rel in query.rel_patterns():
        if any(isinstance(v, CrossRef) for _, v in rel.prop_filters):
            return True
    return False


def classify(query: Query, graph: Optional[PropertyGraph] = None) -> QueryClassification:
    """Classify ``query``. With ``graph``, datatypes of read attributes are
    looked up in the data; otherwise only literal datatypes are known."""
    ret = query.return_clause
    crossref = _has_crossref(query)
    if query.shortest_path is not None:
        category, scope = "reachability/shortest-path", LOCAL_AND_GLOBAL
    elif (
        all(isinstance(i.expr, CountItem) for i in ret.items)
        and len(query.chains) == 1
        and not crossref
    ):
        category, scope = "summarization", LOCAL_AND_GLOBAL
    elif crossref or (len(query.chains) > 1 and _shares_variables(query)):
        category, scope = "pattern/CRPQ", LOCAL
    else:
        category, scope = "pattern/CQ", LOCAL

    datatypes = set()
    for _, _, node in query.node_patterns():
        for _, value in node.prop_filters:
            if not isinstance(value, CrossRef):
                datatypes.add(datatype_of(value))
    for _, _, rel in query.rel_patterns():
        for _, value in rel.prop_filters:
            if not isinstance(value, CrossRef):
                datatypes.add(datatype_of(value))
    reads = attribute_reads(query)
    if graph is not None:
        for var, key in reads:
            if var.startswith("#"):
                continue
            rtype = query.rel_type(var)
            if var in query.rel_vars():
                datatypes |= graph.edge_property_datatypes(rtype, key)
            else:
                datatypes |= graph.property_datatypes(query.var_label(var), key)

    entry = any(
        node.label is not None and any(not isinstance(v, CrossRef) for _, v in node.prop_filters)
        for _, _, node in query.node_patterns()
    )
    return QueryClassification(
        scope=scope,
        category=category,
        attribute_access_count=len(reads),
        attribute_datatypes=frozenset(datatypes),
        touched_node_labels=frozenset(n.label for _, _, n in query.node_patterns() if n.label),
        touched_edge_types=frozenset(r.type for _, _, r in query.rel_patterns() if r.type),
        has_entry_point=entry,
    )
