"""In-memory labeled property graph.

Nodes and edges carry property maps whose values are one of four variants:
``str``, ``int``, ``float`` or ``datetime.date``. Equality between values of
different variants is always false (``1 != 1.0`` here, unlike plain Python),
so every index and comparison goes through :func:`value_key`.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Optional, Union

PropertyValue = Union[str, int, float, _dt.date]

#: variant tags; the order doubles as the cross-variant sort rank
DATATYPES = ("integer", "float", "text", "date")


class GraphError(Exception):
    """Base class for graph construction and loading failures."""


class GraphFormatError(GraphError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DanglingEdgeError(GraphError):
    def __init__(self, edge_id: int, missing: Any, line: Optional[int] = None):
        self.edge_id = edge_id
        self.missing = missing
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"edge {edge_id} references missing node {missing!r}{where}")


class DuplicateIdError(GraphError):
    def __init__(self, ident: int, line: Optional[int] = None):
        self.ident = ident
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate id {ident}{where}")


def datatype_of(value: PropertyValue) -> str:
    # bool is an int subclass but not a supported variant
    if isinstance(value, bool):
        raise TypeError("booleans are not a supported property variant")
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "text"
    if isinstance(value, _dt.datetime):
        raise TypeError("datetime values are not supported; use datetime.date")
    if isinstance(value, _dt.date):
        return "date"
    raise TypeError(f"unsupported property value {value!r}")


def value_key(value: PropertyValue) -> tuple:
    """Hashable, variant-tagged key: equal keys iff values are equal and same variant."""
    return (datatype_of(value), value)


def values_equal(a: Optional[PropertyValue], b: Optional[PropertyValue]) -> bool:
    if a is None or b is None:
        return False
    return value_key(a) == value_key(b)


def sort_key(value: Optional[PropertyValue]) -> tuple:
    """Total order over values: by variant rank, then natively; absent sorts last."""
    if value is None:
        return (len(DATATYPES),)
    tag = datatype_of(value)
    if tag == "float" and math.isnan(value):
        return (DATATYPES.index(tag), math.inf, 1)
    return (DATATYPES.index(tag), value, 0) if tag == "float" else (DATATYPES.index(tag), value)


def encode_value(value: PropertyValue) -> Any:
    if datatype_of(value) == "date":
        return {"$date": value.isoformat()}
    return value


def decode_value(raw: Any) -> PropertyValue:
    if isinstance(raw, dict):
        if set(raw) != {"$date"}:
            raise ValueError(f"unsupported object value {raw!r}")
        return _dt.date.fromisoformat(raw["$date"])
    if isinstance(raw, bool) or raw is None or isinstance(raw, (list, dict)):
        raise ValueError(f"unsupported property value {raw!r}")
    datatype_of(raw)
    return raw


@dataclass(frozen=True)
class Node:
    id: int
    labels: frozenset
    props: Mapping[str, PropertyValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    id: int
    type: str
    start: int
    end: int
    props: Mapping[str, PropertyValue] = field(default_factory=dict)


def _typed_props(props: Mapping[str, PropertyValue]) -> tuple:
    return tuple(sorted((k, value_key(v)) for k, v in props.items()))


class PropertyGraph:
    """Immutable directed multigraph with label/property index.

    Node ids and edge ids share a single id space so that an attribute read
    can be addressed by id alone.
    """

    def __init__(self, nodes: Iterable[Node] = (), edges: Iterable[Edge] = ()):
        self._nodes: dict[int, Node] = {}
        self._edges: dict[int, Edge] = {}
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        index: dict[tuple, list[int]] = defaultdict(list)
        by_label: dict[str, list[int]] = defaultdict(list)

        for node in nodes:
            if node.id in self._nodes:
                raise DuplicateIdError(node.id)
            if not node.labels:
                raise GraphError(f"node {node.id} has no labels")
            for value in node.props.values():
                datatype_of(value)
            self._nodes[node.id] = node
            self._out[node.id] = []
            self._in[node.id] = []
        for node in sorted(self._nodes.values(), key=lambda n: n.id):
            for label in sorted(node.labels):
                by_label[label].append(node.id)
                for key, value in node.props.items():
                    index[(label, key, value_key(value))].append(node.id)

        for edge in edges:
            if edge.id in self._edges or edge.id in self._nodes:
                raise DuplicateIdError(edge.id)
            for end in (edge.start, edge.end):
                if end not in self._nodes:
                    raise DanglingEdgeError(edge.id, end)
            for value in edge.props.values():
                datatype_of(value)
            self._edges[edge.id] = edge
        for edge in sorted(self._edges.values(), key=lambda e: e.id):
            self._out[edge.start].append(edge.id)
            self._in[edge.end].append(edge.id)
        edges_by_id = self._edges
        self._out_pairs = {v: tuple((i, edges_by_id[i].end) for i in ids) for v, ids in self._out.items()}
        self._in_pairs = {v: tuple((i, edges_by_id[i].start) for i in ids) for v, ids in self._in.items()}

        self._index = dict(index)
        self._by_label = dict(by_label)

    # --- basic accessors -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self._nodes)

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def nodes(self) -> Mapping[int, Node]:
        return self._nodes

    @property
    def edges(self) -> Mapping[int, Edge]:
        return self._edges

    @property
    def labels(self) -> frozenset:
        return frozenset(self._by_label)

    def has_node(self, ident: int) -> bool:
        return ident in self._nodes

    def has_element(self, ident: int) -> bool:
        return ident in self._nodes or ident in self._edges

    def element(self, ident: int) -> Union[Node, Edge]:
        if ident in self._nodes:
            return self._nodes[ident]
        return self._edges[ident]

    def out_edges(self, node_id: int) -> list[int]:
        return self._out[node_id]

    def in_edges(self, node_id: int) -> list[int]:
        return self._in[node_id]

    def out_pairs(self, node_id: int) -> tuple:
        """``(edge id, end)`` for each outgoing edge, by edge id."""
        return self._out_pairs[node_id]

    def in_pairs(self, node_id: int) -> tuple:
        """``(edge id, start)`` for each incoming edge, by edge id."""
        return self._in_pairs[node_id]

    def nodes_with_label(self, label: Optional[str]) -> list[int]:
        if label is None:
            return sorted(self._nodes)
        return list(self._by_label.get(label, ()))

    def lookup(self, label: str, key: str, value: PropertyValue) -> list[int]:
        try:
            vk = value_key(value)
        except TypeError:
            return []
        return list(self._index.get((label, key, vk), ()))

    def property_datatypes(self, label: Optional[str], key: str) -> frozenset:
        """Datatypes observed for ``key`` on nodes carrying ``label``."""
        found = set()
        for node_id in self.nodes_with_label(label):
            value = self._nodes[node_id].props.get(key)
            if value is not None:
                found.add(datatype_of(value))
        return frozenset(found)

    def edge_property_datatypes(self, edge_type: Optional[str], key: str) -> frozenset:
        found = set()
        for edge in self._edges.values():
            if edge_type is None or edge.type == edge_type:
                value = edge.props.get(key)
                if value is not None:
                    found.add(datatype_of(value))
        return frozenset(found)

    # --- equality / serialization -----------------------------------------
    def _canonical(self) -> tuple:
        nodes = tuple(
            (n.id, tuple(sorted(n.labels)), _typed_props(n.props))
            for n in sorted(self._nodes.values(), key=lambda n: n.id)
        )
        edges = tuple(
            (e.id, e.type, e.start, e.end, _typed_props(e.props))
            for e in sorted(self._edges.values(), key=lambda e: e.id)
        )
        return nodes, edges

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self) -> int:
        return hash(self._canonical())

    def __repr__(self) -> str:
        return f"PropertyGraph(n={self.n}, m={self.m})"

    def iter_jsonl(self) -> Iterator[str]:
        for node in sorted(self._nodes.values(), key=lambda n: n.id):
            yield json.dumps(
                {
                    "kind": "node",
                    "id": node.id,
                    "labels": sorted(node.labels),
                    "props": {k: encode_value(v) for k, v in sorted(node.props.items())},
                }
            )
        for edge in sorted(self._edges.values(), key=lambda e: e.id):
            yield json.dumps(
                {
                    "kind": "edge",
                    "id": edge.id,
                    "type": edge.type,
                    "start": edge.start,
                    "end": edge.end,
                    "props": {k: encode_value(v) for k, v in sorted(edge.props.items())},
                }
            )


def save_graph(graph: PropertyGraph, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in graph.iter_jsonl():
            fh.write(line)
            fh.write("\n")


def _require_int(record: dict, name: str, line: int) -> int:
    value = record.get(name)
    if not isinstance(value, int) or isinstance(value, bool):
        raise GraphFormatError(f"field {name!r} must be an integer", line)
    return value


def _endpoint(record: dict, name: str, line: int) -> Union[int, str]:
    # a string reference can never resolve (ids are integers) and is
    # reported as a dangling edge rather than a format error
    value = record.get(name)
    if isinstance(value, str) or (isinstance(value, int) and not isinstance(value, bool)):
        return value
    raise GraphFormatError(f"field {name!r} must be a node id", line)


def _decode_props(raw: Any, line: int) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise GraphFormatError("props must be an object", line)
    try:
        return {str(k): decode_value(v) for k, v in raw.items()}
    except (ValueError, TypeError) as exc:
        raise GraphFormatError(str(exc), line) from None


def load_graph(path: Union[str, Path], format: str = "jsonl") -> PropertyGraph:
    """Read a graph from JSONL; edges may precede the nodes they reference."""
    if format != "jsonl":
        raise ValueError(f"unsupported graph format {format!r}")
    nodes: dict[int, Node] = {}
    node_lines: dict[int, int] = {}
    edges: list[tuple[Edge, int]] = []
    seen_edge_ids: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            try:
                record = json.loads(text)
            except json.JSONDecodeError as exc:
                raise GraphFormatError(f"invalid JSON: {exc.msg}", lineno) from None
            if not isinstance(record, dict):
                raise GraphFormatError("expected a JSON object", lineno)
            kind = record.get("kind")
            ident = _require_int(record, "id", lineno)
            if ident in nodes or ident in seen_edge_ids:
                raise DuplicateIdError(ident, lineno)
            if kind == "node":
                labels = record.get("labels")
                if not isinstance(labels, list) or not labels or not all(isinstance(x, str) for x in labels):
                    raise GraphFormatError("labels must be a non-empty list of strings", lineno)
                nodes[ident] = Node(ident, frozenset(labels), _decode_props(record.get("props"), lineno))
                node_lines[ident] = lineno
            elif kind == "edge":
                etype = record.get("type")
                if not isinstance(etype, str) or not etype:
                    raise GraphFormatError("edge type must be a non-empty string", lineno)
                edge = Edge(
                    ident,
                    etype,
                    _endpoint(record, "start", lineno),
                    _endpoint(record, "end", lineno),
                    _decode_props(record.get("props"), lineno),
                )
                seen_edge_ids[ident] = lineno
                edges.append((edge, lineno))
            else:
                raise GraphFormatError(f"unknown kind {kind!r}", lineno)
    for edge, lineno in edges:
        for end in (edge.start, edge.end):
            if end not in nodes:
                raise DanglingEdgeError(edge.id, end, lineno)
    return PropertyGraph(nodes.values(), (e for e, _ in edges))


# --- summarization ----------------------------------------------------------


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    min_degree: int
    max_degree: int
    avg_degree: float


def graph_stats(graph: PropertyGraph) -> GraphStats:
    if graph.n == 0:
        return GraphStats(0, graph.m, 0, 0, 0.0)
    degrees = [len(graph.out_edges(v)) + len(graph.in_edges(v)) for v in graph.nodes]
    return GraphStats(graph.n, graph.m, min(degrees), max(degrees), 2 * graph.m / graph.n)


# --- synthetic generation -----------------------------------------------------

# Anchor names used by the canonical benchmark queries.
ANCHOR_Q1_SOURCE = "APP"
ANCHOR_Q1_TARGET = "gamma Secretase Complex"
ANCHOR_Q4_SOURCE = "axonal transport"
ANCHOR_Q4_TARGET = "LRP3"
ANCHOR_Q12_SOURCE = "PMID:16160056"
ANCHOR_Q12_TARGET = "PMID:16160050"


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for :func:`generate_synthetic`.

    With ``anchors`` set, a few named entities and documents are planted
    (drawn from the regular counts) so the canonical queries have
    deterministic, non-trivial answers: the two shortest-path entity
    anchors sit at distance exactly 3, the two document anchors at
    distance exactly 4, and the Q1 entity pair is joined by
    ``q1_evidence`` ``increases`` edges citing distinct documents.
    """

    entity_count: int = 100
    document_count: int = 50
    author_count: int = 20
    relation_count: int = 400
    authorship_per_doc: float = 3.0
    function_values: Mapping[str, float] = field(
        default_factory=lambda: {"increases": 0.5, "decreases": 0.5}
    )
    contradiction_fraction: float = 0.0
    date_range: tuple = (_dt.date(1990, 1, 1), _dt.date(2019, 12, 31))
    seed: int = 0
    anchors: bool = False
    q1_evidence: int = 12

    def validate(self) -> None:
        for name in ("entity_count", "document_count", "author_count", "relation_count", "q1_evidence"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        if self.authorship_per_doc < 0:
            raise ValueError("authorship_per_doc must be >= 0")
        if not self.function_values:
            raise ValueError("function_values must not be empty")
        if any(w < 0 for w in self.function_values.values()) or sum(self.function_values.values()) <= 0:
            raise ValueError("function_values weights must be non-negative with a positive sum")
        if not 0.0 <= self.contradiction_fraction <= 1.0:
            raise ValueError("contradiction_fraction must lie in [0, 1]")
        start, end = self.date_range
        if start > end:
            raise ValueError("date_range start is after end")
        if self.relation_count and self.document_count == 0:
            raise ValueError("hasRelation edges need at least one Document for their context")
        pairs = self.contradiction_pairs()
        if pairs:
            if not {"increases", "decreases"} <= set(self.function_values):
                raise ValueError("contradictions need both 'increases' and 'decreases' in function_values")
            usable = self.entity_count - (2 if self.anchors else 0)
            if pairs > usable * (usable - 1):
                raise ValueError("not enough distinct entity pairs for the requested contradictions")
        if self.relation_count and self.entity_count < 2:
            raise ValueError("hasRelation edges need at least two entities")
        if self.anchors:
            if self.entity_count < 6:
                raise ValueError("anchors need at least 6 entities")
            if self.document_count < 3 + self.q1_evidence:
                raise ValueError(f"anchors need at least {3 + self.q1_evidence} documents")
            if self.author_count < 2:
                raise ValueError("anchors need at least 2 authors")
            if self.random_relation_budget() < 0:
                raise ValueError("relation_count too small for anchors and contradictions")

    def contradiction_pairs(self) -> int:
        return math.ceil(self.contradiction_fraction * self.relation_count - 1e-9)

    def anchor_relations(self) -> int:
        return (3 + self.q1_evidence) if self.anchors else 0

    def random_relation_budget(self) -> int:
        return self.relation_count - 2 * self.contradiction_pairs() - self.anchor_relations()


def generate_synthetic(config: GeneratorConfig) -> PropertyGraph:
    """Build a biomedical-style graph: Entity/Document/Author nodes,
    ``hasRelation`` (Entity->Entity) and ``isAuthor`` (Author->Document) edges.

    Contradiction edges come out of the relation budget; if they alone need
    more than ``relation_count`` edges, the graph has ``2 * pairs`` relations.
    """
    config.validate()
    rng = random.Random(config.seed)
    start, end = config.date_range
    span = (end - start).days

    entities = list(range(config.entity_count))
    docs = list(range(config.entity_count, config.entity_count + config.document_count))
    author_base = config.entity_count + config.document_count
    authors = list(range(author_base, author_base + config.author_count))

    entity_names = {v: f"entity-{i:05d}" for i, v in enumerate(entities)}
    doc_ids = {d: f"PMID:{20000000 + i}" for i, d in enumerate(docs)}
    if config.anchors:
        entity_names[entities[0]] = ANCHOR_Q1_SOURCE
        entity_names[entities[1]] = ANCHOR_Q1_TARGET
        entity_names[entities[2]] = ANCHOR_Q4_SOURCE
        entity_names[entities[3]] = ANCHOR_Q4_TARGET
        doc_ids[docs[0]] = ANCHOR_Q12_SOURCE
        doc_ids[docs[1]] = ANCHOR_Q12_TARGET

    nodes: list[Node] = []
    for v in entities:
        nodes.append(Node(v, frozenset({"Entity"}), {"preferredLabel": entity_names[v]}))
    for d in docs:
        date = start + _dt.timedelta(days=rng.randint(0, span))
        nodes.append(Node(d, frozenset({"Document"}), {"documentID": doc_ids[d], "publicationDate": date}))
    for i, a in enumerate(authors):
        nodes.append(Node(a, frozenset({"Author"}), {"name": f"Author {i:04d}"}))

    edges: list[Edge] = []
    next_id = author_base + config.author_count

    def add_edge(etype: str, s: int, t: int, props: dict) -> None:
        nonlocal next_id
        edges.append(Edge(next_id, etype, s, t, props))
        next_id += 1

    functions = sorted(config.function_values)
    weights = [config.function_values[f] for f in functions]

    def relation(s: int, t: int, function: Optional[str] = None) -> None:
        if function is None:
            function = rng.choices(functions, weights)[0]
        add_edge("hasRelation", s, t, {"function": function, "context": doc_ids[rng.choice(docs)]})

    # shortest-path anchors stay out of random relations
    free = entities[4:] if config.anchors else entities
    pool = entities[:2] + free if config.anchors else entities

    pairs = config.contradiction_pairs()
    if pairs:
        chosen: set[tuple[int, int]] = set()
        total = len(pool) * (len(pool) - 1)
        if pairs * 2 > total:
            candidates = [(s, t) for s in pool for t in pool if s != t]
            rng.shuffle(candidates)
            picked = candidates[:pairs]
        else:
            picked = []
            while len(picked) < pairs:
                s, t = rng.sample(pool, 2)
                if (s, t) not in chosen:
                    chosen.add((s, t))
                    picked.append((s, t))
        for s, t in picked:
            relation(s, t, "increases")
            relation(s, t, "decreases")

    if config.anchors:
        src, dst = entities[0], entities[1]
        evidence = docs[3 : 3 + config.q1_evidence]
        for d in evidence:
            add_edge("hasRelation", src, dst, {"function": "increases", "context": doc_ids[d]})
        a4, b4 = entities[2], entities[3]
        x1, x2 = rng.sample(free, 2)
        relation(a4, x1)
        relation(x1, x2)
        relation(x2, b4)

    for _ in range(max(0, config.random_relation_budget())):
        s, t = rng.sample(pool, 2)
        relation(s, t)

    if authors:
        mean = config.authorship_per_doc
        top = max(1, int(round(2 * mean - 1)))
        anchor_docs = set(docs[:3]) if config.anchors else set()
        for d in docs:
            if d in anchor_docs:
                continue
            if mean <= 0:
                continue
            k = min(len(authors), rng.randint(1, top))
            for a in sorted(rng.sample(authors, k)):
                add_edge("isAuthor", a, d, {})
        if config.anchors:
            # doc0 <- a0 -> bridge <- a1 -> doc1 : distance 4
            a0, a1 = authors[0], authors[1]
            add_edge("isAuthor", a0, docs[0], {})
            add_edge("isAuthor", a1, docs[1], {})
            add_edge("isAuthor", a0, docs[2], {})
            add_edge("isAuthor", a1, docs[2], {})

    return PropertyGraph(nodes, edges)
