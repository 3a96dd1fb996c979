"""Instrumented elementary-query boundary over a :class:`PropertyGraph`.

Every primitive a client (or the emulated server) issues against the graph
goes through :class:`BackendHandle`, which counts calls per primitive and
rows handed back. :func:`modeled_cost` turns those counts into a duration.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Union

from .property_graph import Edge, Node, PropertyGraph, PropertyValue

COUNTER_FIELDS = (
    "node_lookup",
    "index_lookup",
    "neighbours",
    "attribute_access",
    "edges_between",
    "rows_transferred",
    "kv_lookup",
)


class UnknownElementError(KeyError):
    """Raised when an elementary call names a node or edge id that does not exist."""

    def __init__(self, ident):
        self.ident = ident
        super().__init__(ident)

    def __str__(self) -> str:
        return f"unknown element id {self.ident!r}"


@dataclass(frozen=True)
class CallCounts:
    """Immutable snapshot of a counter."""

    node_lookup: int = 0
    index_lookup: int = 0
    neighbours: int = 0
    attribute_access: int = 0
    edges_between: int = 0
    rows_transferred: int = 0
    kv_lookup: int = 0

    def __add__(self, other: "CallCounts") -> "CallCounts":
        return CallCounts(*(getattr(self, f) + getattr(other, f) for f in COUNTER_FIELDS))

    def __sub__(self, other: "CallCounts") -> "CallCounts":
        return CallCounts(*(getattr(self, f) - getattr(other, f) for f in COUNTER_FIELDS))

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in COUNTER_FIELDS}


class ElementaryCounter:
    """Thread-safe, monotonically increasing per-primitive tally."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counts = dict.fromkeys(COUNTER_FIELDS, 0)

    def add(self, **increments: int) -> None:
        with self._lock:
            for name, amount in increments.items():
                if amount < 0:
                    raise ValueError("counter increments must be non-negative")
                self._counts[name] += amount

    def reset(self) -> None:
        with self._lock:
            for name in self._counts:
                self._counts[name] = 0

    def snapshot(self) -> CallCounts:
        with self._lock:
            return CallCounts(**self._counts)

    def __getattr__(self, name: str) -> int:
        if name in COUNTER_FIELDS:
            return self._counts[name]
        raise AttributeError(name)


@dataclass(frozen=True)
class CostModel:
    """Per-call latencies in microseconds. Defaults are calibration knobs,
    sized so that attribute reads dominate pattern queries."""

    node_lookup_us: float = 50.0
    index_lookup_us: float = 200.0
    neighbours_us: float = 100.0
    attribute_access_us: float = 150.0
    edges_between_us: float = 100.0
    row_transfer_us: float = 5.0
    kv_lookup_us: float = 20.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")
        if self.kv_lookup_us >= self.attribute_access_us:
            raise ValueError("kv_lookup_us must be strictly below attribute_access_us")

    def scaled(self, factor: float) -> "CostModel":
        return CostModel(**{f.name: getattr(self, f.name) * factor for f in fields(self)})

    @classmethod
    def from_json(cls, source: Union[str, Path, dict]) -> "CostModel":
        if isinstance(source, dict):
            data = source
        else:
            with open(source, encoding="utf-8") as fh:
                data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown cost model keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_LATENCY = {
    "node_lookup": "node_lookup_us",
    "index_lookup": "index_lookup_us",
    "neighbours": "neighbours_us",
    "attribute_access": "attribute_access_us",
    "edges_between": "edges_between_us",
    "rows_transferred": "row_transfer_us",
    "kv_lookup": "kv_lookup_us",
}


def modeled_cost(counts: Union[CallCounts, ElementaryCounter], model: CostModel) -> float:
    """Dot product of call counts with per-call latencies, in microseconds."""
    if isinstance(counts, ElementaryCounter):
        counts = counts.snapshot()
    return float(sum(getattr(counts, f) * getattr(model, _LATENCY[f]) for f in COUNTER_FIELDS))


class BackendHandle:
    """Read-only access to a graph through counted primitives.

    ``node_lookup`` covers :meth:`scan_nodes` and :meth:`get_labels`,
    ``index_lookup`` :meth:`find_nodes`, ``neighbours`` :meth:`get_neighbours`,
    ``attribute_access`` :meth:`get_attribute`, ``edges_between``
    :meth:`edges_between`. Each call bumps its own field by one; list-valued
    scans, index lookups and neighbourhoods also add their result size to
    ``rows_transferred``.
    """

    def __init__(
        self,
        graph: PropertyGraph,
        counter: Optional[ElementaryCounter] = None,
        cost_model: Optional[CostModel] = None,
    ):
        self.graph = graph
        self.counter = counter if counter is not None else ElementaryCounter()
        self.cost_model = cost_model if cost_model is not None else CostModel()

    def _require_node(self, ident: int) -> Node:
        try:
            return self.graph.nodes[ident]
        except (KeyError, TypeError):
            raise UnknownElementError(ident) from None

    def find_nodes(self, label: str, key: str, value: PropertyValue) -> list[int]:
        result = self.graph.lookup(label, key, value)
        self.counter.add(index_lookup=1, rows_transferred=len(result))
        return result

    def scan_nodes(self, label: Optional[str] = None) -> list[int]:
        result = self.graph.nodes_with_label(label)
        self.counter.add(node_lookup=1, rows_transferred=len(result))
        return result

    def get_labels(self, ident: int) -> frozenset:
        node = self._require_node(ident)
        self.counter.add(node_lookup=1)
        return node.labels

    def get_neighbours(
        self, v: int, direction: str = "both", edge_type: Optional[str] = None
    ) -> list[tuple[int, int]]:
        self._require_node(v)
        if direction not in ("out", "in", "both"):
            raise ValueError(f"direction must be out, in or both, not {direction!r}")
        graph = self.graph
        result = []
        if direction in ("out", "both"):
            result += graph.out_pairs(v)
        if direction in ("in", "both"):
            result += graph.in_pairs(v)
        if edge_type is not None:
            edges = graph.edges
            result = [pair for pair in result if edges[pair[0]].type == edge_type]
        self.counter.add(neighbours=1, rows_transferred=len(result))
        return result

    def get_attribute(self, ident: int, key: str) -> Optional[PropertyValue]:
        graph = self.graph
        if ident in graph.nodes:
            element = graph.nodes[ident]
        elif ident in graph.edges:
            element = graph.edges[ident]
        else:
            raise UnknownElementError(ident)
        self.counter.add(attribute_access=1)
        return element.props.get(key)

    def edges_between(self, a: int, b: int, edge_type: Optional[str] = None) -> list[Edge]:
        self._require_node(a)
        self._require_node(b)
        edges = self.graph.edges
        result = [
            edges[eid]
            for eid in self.graph.out_edges(a)
            if edges[eid].end == b and (edge_type is None or edges[eid].type == edge_type)
        ]
        self.counter.add(edges_between=1)
        return result

    def modeled_cost(self) -> float:
        return modeled_cost(self.counter.snapshot(), self.cost_model)
