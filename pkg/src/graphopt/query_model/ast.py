"""Immutable AST for the Cypher subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..property_graph import PropertyValue


@dataclass(frozen=True)
class CrossRef:
    """A filter value read from another, already bound variable (``r.context``)."""

    var: str
    key: str


FilterValue = Union[PropertyValue, CrossRef]


@dataclass(frozen=True)
class NodePattern:
    var: Optional[str] = None
    label: Optional[str] = None
    prop_filters: tuple = ()  # of (key, FilterValue)


@dataclass(frozen=True)
class RelPattern:
    var: Optional[str] = None
    type: Optional[str] = None
    prop_filters: tuple = ()
    direction: str = "right"  # "right": (a)-[]->(b), "left": (a)<-[]-(b)


@dataclass(frozen=True)
class Chain:
    nodes: tuple  # NodePattern, len(rels) + 1 of them
    rels: tuple = ()  # RelPattern


@dataclass(frozen=True)
class VarItem:
    var: str


@dataclass(frozen=True)
class PropItem:
    var: str
    key: str


@dataclass(frozen=True)
class CountItem:
    var: str


@dataclass(frozen=True)
class ShortestPathItem:
    source: str
    target: str


Expr = Union[VarItem, PropItem, CountItem, ShortestPathItem]


@dataclass(frozen=True)
class ReturnItem:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class OrderBy:
    expr: Union[VarItem, PropItem, CountItem]
    descending: bool = False


@dataclass(frozen=True)
class ReturnClause:
    items: tuple
    distinct: bool = False
    order_by: Optional[OrderBy] = None
    limit: Optional[int] = None

    @property
    def has_aggregate(self) -> bool:
        return any(isinstance(i.expr, CountItem) for i in self.items)


@dataclass(frozen=True)
class Query:
    chains: tuple
    return_clause: ReturnClause
    text: Optional[str] = field(default=None, compare=False, repr=False)

    @property
    def shortest_path(self) -> Optional[tuple]:
        for item in self.return_clause.items:
            if isinstance(item.expr, ShortestPathItem):
                return (item.expr.source, item.expr.target)
        return None

    def node_patterns(self):
        """Yield ``(chain index, position, NodePattern)`` in textual order."""
        for ci, chain in enumerate(self.chains):
            for pos, node in enumerate(chain.nodes):
                yield ci, pos, node

    def rel_patterns(self):
        for ci, chain in enumerate(self.chains):
            for pos, rel in enumerate(chain.rels):
                yield ci, pos, rel

    def node_vars(self) -> list:
        seen = []
        for _, _, node in self.node_patterns():
            if node.var is not None and node.var not in seen:
                seen.append(node.var)
        return seen

    def rel_vars(self) -> list:
        return [rel.var for _, _, rel in self.rel_patterns() if rel.var is not None]

    def var_label(self, var: str) -> Optional[str]:
        """First label attached to a node variable anywhere in the pattern."""
        for _, _, node in self.node_patterns():
            if node.var == var and node.label is not None:
                return node.label
        return None

    def rel_type(self, var: str) -> Optional[str]:
        for _, _, rel in self.rel_patterns():
            if rel.var == var:
                return rel.type
        return None
