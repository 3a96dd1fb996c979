"""Result tables, paths, execution reports, and the projection rules every
strategy shares (grouping, ``count``, DISTINCT, ordering with tie-break, LIMIT).

Tie-break: rows are first ordered by their full canonical key (first column
first, so equal ORDER BY keys fall back to the lowest id in column one), then
stably by the ORDER BY key. Without ORDER BY rows come out in canonical order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .elementary import CallCounts, CostModel, modeled_cost
from .property_graph import encode_value, sort_key, value_key
from .query_model.ast import CountItem, PropItem, ReturnClause, ShortestPathItem, VarItem
from .query_model.parser import format_expr


@dataclass(frozen=True)
class Path:
    """Node ids from source to target."""

    nodes: tuple

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self):
        return len(self.nodes)


def cell_key(cell) -> tuple:
    """Total, variant-aware ordering key for a result cell."""
    if isinstance(cell, Path):
        return (5, cell.nodes)
    return sort_key(cell)


def row_key(row: Sequence) -> tuple:
    return tuple(cell_key(c) for c in row)


def _typed(cell):
    if cell is None:
        return None
    if isinstance(cell, Path):
        return ("path", cell.nodes)
    return value_key(cell)


@dataclass(frozen=True, eq=False)
class ResultTable:
    columns: tuple
    rows: tuple
    distinct: bool = False
    ordered: bool = False

    def __post_init__(self):
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"row {row!r} does not have {width} cells")

    def typed_rows(self) -> tuple:
        return tuple(tuple(_typed(c) for c in row) for row in self.rows)

    def __eq__(self, other):
        if not isinstance(other, ResultTable):
            return NotImplemented
        return self.columns == other.columns and self.typed_rows() == other.typed_rows()

    def __hash__(self):
        return hash((self.columns, self.typed_rows()))

    def __len__(self):
        return len(self.rows)

    def checksum(self) -> str:
        """Order-insensitive SHA-256 over the rows."""
        lines = sorted(_json_row(row) for row in self.rows)
        digest = hashlib.sha256()
        digest.update(json.dumps(list(self.columns)).encode())
        for line in lines:
            digest.update(b"\n")
            digest.update(line.encode())
        return digest.hexdigest()

    def first_difference(self, other: "ResultTable") -> Optional[tuple]:
        """``(index, mine, theirs)`` for the first differing row, or ``None``."""
        a, b = self.typed_rows(), other.typed_rows()
        for i in range(max(len(a), len(b))):
            left = self.rows[i] if i < len(a) else None
            right = other.rows[i] if i < len(b) else None
            if i >= len(a) or i >= len(b) or a[i] != b[i]:
                return i, left, right
        return None

    def to_text(self) -> str:
        out = ["\t".join(self.columns)]
        for row in self.rows:
            out.append("\t".join(_render(c) for c in row))
        return "\n".join(out)


def _render(cell) -> str:
    if cell is None:
        return "null"
    if isinstance(cell, Path):
        return "[" + ", ".join(str(n) for n in cell.nodes) + "]"
    if hasattr(cell, "isoformat"):
        return cell.isoformat()
    return str(cell)


def _json_row(row) -> str:
    cells = []
    for c in row:
        if c is None:
            cells.append(None)
        elif isinstance(c, Path):
            cells.append({"$path": list(c.nodes)})
        else:
            tag, _ = value_key(c)
            cells.append([tag, encode_value(c)])
    return json.dumps(cells, sort_keys=True)


def column_names(ret: ReturnClause) -> tuple:
    return tuple(item.alias if item.alias is not None else format_expr(item.expr) for item in ret.items)


def project(
    bindings: Iterable[dict],
    ret: ReturnClause,
    evaluate: Callable[[dict, object], object],
) -> ResultTable:
    """Apply the RETURN clause to binding rows.

    ``evaluate(binding, expr)`` must return the cell for a non-aggregate
    expression (and the ORDER BY key); ``count(v)`` counts bindings per group.
    """
    items = ret.items
    order = ret.order_by
    pairs: list[tuple[tuple, object]] = []

    if ret.has_aggregate:
        group_idx = [i for i, it in enumerate(items) if not isinstance(it.expr, CountItem)]
        groups: dict = {}
        for b in bindings:
            cells = [None if isinstance(it.expr, CountItem) else evaluate(b, it.expr) for it in items]
            gk = tuple(_typed(cells[i]) for i in group_idx)
            entry = groups.get(gk)
            if entry is None:
                entry = groups[gk] = [cells, 0, b]
            entry[1] += 1
        if not groups and not group_idx:
            groups[()] = [[None] * len(items), 0, None]
        for cells, count, first in groups.values():
            row = tuple(count if isinstance(it.expr, CountItem) else cells[i] for i, it in enumerate(items))
            ov = None
            if order is not None:
                if isinstance(order.expr, CountItem):
                    ov = count
                else:
                    ov = evaluate(first, order.expr)
            pairs.append((row, ov))
    else:
        for b in bindings:
            row = tuple(evaluate(b, it.expr) for it in items)
            ov = evaluate(b, order.expr) if order is not None else None
            pairs.append((row, ov))

    if ret.distinct:
        seen = set()
        unique = []
        for row, ov in pairs:
            k = tuple(_typed(c) for c in row)
            if k not in seen:
                seen.add(k)
                unique.append((row, ov))
        pairs = unique

    pairs.sort(key=lambda p: row_key(p[0]))
    if order is not None:
        pairs.sort(key=lambda p: cell_key(p[1]), reverse=order.descending)
    if ret.limit is not None:
        pairs = pairs[: ret.limit]
    return ResultTable(column_names(ret), tuple(p[0] for p in pairs), ret.distinct, order is not None)


@dataclass
class ExecutionReport:
    """Measurements for one (query, strategy); one list entry per run."""

    query_id: str
    strategy: str
    wall_us: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    modeled_us: list = field(default_factory=list)
    checksum: str = ""
    candidates_visited: int = 0

    @property
    def repetitions(self) -> int:
        return len(self.wall_us)

    def add_run(self, wall_us: float, counts: CallCounts, model: CostModel) -> None:
        self.wall_us.append(wall_us)
        self.counts.append(counts)
        self.modeled_us.append(modeled_cost(counts, model))

    def merge(self, other: "ExecutionReport") -> None:
        self.wall_us.extend(other.wall_us)
        self.counts.extend(other.counts)
        self.modeled_us.extend(other.modeled_us)

    @property
    def mean_modeled_us(self) -> float:
        return sum(self.modeled_us) / len(self.modeled_us) if self.modeled_us else 0.0

    @property
    def mean_wall_us(self) -> float:
        return sum(self.wall_us) / len(self.wall_us) if self.wall_us else 0.0


def expr_vars(expr) -> tuple:
    if isinstance(expr, ShortestPathItem):
        return (expr.source, expr.target)
    if isinstance(expr, (VarItem, PropItem, CountItem)):
        return (expr.var,)
    return ()
