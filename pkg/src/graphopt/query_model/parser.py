"""Recursive-descent parser and printer for the Cypher subset.

Grammar (keywords case-insensitive)::

    query     := MATCH chain ("," chain)* RETURN ret
    chain     := nodePat (relPat nodePat)*
    nodePat   := "(" [var] [":" LABEL] [props] ")"
    relPat    := "-[" [var] [":" TYPE] [props] "]->" | "<-[" [var] [":" TYPE] [props] "]-"
    props     := "{" key ":" (literal | var "." key) ("," ...)* "}"
    ret       := [DISTINCT] item ("," item)* [ORDER BY order [ASC|DESC]] [LIMIT INT]
    item      := (var | var "." key | count(var) | shortestPath(var, var)) [AS alias]
    order     := var | var "." key | count(var) | alias
    literal   := STRING | INT | FLOAT | date("YYYY-MM-DD")
"""

from __future__ import annotations

import datetime as _dt
import json
import re
from dataclasses import dataclass
from typing import Optional

from ..property_graph import datatype_of
from .ast import (
    Chain,
    CountItem,
    CrossRef,
    NodePattern,
    OrderBy,
    PropItem,
    Query,
    RelPattern,
    ReturnClause,
    ReturnItem,
    ShortestPathItem,
    VarItem,
)


class QueryError(ValueError):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnboundVariableError(QueryError):
    def __init__(self, var: str, context: str = ""):
        self.var = var
        super().__init__(f"unbound variable {var!r}" + (f" in {context}" if context else ""))


class QueryTypeError(QueryError):
    pass


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident, qident, string, number, sym, eof
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<qident>`(?:[^`]|``)*`)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<sym>[()\[\]{}:,.<>\-;])
    """,
    re.VERBOSE,
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KEYWORDS = {"match", "return", "distinct", "order", "by", "asc", "desc", "limit", "as", "count", "shortestpath", "date"}


def _tokenize(text: str) -> list[_Tok]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Tok("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    # --- token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, offset: int = 1) -> _Tok:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise QuerySyntaxError(f"{message}, found {found}", tok.pos)

    def at_sym(self, sym: str, offset: int = 0) -> bool:
        tok = self.peek(offset) if offset else self.tok
        return tok.kind == "sym" and tok.text == sym

    def expect_sym(self, sym: str) -> _Tok:
        if not self.at_sym(sym):
            self.error(f"expected {sym!r}")
        return self.advance()

    def at_kw(self, word: str, offset: int = 0) -> bool:
        tok = self.peek(offset) if offset else self.tok
        return tok.kind == "ident" and tok.text.lower() == word

    def expect_kw(self, word: str) -> _Tok:
        if not self.at_kw(word):
            self.error(f"expected {word.upper()}")
        return self.advance()

    def at_name(self) -> bool:
        return self.tok.kind in ("ident", "qident")

    def name(self, what: str = "identifier") -> str:
        tok = self.tok
        if tok.kind == "ident":
            self.advance()
            return tok.text
        if tok.kind == "qident":
            self.advance()
            return tok.text[1:-1].replace("``", "`")
        self.error(f"expected {what}")

    # --- grammar
    def query(self) -> Query:
        self.expect_kw("match")
        chains = [self.chain()]
        while self.at_sym(","):
            self.advance()
            chains.append(self.chain())
        self.expect_kw("return")
        ret = self.ret()
        if self.at_sym(";"):
            self.advance()
        if self.tok.kind != "eof":
            self.error("expected end of query")
        return Query(tuple(chains), ret, text=self.text)

    def chain(self) -> Chain:
        nodes = [self.node_pattern()]
        rels = []
        while self.at_sym("-") or self.at_sym("<"):
            rels.append(self.rel_pattern())
            nodes.append(self.node_pattern())
        return Chain(tuple(nodes), tuple(rels))

    def node_pattern(self) -> NodePattern:
        self.expect_sym("(")
        var = self.name() if self.at_name() else None
        label = None
        if self.at_sym(":"):
            self.advance()
            label = self.name("label")
        props = self.props() if self.at_sym("{") else ()
        self.expect_sym(")")
        return NodePattern(var, label, props)

    def rel_pattern(self) -> RelPattern:
        if self.at_sym("<"):
            self.advance()
            self.expect_sym("-")
            direction = "left"
        else:
            self.expect_sym("-")
            direction = "right"
        self.expect_sym("[")
        var = self.name() if self.at_name() else None
        rtype = None
        if self.at_sym(":"):
            self.advance()
            rtype = self.name("relationship type")
        props = self.props() if self.at_sym("{") else ()
        self.expect_sym("]")
        self.expect_sym("-")
        if direction == "right":
            self.expect_sym(">")
        elif self.at_sym(">"):
            self.error("relationship cannot point both ways")
        return RelPattern(var, rtype, props, direction)

    def props(self) -> tuple:
        self.expect_sym("{")
        out = []
        while True:
            key = self.name("property key")
            self.expect_sym(":")
            out.append((key, self.filter_value()))
            if self.at_sym(","):
                self.advance()
                continue
            break
        self.expect_sym("}")
        return tuple(out)

    def filter_value(self):
        tok = self.tok
        if tok.kind == "string":
            self.advance()
            return json.loads(tok.text)
        if tok.kind == "number" or self.at_sym("-"):
            return self.number()
        if self.at_kw("date") and self.at_sym("(", 1):
            self.advance()
            self.advance()
            s = self.tok
            if s.kind != "string":
                self.error("expected date string")
            self.advance()
            self.expect_sym(")")
            try:
                return _dt.date.fromisoformat(json.loads(s.text))
            except ValueError:
                raise QuerySyntaxError(f"invalid date {s.text}", s.pos) from None
        if self.at_name():
            var = self.name()
            self.expect_sym(".")
            return CrossRef(var, self.name("property key"))
        self.error("expected a literal or variable.key")

    def number(self):
        negative = False
        if self.at_sym("-"):
            self.advance()
            negative = True
        tok = self.tok
        if tok.kind != "number":
            self.error("expected a number")
        self.advance()
        text = ("-" if negative else "") + tok.text
        if any(c in tok.text for c in ".eE"):
            return float(text)
        return int(text)

    def ret(self) -> ReturnClause:
        distinct = False
        if self.at_kw("distinct"):
            self.advance()
            distinct = True
        items = [self.item()]
        while self.at_sym(","):
            self.advance()
            items.append(self.item())
        order_by = None
        if self.at_kw("order"):
            self.advance()
            self.expect_kw("by")
            order_tok = self.tok
            expr = self.expr(allow_path=False)
            aliases = {i.alias: i.expr for i in items if i.alias is not None}
            if isinstance(expr, VarItem) and expr.var in aliases:
                expr = aliases[expr.var]
                if isinstance(expr, ShortestPathItem):
                    raise QuerySyntaxError("cannot order by a shortest path", order_tok.pos)
            descending = False
            if self.at_kw("asc"):
                self.advance()
            elif self.at_kw("desc"):
                self.advance()
                descending = True
            order_by = OrderBy(expr, descending)
        limit = None
        if self.at_kw("limit"):
            self.advance()
            tok = self.tok
            if tok.kind != "number" or not tok.text.isdigit() or int(tok.text) <= 0:
                self.error("LIMIT needs a positive integer")
            self.advance()
            limit = int(tok.text)
        return ReturnClause(tuple(items), distinct, order_by, limit)

    def expr(self, allow_path: bool = True):
        if self.at_kw("count") and self.at_sym("(", 1):
            self.advance()
            self.advance()
            var = self.name("variable")
            self.expect_sym(")")
            return CountItem(var)
        if self.at_kw("shortestpath") and self.at_sym("(", 1):
            if not allow_path:
                self.error("shortestPath not allowed here")
            self.advance()
            self.advance()
            a = self.name("variable")
            self.expect_sym(",")
            b = self.name("variable")
            self.expect_sym(")")
            return ShortestPathItem(a, b)
        var = self.name("return item")
        if self.at_sym("."):
            self.advance()
            return PropItem(var, self.name("property key"))
        return VarItem(var)

    def item(self) -> ReturnItem:
        expr = self.expr()
        alias = None
        if self.at_kw("as"):
            self.advance()
            alias = self.name("alias")
        return ReturnItem(expr, alias)


def _validate(query: Query) -> None:
    kinds: dict[str, str] = {}
    bound: set[str] = set()
    literal_types: dict[tuple, str] = {}

    def check_filters(var: Optional[str], filters: tuple) -> None:
        for key, value in filters:
            if isinstance(value, CrossRef):
                if value.var not in bound:
                    raise UnboundVariableError(value.var, f"cross-reference {value.var}.{value.key}")
            elif var is not None:
                tag = datatype_of(value)
                prev = literal_types.setdefault((var, key), tag)
                if prev != tag:
                    raise QueryTypeError(
                        f"{var}.{key} compared against both {prev} and {tag} literals"
                    )

    def declare(var: Optional[str], kind: str) -> None:
        if var is None:
            return
        prev = kinds.get(var)
        if prev is not None and prev != kind:
            raise QueryTypeError(f"variable {var!r} used as both node and relationship")
        if prev == "rel":
            raise QueryTypeError(f"relationship variable {var!r} bound twice")
        kinds[var] = kind

    for chain in query.chains:
        for pos, node in enumerate(chain.nodes):
            if pos > 0:
                rel = chain.rels[pos - 1]
                declare(rel.var, "rel")
                check_filters(rel.var, rel.prop_filters)
                if rel.var is not None:
                    bound.add(rel.var)
            declare(node.var, "node")
            check_filters(node.var, node.prop_filters)
            if node.var is not None:
                bound.add(node.var)

    ret = query.return_clause
    paths = 0
    for item in ret.items:
        expr = item.expr
        if isinstance(expr, ShortestPathItem):
            paths += 1
            for v in (expr.source, expr.target):
                if v not in bound:
                    raise UnboundVariableError(v, "shortestPath")
                if kinds[v] != "node":
                    raise QueryTypeError(f"shortestPath endpoint {v!r} is not a node variable")
        elif expr.var not in bound:
            raise UnboundVariableError(expr.var, "RETURN")
    if paths > 1:
        raise QueryError("at most one shortestPath item is supported")
    aliases = [i.alias for i in ret.items if i.alias is not None]
    if len(aliases) != len(set(aliases)):
        raise QueryError("duplicate alias in RETURN")

    if ret.order_by is not None:
        expr = ret.order_by.expr
        if expr.var not in bound:
            raise UnboundVariableError(expr.var, "ORDER BY")
        if ret.has_aggregate or ret.distinct:
            exprs = [i.expr for i in ret.items]
            ok = expr in exprs or (isinstance(expr, PropItem) and VarItem(expr.var) in exprs)
            if not ok:
                raise QueryError("with DISTINCT or count(), ORDER BY must refer to returned items")
        elif isinstance(expr, CountItem):
            raise QueryError("ORDER BY count() needs count() in RETURN")


def parse_query(text: str) -> Query:
    """Parse and validate a query string."""
    query = _Parser(text).query()
    _validate(query)
    return query


# --- printing ---------------------------------------------------------------


def _name(s: str) -> str:
    if _IDENT_RE.match(s) and s.lower() not in _KEYWORDS:
        return s
    return "`" + s.replace("`", "``") + "`"


def format_literal(value) -> str:
    if isinstance(value, CrossRef):
        return f"{_name(value.var)}.{_name(value.key)}"
    tag = datatype_of(value)
    if tag == "text":
        return json.dumps(value, ensure_ascii=False)
    if tag == "date":
        return f'date("{value.isoformat()}")'
    if tag == "float":
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("non-finite floats cannot be printed")
        return repr(value)
    return str(value)


def _props(filters: tuple) -> str:
    if not filters:
        return ""
    return " {" + ", ".join(f"{_name(k)}: {format_literal(v)}" for k, v in filters) + "}"


def _inner(var, label, filters) -> str:
    out = _name(var) if var else ""
    if label:
        out += f":{_name(label)}"
    return out + _props(filters)


def format_expr(expr) -> str:
    if isinstance(expr, VarItem):
        return _name(expr.var)
    if isinstance(expr, PropItem):
        return f"{_name(expr.var)}.{_name(expr.key)}"
    if isinstance(expr, CountItem):
        return f"count({_name(expr.var)})"
    return f"shortestPath({_name(expr.source)}, {_name(expr.target)})"


def format_query(query: Query) -> str:
    chains = []
    for chain in query.chains:
        parts = [f"({_inner(chain.nodes[0].var, chain.nodes[0].label, chain.nodes[0].prop_filters).strip()})"]
        for rel, node in zip(chain.rels, chain.nodes[1:]):
            inner = _inner(rel.var, rel.type, rel.prop_filters).strip()
            parts.append(f"-[{inner}]->" if rel.direction == "right" else f"<-[{inner}]-")
            parts.append(f"({_inner(node.var, node.label, node.prop_filters).strip()})")
        chains.append("".join(parts))
    ret = query.return_clause
    items = []
    for item in ret.items:
        s = format_expr(item.expr)
        if item.alias is not None:
            s += f" AS {_name(item.alias)}"
        items.append(s)
    out = "MATCH " + ", ".join(chains) + " RETURN " + ("DISTINCT " if ret.distinct else "") + ", ".join(items)
    if ret.order_by is not None:
        out += f" ORDER BY {format_expr(ret.order_by.expr)}" + (" DESC" if ret.order_by.descending else "")
    if ret.limit is not None:
        out += f" LIMIT {ret.limit}"
    return out
