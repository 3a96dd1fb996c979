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
from .classify import (
    CATEGORIES,
    LOCAL,
    LOCAL_AND_GLOBAL,
    NOT_EXPRESSIBLE,
    QueryClassification,
    attribute_reads,
    classify,
)
from .parser import (
    QueryError,
    QuerySyntaxError,
    QueryTypeError,
    UnboundVariableError,
    format_query,
    parse_query,
)

__all__ = [
    "CATEGORIES",
    "Chain",
    "CountItem",
    "CrossRef",
    "LOCAL",
    "LOCAL_AND_GLOBAL",
    "NOT_EXPRESSIBLE",
    "NodePattern",
    "OrderBy",
    "PropItem",
    "Query",
    "QueryClassification",
    "QueryError",
    "QuerySyntaxError",
    "QueryTypeError",
    "RelPattern",
    "ReturnClause",
    "ReturnItem",
    "ShortestPathItem",
    "UnboundVariableError",
    "VarItem",
    "attribute_reads",
    "classify",
    "format_query",
    "parse_query",
]
