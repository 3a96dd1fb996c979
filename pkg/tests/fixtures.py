"""Small hand-built graphs shared by several test modules."""

import datetime as dt

from graphopt.property_graph import Edge, Node, PropertyGraph

Q1_TEXT = (
    'MATCH (n:Entity {preferredLabel: "APP"})-[r:hasRelation {function: "increases"}]->'
    '(m:Entity {preferredLabel: "gamma Secretase Complex"}), '
    "(doc:Document {documentID: r.context})<-[r2:isAuthor]-(author:Author) "
    "RETURN doc, author ORDER BY doc.publicationDate LIMIT 1"
)

Q15_TEXT = (
    'MATCH (e1:Entity)-[r1:hasRelation {function: "increases"}]->(e2:Entity), '
    '(e1)-[r2:hasRelation {function: "decreases"}]->(e2) '
    "RETURN DISTINCT e1.preferredLabel, e2.preferredLabel, count(r1) AS `increases`, "
    "count(r2) AS `decreases` ORDER BY count(r1) DESC"
)


def _entity(i, name):
    return Node(i, frozenset({"Entity"}), {"preferredLabel": name})


def q1_graph(dates=(2003, 2001, 2007)):
    """APP -increases-> gSC three times, citing docs 10, 11, 12 with the given
    years; doc 13 (oldest) is only cited by a 'decreases' edge."""
    nodes = [_entity(0, "APP"), _entity(1, "gamma Secretase Complex"), _entity(2, "other")]
    for k, year in enumerate(list(dates) + [1990]):
        nodes.append(Node(10 + k, frozenset({"Document"}),
                          {"documentID": f"D{k}", "publicationDate": dt.date(year, 6, 1)}))
    for k in range(4):
        nodes.append(Node(20 + k, frozenset({"Author"}), {"name": f"author {k}"}))
    edges = []
    eid = 100
    for k in range(len(dates)):
        edges.append(Edge(eid, "hasRelation", 0, 1, {"function": "increases", "context": f"D{k}"}))
        eid += 1
    edges.append(Edge(eid, "hasRelation", 0, 1, {"function": "decreases", "context": f"D{len(dates)}"}))
    eid += 1
    edges.append(Edge(eid, "hasRelation", 0, 2, {"function": "increases", "context": f"D{len(dates)}"}))
    eid += 1
    for k in range(len(dates) + 1):
        edges.append(Edge(eid, "isAuthor", 20 + k, 10 + k, {}))
        eid += 1
    return PropertyGraph(nodes, edges)


def q15_graph():
    """Six entities with exactly one contradictory pair (0 -> 1)."""
    nodes = [_entity(i, f"E{i}") for i in range(6)]
    spec = [
        (0, 1, "increases"),
        (0, 1, "decreases"),
        (1, 2, "increases"),
        (2, 1, "decreases"),
        (2, 3, "increases"),
        (3, 4, "increases"),
        (4, 5, "decreases"),
    ]
    edges = [Edge(100 + k, "hasRelation", s, t, {"function": f, "context": "D"}) for k, (s, t, f) in enumerate(spec)]
    return PropertyGraph(nodes, edges)


def six_node_graph():
    """a-b, b-c, c-d, a-e, e-d, d-f with a..f = 0..5."""
    nodes = [Node(i, frozenset({"N"}), {"name": "abcdef"[i]}) for i in range(6)]
    pairs = [(0, 1), (1, 2), (2, 3), (0, 4), (4, 3), (3, 5)]
    return PropertyGraph(nodes, [Edge(10 + k, "t", s, t, {}) for k, (s, t) in enumerate(pairs)])
