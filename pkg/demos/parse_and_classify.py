"""
Parsing and classifying queries
===============================

The query language is a small slice of Cypher. Each parsed query can be
classified by what kind of question it asks and which attributes it reads.
"""

import json

from graphopt import classify, format_query, parse_query
from graphopt.query_model import QuerySyntaxError

q1 = parse_query(
    'MATCH (n:Entity {preferredLabel: "APP"})-[r:hasRelation {function: "increases"}]->'
    '(m:Entity {preferredLabel: "gamma Secretase Complex"}), '
    "(doc:Document {documentID: r.context})<-[r2:isAuthor]-(author:Author) "
    "RETURN doc, author ORDER BY doc.publicationDate LIMIT 1"
)
print(format_query(q1))
print(json.dumps(classify(q1).to_json(), indent=2))

q4 = parse_query('MATCH (a:Entity {preferredLabel: "axonal transport"}), '
                 '(b:Entity {preferredLabel: "LRP3"}) RETURN shortestPath(a, b)')
c = classify(q4)
print(c.category, c.scope)

try:
    parse_query("MATCH (a)-->(b) RETURN a")
except QuerySyntaxError as exc:
    print("rejected:", exc)
