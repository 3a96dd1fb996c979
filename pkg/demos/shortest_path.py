"""
Shortest paths: built-in search vs. client BFS
==============================================

The built-in search weighs every edge it relaxes, so it reads an attribute
per edge. A plain BFS over neighbourhoods never reads attributes at all.
Both return the same path.
"""

from graphopt import (BackendHandle, DEFAULT_GENERATOR, builtin_shortest_path,
                      canonical_queries, generate_synthetic, graph_bfs_shortest_path, parse_query)

g = generate_synthetic(DEFAULT_GENERATOR)
q4 = parse_query(canonical_queries(g)["q4"])
s, e = [g.lookup(n.label, *n.prop_filters[0])[0] for ch in q4.chains for n in ch.nodes]

for name, search in (("builtin", builtin_shortest_path), ("bfs", graph_bfs_shortest_path)):
    h = BackendHandle(g)
    path = search(s, e, h)
    counts = h.counter.snapshot()
    print(f"{name:8s} length {path.length}  neighbours {counts.neighbours:5d}  "
          f"attribute reads {counts.attribute_access:5d}  modeled {h.modeled_cost():10.0f} us")
    print("         path", path.nodes)
