"""
Three ways to run a pattern query
=================================

naive   hands the whole query to the server, which reads every named
        attribute of every candidate it touches.
opt1    matches the selective part on the server and picks the earliest
        document on the client, reading dates only for surviving rows.
opt2    like opt1, but the dates come from a key-value sidecar.

The contradiction query (q15) has nothing to push to the client, so its
plans coincide.
"""

from graphopt import (BackendHandle, DEFAULT_GENERATOR, build_from_graph, canonical_queries,
                      generate_synthetic, kv_requirements, parse_query, plan, run_query)

g = generate_synthetic(DEFAULT_GENERATOR)
texts = canonical_queries(g)

q1 = parse_query(texts["q1"])
kv = build_from_graph(g, kv_requirements(q1))
for strategy in ("naive", "opt1", "opt2"):
    table, report = run_query(q1, strategy, BackendHandle(g), kv)
    c = report.counts[0]
    print(f"q1 {strategy:5s} attribute reads {c.attribute_access:7d}  kv {c.kv_lookup:3d}  "
          f"modeled {report.mean_modeled_us:12.0f} us  -> {table.rows}")

print()
for line in plan(q1, "opt2", kv=kv).describe():
    print("  ", line)

q15 = parse_query(texts["q15"])
print("\nq15 plans identical:", plan(q15, "opt1") == plan(q15, "opt2"))
