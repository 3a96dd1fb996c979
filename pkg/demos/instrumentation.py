"""
Counting elementary operations
==============================

Every read goes through a BackendHandle, which tallies calls per primitive.
A CostModel turns the tally into modeled microseconds.
"""

from graphopt import BackendHandle, CostModel, GeneratorConfig, generate_synthetic

g = generate_synthetic(GeneratorConfig(entity_count=100, document_count=40,
                                       author_count=10, relation_count=400, seed=3))
h = BackendHandle(g)

docs = h.scan_nodes("Document")
dates = [h.get_attribute(d, "publicationDate") for d in docs[:10]]
around = h.get_neighbours(docs[0])
print("counts:", h.counter.snapshot().as_dict())
print("modeled: %.0f us" % h.modeled_cost())

# a different latency profile changes the price, never the counts
slow_reads = CostModel(attribute_access_us=1500.0)
print("with slow attribute reads: %.0f us" % BackendHandle(g, h.counter, slow_reads).modeled_cost())
