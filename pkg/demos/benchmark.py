"""
Benchmark and report
====================

Run all queries under all strategies, check the answers agree, and write
a CSV of every run, a markdown summary and one SVG chart per query.
"""

import tempfile
from pathlib import Path

from graphopt import BenchConfig, GeneratorConfig, emit_results, markdown_table, read_csv, run_benchmark

config = BenchConfig(
    generator=GeneratorConfig(entity_count=1000, document_count=400, author_count=100,
                              relation_count=8000, seed=11, anchors=True),
    repetitions=3,
)
reports = run_benchmark(config)

with tempfile.TemporaryDirectory() as tmp:
    written = emit_results(reports, tmp)
    print("wrote", sorted(p.name for p in written))
    print(markdown_table(read_csv(Path(tmp) / "results.csv")))
