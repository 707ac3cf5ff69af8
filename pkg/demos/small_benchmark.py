"""
A small multi-seed benchmark
============================

The benchmark runner trains every method on every dataset for each grid
point and seed, selects an epoch per run, and reports the grid point with the
best mean validation accuracy as mean and standard deviation over seeds.
Per-run logs, scores and summaries land under ``out/runs``.
"""

from pathlib import Path

from fairgraph import BenchPlan, preset, run_benchmark

plan = BenchPlan(
    datasets={"syn1": preset("syn1"), "syn2": preset("syn2")},
    methods=["mlp", "gcn"],
    grid={"lr": [1e-2, 1e-3]},
    seeds=[0, 1, 2],
    base={"epochs": 300},
)
out = Path("out")
report = run_benchmark(plan, out=out)
print(report.to_markdown())
print("artifacts:", sorted(p.name for p in out.iterdir()))
