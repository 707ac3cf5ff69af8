"""
Rebalancing edge types
======================

Edge-type surgery removes or adds a fixed number of edges of chosen types,
picking uniformly among existing edges (removals) or absent pairs
(additions).  Node data never changes, only the structure.
"""

from fairgraph import RebalanceSpec, apply_rebalance, compute_stats, generate, preset
from fairgraph.graphdata import EdgeType

g = generate(preset("syn1", seed=1))
before = compute_stats(g)

# Cut inter-label edges between the two s=0 groups and add same-group edges
# among s=1 nodes.
spec = RebalanceSpec({"E7": -1500, "E3": 1000, "E4": 1000}, seed=0)
new = apply_rebalance(g, spec)
after = compute_stats(new)

for t in EdgeType:
    b, a = before.edge_type_counts[t], after.edge_type_counts[t]
    if a != b:
        print(f"{t.name}: {b} -> {a} ({a - b:+d})")
print(f"total edges: {before.num_edges} -> {after.num_edges}")

# Asking for more removals than exist fails before anything is changed.
try:
    apply_rebalance(g, RebalanceSpec({"E9": -10**6}))
except ValueError as exc:
    print("refused:", exc)
