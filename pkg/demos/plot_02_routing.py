"""
Hierarchical routing against a BFS oracle
=========================================

Routes climb the label hierarchy towards a common ancestor and drop back down.
No global search is needed.  The study compares every route with the exact
shortest path and checks the 4t+1 hop bound.
"""

from snowednet.routing import bfs_shortest, hierarchical_route, routing_study, study_csv
from snowednet.topology import TopoParams, VertexId, generate

topo = generate(TopoParams(2, 3))
src, dst = VertexId.parse("0.1.1.1"), VertexId.parse("2.3.3.3")
route = hierarchical_route(topo, src, dst)
best = bfs_shortest(topo, src, dst)
print("hierarchical:", " -> ".join(map(str, route.hops)), f"({route.length_hops} hops)")
print("shortest:    ", " -> ".join(map(str, best.hops)), f"({best.length_hops} hops)")

rows = [routing_study(generate(TopoParams(2, t)), sample=None if t <= 3 else 5000) for t in range(1, 5)]
print(study_csv(rows))

# the diameter grows faster than 2t, so a 2t hop claim does not hold here
for r in rows:
    print(f"t={r.tier}: BFS diameter {r.bfs_diameter}, 2t={2 * r.tier}, witness {r.diameter_witness}")
