"""
Building the snowflake topology
===============================

Every iteration splits each segment into thirds and raises an outward apex,
so tier t holds 3*4^t routers on a perimeter of 3*(4/3)^t.  Coarser edges
are kept as express links.
"""

from snowednet.topology import TopoParams, VertexId, generate, node_count, total_length

for t in range(5):
    topo = generate(TopoParams(2, t))
    print(f"t={t}: N={topo.node_count:5d} (closed form {node_count(t)}), "
          f"perimeter={topo.perimeter():.6f} (closed form {float(total_length(t)):.6f})")

# labels are the side of the base triangle followed by one digit per tier
topo = generate(TopoParams(2, 2))
v = VertexId.parse("1.0.2")
print(v, "born at tier", v.birth_tier, "neighbours:", [str(n) for n in topo.neighbors(v)])

# the original triangle edge survives as a long express link
a, b = topo.index(VertexId(0)), topo.index(VertexId(1))
print("0-1 adjacent:", topo.adjacent(a, b), "length in shortest segments:", topo.edge_length_units(a, b))
