"""
Proof-of-routes
===============

A router earns its route score by acknowledging heartbeats: its neighbours,
the remote routers that hold live claims, and its own entities.  Leaders are
drawn in proportion to that score, and a failed link shows up as a lower score.
"""

from snowednet.consensus import LinkStatus, RouterState, heartbeat
from snowednet.harness import election_frequencies
from snowednet.ledger import RingLedger, SnowedRecord
from snowednet.routing import SwitchTable
from snowednet.topology import TopoParams, VertexId, generate

topo = generate(TopoParams(2, 2))
ledger = RingLedger(2, 10, 50)
for i, lab in enumerate(topo.labels):
    ledger.append_record(SnowedRecord.self_claim(f"entity-{i}", lab, 1, 0, 0))

router = RouterState(VertexId(0), 0, SwitchTable(VertexId(0), ledger))
healthy = heartbeat(topo, router, LinkStatus())
broken = heartbeat(topo, router, LinkStatus.down([(VertexId(0), VertexId(1))]))
print("route score, all links up:", healthy.total_length)
print("route score, 0-1 down:   ", broken.total_length)
print("remote acks:", len(healthy.remote_router_acks), "->", len(broken.remote_router_acks))

print("win frequencies for scores (30, 10):", election_frequencies([30, 10], 20000, seed=1))
