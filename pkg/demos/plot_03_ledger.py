"""
The ring ledger
===============

The ledger keeps at most B = ceil(b*S) live blocks.  Each new block pushes
the oldest one into an archive.  Both windows re-verify independently, and a
self-claim that falls out of the ring no longer resolves.
"""

from snowednet.ledger import RingLedger, SnowedRecord, capacity
from snowednet.routing import NotFound, SwitchTable, resolve
from snowednet.topology import VertexId

print("capacity(t=1, b=10, r=100) =", capacity(1, 10, 100))

ledger = RingLedger(0, 1, 4)  # three live blocks of four records
table = SwitchTable(None, ledger)
ledger.append_record(SnowedRecord.self_claim("alice", VertexId(2), 1, 1, 1))
print("alice ->", resolve(table, "alice"))

for i in range(40):
    ledger.append_record(SnowedRecord.routing_request("bob", "carol", i, 2 + i))
print(ledger.stats())
print("live window verifies:", ledger.verify_chain(ledger.live_start))
print("archive verifies:", ledger.verify_chain(0, ledger.live_start))

try:
    resolve(table, "alice")
except NotFound as exc:
    print("after the ring rolled over:", exc)

blk = ledger.block(ledger.live_start)
print("canonical block bytes:", len(blk.encode()), "hash", blk.hash.hex()[:16])
