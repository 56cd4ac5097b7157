"""Fractal-topology network with a ring ledger, proof-of-routes and private identities."""

__version__ = "0.1.0"

from .topology import FractalTopology, TopoParams, TopologyError, VertexId, generate, node_count, total_length
from .routing import NotFound, RoutePath, SnowedAddress, SwitchTable, bfs_shortest, hierarchical_route, routing_study
from .ledger import LedgerError, RecordRef, RingLedger, SnowedBlock, SnowedRecord, capacity
from .consensus import ElectionConfig, LinkStatus, NoEligible, RouterState, elect_leader, heartbeat
from .identity import Authority, GroupParams, IdentityBundle, RealID, Verdict, derive_address, setup, verify_bundle

__all__ = [
    "Authority",
    "ElectionConfig",
    "FractalTopology",
    "GroupParams",
    "IdentityBundle",
    "LedgerError",
    "LinkStatus",
    "NoEligible",
    "NotFound",
    "RealID",
    "RecordRef",
    "RingLedger",
    "RoutePath",
    "RouterState",
    "SnowedAddress",
    "SnowedBlock",
    "SnowedRecord",
    "SwitchTable",
    "TopoParams",
    "TopologyError",
    "Verdict",
    "VertexId",
    "bfs_shortest",
    "capacity",
    "derive_address",
    "elect_leader",
    "generate",
    "heartbeat",
    "hierarchical_route",
    "node_count",
    "routing_study",
    "setup",
    "total_length",
    "verify_bundle",
]
