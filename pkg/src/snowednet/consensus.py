"""Proof-of-routes consensus.

Each round every live router sends heartbeats (neighbours, remote routers
named by ledger records, local entities), scores itself by the total length
of acknowledged routes, and the routers of a tier elect a leader with
probability proportional to that score.  Winners may displace the weakest
router one tier down; routers whose lookup cost exceeds the tier threshold
drop one tier.
"""

from __future__ import annotations

import hashlib
import math
import random
import statistics
import weakref
from dataclasses import dataclass, field, replace

from .routing import SwitchTable, hierarchical_route_ids
from .topology import FractalTopology, VertexId

PERF_BATCH = 32
WORST_PERF = math.inf


class NoEligible(RuntimeError):
    pass


def edge_key(u: VertexId, v: VertexId) -> tuple[VertexId, VertexId]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class LinkStatus:
    down_edges: frozenset = frozenset()
    down_entities: frozenset = frozenset()

    @classmethod
    def down(cls, edges=(), entities=()) -> "LinkStatus":
        return cls(frozenset(edge_key(u, v) for u, v in edges), frozenset(entities))

    def edge_up(self, u: VertexId, v: VertexId) -> bool:
        return edge_key(u, v) not in self.down_edges


@dataclass
class RouterState:
    node: VertexId
    tier: int
    table: SwitchTable
    route_score: int = 0
    perf_sample: float = WORST_PERF
    alive: bool = True


@dataclass(frozen=True)
class HeartbeatReport:
    node: VertexId
    neighbor_acks: frozenset[VertexId]
    remote_router_acks: frozenset[VertexId]
    local_entity_acks: frozenset[str]
    total_length: int
    # hop count of every acknowledged probe, keyed by target
    neighbor_hops: dict = field(default_factory=dict, compare=False)
    remote_hops: dict = field(default_factory=dict, compare=False)
    entity_hops: dict = field(default_factory=dict, compare=False)


@dataclass
class ElectionConfig:
    rng_seed: int = 0
    perf_threshold: dict[int, float] = field(default_factory=dict)
    rounds_per_epoch: int = 1

    def __post_init__(self):
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if any(v <= 0 for v in self.perf_threshold.values()):
            raise ValueError("perf thresholds must be positive")
        if self.rounds_per_epoch < 1:
            raise ValueError("rounds_per_epoch must be >= 1")

    def threshold(self, tier: int) -> float:
        return self.perf_threshold.get(tier, math.inf)


_probe_cache: "weakref.WeakKeyDictionary[FractalTopology, dict]" = weakref.WeakKeyDictionary()


def _probe(topo: FractalTopology, s: int, d: int):
    cache = _probe_cache.setdefault(topo, {})
    hit = cache.get((s, d))
    if hit is None:
        ids = hierarchical_route_ids(topo, s, d)
        labels = [topo.label(i) for i in ids]
        units = sum(topo.edge_length_units(u, v) for u, v in zip(ids, ids[1:]))
        edges = frozenset(edge_key(u, v) for u, v in zip(labels, labels[1:]))
        hit = cache[(s, d)] = (len(ids) - 1, units, edges)
    return hit


def heartbeat(topo: FractalTopology, router: RouterState, link_status: LinkStatus) -> HeartbeatReport:
    if not router.alive:
        raise ValueError(f"router {router.node} is down")
    me = topo.index(router.node)
    t = topo.tiers
    total = 0
    # step 1: neighbour discovery, 1 hop
    neighbors = {}
    for j in topo.adjacency[me]:
        other = topo.label(j)
        if link_status.edge_up(router.node, other):
            neighbors[other] = 1
            total += topo.edge_length_units(me, j)
    # step 2: remote routers named by live records, at most 2t hops
    remote = {}
    if t != 0:
        nbr_ids = set(topo.adjacency[me])
        targets = {rec.label for _, _, rec in router.table.ledger.live_claims()}
        for target in sorted(targets):
            j = topo.index(target)
            if j == me or j in nbr_ids:
                continue
            hops, units, edges = _probe(topo, me, j)
            if hops <= 2 * t and edges.isdisjoint(link_status.down_edges):
                remote[target] = hops
                total += units
    # step 3: local entities, 1 hop of length s
    entities = {}
    for bcadd in router.table:
        if bcadd not in link_status.down_entities:
            entities[bcadd] = 1
            total += 1
    return HeartbeatReport(
        router.node,
        frozenset(neighbors),
        frozenset(remote),
        frozenset(entities),
        total,
        neighbors,
        remote,
        entities,
    )


def passes_threshold(state: RouterState, cfg: ElectionConfig) -> bool:
    return state.perf_sample <= cfg.threshold(state.tier)


def round_rng(seed: int, round_no: int, tier: int) -> random.Random:
    material = hashlib.sha256(f"snowednet-election:{seed}:{round_no}:{tier}".encode()).digest()
    return random.Random(int.from_bytes(material, "big"))


def elect_leader(states, cfg: ElectionConfig, tier: int, round_no: int = 0) -> VertexId:
    """Draw a leader of ``tier`` with probability proportional to route score."""
    pool = sorted(
        (s for s in states if s.alive and s.tier == tier and s.route_score > 0 and passes_threshold(s, cfg)),
        key=lambda s: s.node,
    )
    if not pool:
        raise NoEligible(f"no eligible router in tier {tier}")
    total = sum(s.route_score for s in pool)
    ticket = round_rng(cfg.rng_seed, round_no, tier).randrange(total)
    for s in pool:
        ticket -= s.route_score
        if ticket < 0:
            return s.node
    raise AssertionError("unreachable")


def measure_perf(router: RouterState, batch: int = PERF_BATCH) -> float:
    """Median comparison count over a seeded batch of lookups.

    Half the keys are present in the table, half are absent.  An empty table
    scores ``inf`` so it fails every threshold.
    """
    keys = list(router.table)
    if not keys:
        return WORST_PERF
    rng = random.Random(hashlib.sha256(f"perf:{router.node}".encode()).digest())
    queries = [rng.choice(keys) for _ in range(batch // 2)]
    present = set(keys)
    while len(queries) < batch:
        probe = hashlib.sha256(f"absent:{router.node}:{len(queries)}:{rng.random()}".encode()).hexdigest()[:16]
        if probe not in present:
            queries.append(probe)
    return statistics.median(router.table.search(q)[1] for q in queries)


@dataclass(frozen=True)
class Reassignment:
    states: list
    swaps: list  # (winner, displaced, from_tier, to_tier)
    demotions: list  # (node, from_tier, to_tier)


def reassign_tiers(states, winners: dict[int, VertexId], cfg: ElectionConfig, t_max: int) -> Reassignment:
    """Apply one round of promotions and demotions.

    A tier-k winner swaps with the lowest-scoring router of tier k-1 when it
    out-scores it.  Afterwards every router failing its tier threshold moves
    one tier up (towards the leaves), capped at ``t_max``.
    """
    by_node = {s.node: replace(s) for s in states}
    touched: set[VertexId] = set()
    swaps = []
    for tier in sorted(winners):
        w = by_node[winners[tier]]
        if tier == 0 or w.node in touched:
            continue
        lower = [s for s in by_node.values() if s.tier == tier - 1 and s.node not in touched]
        if not lower:
            continue
        weakest = min(lower, key=lambda s: (s.route_score, s.node))
        if w.route_score <= weakest.route_score:
            continue
        w.tier, weakest.tier = weakest.tier, w.tier
        touched.update((w.node, weakest.node))
        swaps.append((w.node, weakest.node, tier, tier - 1))
    demotions = []
    for s in sorted(by_node.values(), key=lambda s: s.node):
        if not passes_threshold(s, cfg) and s.tier < t_max:
            demotions.append((s.node, s.tier, s.tier + 1))
            s.tier += 1
    ordered = [by_node[s.node] for s in states]
    return Reassignment(ordered, swaps, demotions)
