"""Hierarchical label routing, the BFS oracle and label-switching tables.

Routes are computed on the union graph of all Koch iterations.  The
hierarchical rule needs nothing but labels: a vertex climbs to the nearest
vertex of a strictly coarser birth tier (one hop for trisection points, two
for an apex), both endpoints keep climbing until their chains touch, and the
path is the concatenation of the climb, at most one coarse hop, and the
reversed climb of the destination.  Each climb step lowers the birth tier by
at least one, which caps a route at ``4t + 1`` hops.
"""

from __future__ import annotations

import csv
import io
import random
import re
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from .ledger import RecordKind, RecordRef
from .topology import FractalTopology, TopologyError, VertexId


class NotFound(LookupError):
    pass


@dataclass(frozen=True)
class RoutePath:
    hops: tuple[VertexId, ...]
    length_hops: int
    length_units: int

    @property
    def src(self) -> VertexId:
        return self.hops[0]

    @property
    def dst(self) -> VertexId:
        return self.hops[-1]


def _path(topo: FractalTopology, ids: list[int]) -> RoutePath:
    units = sum(topo.edge_length_units(u, v) for u, v in zip(ids, ids[1:]))
    return RoutePath(tuple(topo.label(i) for i in ids), len(ids) - 1, units)


def _index(topo: FractalTopology, v: VertexId) -> int:
    try:
        return topo.index(v)
    except KeyError:
        raise TopologyError(f"unknown vertex {v}") from None


def _climb(topo: FractalTopology, v: int) -> list[tuple[int, list[int]]]:
    """Ancestor chain of ``v`` as ``(vertex, path from v)`` pairs, ending at tier 0."""
    chain = [(v, [v])]
    path = [v]
    cur = v
    while topo.birth_tier(cur) > 0:
        k, seg = topo.birth_segment(cur)
        parent = seg // 4
        start = topo.segment_start(k - 1, parent)
        end = topo.segment_end(k - 1, parent)
        digit = seg % 4
        if digit == 1:
            step = [start]
        elif digit == 3:
            step = [end]
        else:
            # apex: head for the coarser of the two parent endpoints
            key_s = (topo.birth_tier(start), topo.label(start))
            key_e = (topo.birth_tier(end), topo.label(end))
            if key_s <= key_e:
                step = [topo.segment_start(k, seg - 1), start]
            else:
                step = [topo.segment_end(k, seg), end]
        path = path + step
        cur = step[-1]
        chain.append((cur, path))
    return chain


def _drop_cycles(ids: list[int]) -> list[int]:
    out: list[int] = []
    pos: dict[int, int] = {}
    for v in ids:
        if v in pos:
            cut = pos[v]
            for x in out[cut + 1 :]:
                del pos[x]
            del out[cut + 1 :]
        else:
            pos[v] = len(out)
            out.append(v)
    return out


def hierarchical_route_ids(topo: FractalTopology, s: int, d: int) -> list[int]:
    if s == d:
        return [s]
    up, down = _climb(topo, s), _climb(topo, d)
    best = None
    for i, (u, _) in enumerate(up):
        for j, (w, _) in enumerate(down):
            if u == w:
                gap = 0
            elif topo.adjacent(u, w):
                gap = 1
            else:
                continue
            cost = len(up[i][1]) + len(down[j][1]) - 2 + gap
            if best is None or cost < best[0]:
                best = (cost, i, j, gap)
    _, i, j, gap = best
    tail = down[j][1][::-1]
    ids = up[i][1] + (tail if gap else tail[1:])
    return _drop_cycles(ids)


def hierarchical_route(topo: FractalTopology, src: VertexId, dst: VertexId) -> RoutePath:
    """Route using only the label hierarchy (no global graph search)."""
    return _path(topo, hierarchical_route_ids(topo, _index(topo, src), _index(topo, dst)))


def bfs_distances(topo: FractalTopology, src: int, stop: int | None = None) -> list[int]:
    """Hop distances from vertex index ``src`` (-1 = not reached)."""
    dist = [-1] * topo.node_count
    dist[src] = 0
    adj = topo.adjacency
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                if v == stop:
                    return dist
                queue.append(v)
    return dist


def bfs_shortest_ids(topo: FractalTopology, s: int, d: int) -> list[int]:
    dist = bfs_distances(topo, s, stop=d)
    if dist[d] < 0:
        raise TopologyError("destination unreachable")
    adj = topo.adjacency
    path = [d]
    cur = d
    while cur != s:
        # neighbour lists are label-sorted: first hit is the smallest label
        cur = next(v for v in adj[cur] if dist[v] == dist[cur] - 1)
        path.append(cur)
    return path[::-1]


def bfs_shortest(topo: FractalTopology, src: VertexId, dst: VertexId) -> RoutePath:
    """Exact minimum-hop path; predecessors chosen by smallest label."""
    return _path(topo, bfs_shortest_ids(topo, _index(topo, src), _index(topo, dst)))


def distance_matrix(topo: FractalTopology, sources=None) -> np.ndarray:
    """All-pairs (or from ``sources``) hop distances via scipy's BFS."""
    from scipy.sparse.csgraph import shortest_path

    d = shortest_path(topo.sparse_adjacency(), method="D", unweighted=True, directed=False, indices=sources)
    return d.astype(np.int64)


def is_valid_path(topo: FractalTopology, path: RoutePath) -> bool:
    ids = [topo.index(v) for v in path.hops]
    if len(set(ids)) != len(ids) or path.length_hops != len(ids) - 1:
        return False
    return all(topo.adjacent(u, v) for u, v in zip(ids, ids[1:]))


# -- routing study ------------------------------------------------------


@dataclass
class StudyRow:
    tier: int
    pairs: int
    mean_stretch: float
    max_stretch: float
    bfs_diameter: int
    claim_2t_satisfied: bool
    max_hops: int
    hop_bound: int
    invalid_paths: int
    below_oracle: int
    above_bound: int
    diameter_witness: str
    diameter_with_leaf_hops: int
    claim_2t_with_leaf_hops: bool
    exhaustive: bool

    @property
    def ok(self) -> bool:
        return self.invalid_paths == 0 and self.below_oracle == 0 and self.above_bound == 0


STUDY_COLUMNS = [
    "tier",
    "pairs",
    "mean_stretch",
    "max_stretch",
    "bfs_diameter",
    "claim_2t_satisfied",
    "max_hops",
    "hop_bound",
    "invalid_paths",
    "below_oracle",
    "above_bound",
    "diameter_witness",
    "diameter_with_leaf_hops",
    "claim_2t_with_leaf_hops",
    "exhaustive",
]


def routing_study(topo: FractalTopology, sample: int | None = None, seed: int = 0) -> StudyRow:
    """Compare hierarchical routes with BFS distances.

    With ``sample=None`` every ordered pair of distinct vertices is checked,
    otherwise ``sample`` pairs drawn with ``random.Random(seed)``.  The BFS
    diameter is always computed over all pairs.
    """
    n = topo.node_count
    t = topo.tiers
    dist = distance_matrix(topo)
    if sample is None:
        pairs = [(s, d) for s in range(n) for d in range(n) if s != d]
    else:
        rng = random.Random(seed)
        pairs = []
        while len(pairs) < sample:
            s, d = rng.randrange(n), rng.randrange(n)
            if s != d:
                pairs.append((s, d))
    bound = 4 * t + 1
    stretches = []
    invalid = below = above = max_hops = 0
    for s, d in pairs:
        ids = hierarchical_route_ids(topo, s, d)
        hops = len(ids) - 1
        if ids[0] != s or ids[-1] != d or len(set(ids)) != len(ids) or not all(
            topo.adjacent(u, v) for u, v in zip(ids, ids[1:])
        ):
            invalid += 1
        below += hops < dist[s, d]
        above += hops > bound
        max_hops = max(max_hops, hops)
        stretches.append(hops / dist[s, d])
    diameter = int(dist.max())
    ws, wd = np.unravel_index(int(np.argmax(dist)), dist.shape)
    return StudyRow(
        tier=t,
        pairs=len(pairs),
        mean_stretch=float(np.mean(stretches)) if stretches else 1.0,
        max_stretch=float(np.max(stretches)) if stretches else 1.0,
        bfs_diameter=diameter,
        claim_2t_satisfied=diameter <= 2 * t,
        max_hops=max_hops,
        hop_bound=bound,
        invalid_paths=invalid,
        below_oracle=int(below),
        above_bound=int(above),
        diameter_witness=f"{topo.label(int(ws))}->{topo.label(int(wd))}",
        diameter_with_leaf_hops=diameter + 2,
        claim_2t_with_leaf_hops=diameter + 2 <= 2 * t,
        exhaustive=sample is None,
    )


def study_csv(rows: list[StudyRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=STUDY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        d = asdict(row)
        d["mean_stretch"] = f"{row.mean_stretch:.6f}"
        d["max_stretch"] = f"{row.max_stretch:.6f}"
        w.writerow(d)
    return buf.getvalue()


# -- addresses ----------------------------------------------------------

_ADDRESS = re.compile(r"snw://([0-9]+(?:\.[0-3])*)/([A-Za-z0-9]+)")


@dataclass(frozen=True)
class SnowedAddress:
    """Topology label plus BCADD; routable by label, switchable by BCADD."""

    label: VertexId
    bcadd: str

    def __str__(self) -> str:
        return f"snw://{self.label}/{self.bcadd}"

    @classmethod
    def parse(cls, text: str) -> "SnowedAddress":
        m = _ADDRESS.fullmatch(text)
        if m is None:
            raise ValueError(f"malformed SnowedNet address {text!r}")
        return cls(VertexId.parse(m.group(1)), m.group(2))


def full_address(label: VertexId, bcadd: str) -> str:
    addr = SnowedAddress(label, bcadd)
    SnowedAddress.parse(str(addr))
    return str(addr)


def parse_address(text: str) -> SnowedAddress:
    return SnowedAddress.parse(text)


# -- switch table -------------------------------------------------------


@dataclass(frozen=True)
class SwitchEntry:
    label: VertexId
    interface: int
    record_ref: RecordRef


class SwitchTable:
    """BCADD -> (label, interface) bindings backed solely by ledger self-claims.

    ``owner=None`` keeps every live claim; otherwise only claims attached to
    the owner's label.  The table re-syncs lazily whenever the ledger changed,
    so evicted claims disappear on the next lookup.
    """

    def __init__(self, owner: VertexId | None, ledger):
        self.owner = owner
        self.ledger = ledger
        self._keys: list[str] = []
        self._entries: dict[str, SwitchEntry] = {}
        self._version = None

    def sync(self):
        if self._version == self.ledger.version:
            return
        entries = {}
        for bcadd, ref, rec in self.ledger.live_claims():
            if rec.kind is RecordKind.SELF_CLAIM and (self.owner is None or rec.label == self.owner):
                entries[bcadd] = SwitchEntry(rec.label, rec.interface, ref)
        self._entries = entries
        self._keys = sorted(entries)
        self._version = self.ledger.version

    def __len__(self):
        self.sync()
        return len(self._keys)

    def __iter__(self):
        self.sync()
        return iter(self._keys)

    def entries(self) -> dict[str, SwitchEntry]:
        self.sync()
        return dict(self._entries)

    def search(self, bcadd: str) -> tuple[SwitchEntry | None, int]:
        """Binary search over sorted BCADDs; returns (entry, comparisons)."""
        self.sync()
        keys = self._keys
        lo, hi, comparisons = 0, len(keys), 0
        while lo < hi:
            mid = (lo + hi) // 2
            comparisons += 1
            key = keys[mid]
            if key == bcadd:
                return self._entries[key], comparisons
            if key < bcadd:
                lo = mid + 1
            else:
                hi = mid
        return None, comparisons


def resolve(table: SwitchTable, bcadd: str) -> tuple[VertexId, int]:
    entry, _ = table.search(bcadd)
    if entry is None or not table.ledger.is_live(entry.record_ref):
        raise NotFound(f"no live self-claim for {bcadd}")
    return entry.label, entry.interface
