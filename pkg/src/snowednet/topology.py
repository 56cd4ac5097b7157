"""Fractal polytope topology.

The base network is a D-simplex (every tier-0 node linked to every other).
For D = 2 the simplex is a triangle and each further tier applies one Koch
iteration: every segment of the previous curve is cut into four children
labelled ``parent.0`` .. ``parent.3`` and three new vertices are spawned
(two trisection points and the outward apex).

Vertices are identified by the child segment they start at birth, so a
vertex born at tier ``k`` carries exactly ``k`` base-4 digits with a
non-zero last digit.  Internally vertices are dense integers; the
``VertexId`` <-> integer mapping is closed form and needs no lookup table.

Edges of every iteration are kept in the graph, so coarse segments act as
express links between the vertices that survive into finer tiers.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

MAX_TIERS = 8
MAX_DIMENSION = 96


class TopologyError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class VertexId:
    """Canonical vertex label ``(side, digits)``."""

    side: int
    digits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(self.digits))
        if self.side < 0:
            raise TopologyError(f"negative side in label {self.side}")
        if any(d not in (0, 1, 2, 3) for d in self.digits):
            raise TopologyError(f"label digits must be base 4: {self.digits}")
        if self.digits and self.digits[-1] == 0:
            raise TopologyError(
                f"non-canonical label {self.side}.{'.'.join(map(str, self.digits))}: "
                "a vertex label never ends in digit 0"
            )

    @property
    def birth_tier(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        return ".".join(str(x) for x in (self.side, *self.digits))

    @classmethod
    def parse(cls, text: str) -> "VertexId":
        parts = text.strip().split(".")
        if not text.strip() or any(not p.isdigit() for p in parts):
            raise TopologyError(f"malformed vertex label {text!r}")
        return cls(int(parts[0]), tuple(int(p) for p in parts[1:]))


@dataclass(frozen=True)
class TopoParams:
    dimension: int = 2
    tiers: int = 0
    unit_side: Fraction = Fraction(1)
    max_tiers: int = MAX_TIERS

    def __post_init__(self):
        object.__setattr__(self, "unit_side", Fraction(self.unit_side))
        if self.dimension < 1:
            raise TopologyError(f"dimension must be >= 1, got {self.dimension}")
        if self.tiers < 0:
            raise TopologyError(f"tiers must be >= 0, got {self.tiers}")
        if self.tiers > 0 and self.dimension != 2:
            raise TopologyError(
                f"fractal iteration is only defined for D=2 (got D={self.dimension}, t={self.tiers})"
            )
        if self.unit_side <= 0:
            raise TopologyError("unit_side must be positive")
        if self.tiers > self.max_tiers:
            raise TopologyError(f"tiers={self.tiers} exceeds resource cap {self.max_tiers}")
        if self.dimension > MAX_DIMENSION:
            raise TopologyError(f"dimension={self.dimension} exceeds resource cap {MAX_DIMENSION}")


def node_count(t: int) -> int:
    """Number of nodes after ``t`` Koch tiers, ``3 * 4**t``."""
    if t < 0:
        raise TopologyError("t must be >= 0")
    return 3 * 4**t


def total_length(t: int) -> Fraction:
    """Exact total segment length ``3 * (4/3)**t`` (unit side 1)."""
    if t < 0:
        raise TopologyError("t must be >= 0")
    return 3 * Fraction(4, 3) ** t


def shortest_segment(t: int, unit_side=1) -> Fraction:
    """Length ``s`` of the finest segment, ``unit_side / 3**t``."""
    return Fraction(unit_side) / 3**t


def _rotate(vec: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.column_stack((c * vec[:, 0] - s * vec[:, 1], s * vec[:, 0] + c * vec[:, 1]))


@dataclass(frozen=True, eq=False)
class FractalTopology:
    params: TopoParams
    coords: np.ndarray | None
    # edge_sets[k][j] = (start id, end id) of segment j of iteration k
    edge_sets: tuple[np.ndarray, ...]
    _tier_base: tuple[int, ...] = field(repr=False)

    @property
    def tiers(self) -> int:
        return self.params.tiers

    @property
    def node_count(self) -> int:
        return self._tier_base[-1]

    @property
    def total_length(self) -> Fraction:
        """Geometric length of the finest curve (exact)."""
        if self.params.dimension != 2:
            return Fraction(len(self.edge_sets[0])) * self.params.unit_side
        return total_length(self.tiers) * self.params.unit_side

    @property
    def shortest_segment(self) -> Fraction:
        return shortest_segment(self.tiers, self.params.unit_side)

    def __len__(self):
        return self.node_count

    # -- label <-> index ------------------------------------------------

    def index(self, v: VertexId) -> int:
        b = v.birth_tier
        sides = self.params.dimension + 1 if self.tiers == 0 else 3
        if b > self.tiers or v.side >= sides:
            raise KeyError(f"vertex {v} not in topology")
        if b == 0:
            return v.side
        seg = v.side
        for d in v.digits:
            seg = seg * 4 + d
        return self._tier_base[b - 1] + 3 * (seg // 4) + (seg % 4) - 1

    def __contains__(self, v: VertexId) -> bool:
        try:
            self.index(v)
        except KeyError:
            return False
        return True

    def label(self, i: int) -> VertexId:
        if not 0 <= i < self.node_count:
            raise KeyError(f"vertex index {i} out of range")
        if i < self._tier_base[0]:
            return VertexId(i)
        b = bisect_right(self._tier_base, i)
        off = i - self._tier_base[b - 1]
        seg = 4 * (off // 3) + off % 3 + 1
        digits = []
        for _ in range(b):
            digits.append(seg % 4)
            seg //= 4
        return VertexId(seg, tuple(reversed(digits)))

    @cached_property
    def labels(self) -> list[VertexId]:
        return [self.label(i) for i in range(self.node_count)]

    @cached_property
    def rank(self) -> np.ndarray:
        """Position of every vertex in canonical label order."""
        order = sorted(range(self.node_count), key=self.labels.__getitem__)
        rank = np.empty(self.node_count, dtype=np.int64)
        rank[order] = np.arange(self.node_count)
        return rank

    def birth_tier(self, i: int) -> int:
        return bisect_right(self._tier_base, i)

    # -- segments -------------------------------------------------------

    def segment_start(self, k: int, seg: int) -> int:
        """Index of the vertex starting segment ``seg`` of iteration ``k``."""
        while k > 0 and seg % 4 == 0:
            seg //= 4
            k -= 1
        if k == 0:
            return seg
        return self._tier_base[k - 1] + 3 * (seg // 4) + seg % 4 - 1

    def segment_end(self, k: int, seg: int) -> int:
        n = len(self.edge_sets[k])
        return self.segment_start(k, (seg + 1) % n)

    def birth_segment(self, i: int) -> tuple[int, int]:
        """(tier, segment index) of the segment vertex ``i`` starts at birth."""
        b = self.birth_tier(i)
        if b == 0:
            return 0, i
        off = i - self._tier_base[b - 1]
        return b, 4 * (off // 3) + off % 3 + 1

    # -- graph ------------------------------------------------------------

    def edge_tier(self, u: int, v: int) -> int:
        """Iteration that owns edge ``(u, v)``; raises if not adjacent."""
        if not self.adjacent(u, v):
            raise KeyError(f"{self.label(u)} and {self.label(v)} are not adjacent")
        return max(self.birth_tier(u), self.birth_tier(v))

    def adjacent(self, u: int, v: int) -> bool:
        if u == v:
            return False
        if self.tiers == 0:
            return 0 <= u < self.node_count and 0 <= v < self.node_count
        # an edge of iteration m always touches a vertex born at m
        for a, b in ((u, v), (v, u)):
            k, seg = self.birth_segment(a)
            if k == 0 or k < self.birth_tier(b):
                continue
            if self.segment_end(k, seg) == b:
                return True
            if self.segment_start(k, seg - 1) == b:
                return True
        if self.birth_tier(u) == 0 and self.birth_tier(v) == 0:
            return True
        return False

    def edge_length_units(self, u: int, v: int) -> int:
        """Edge length measured in units of the shortest segment ``s``."""
        return 3 ** (self.tiers - self.edge_tier(u, v))

    @cached_property
    def union_edges(self) -> np.ndarray:
        return np.concatenate(self.edge_sets)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """Neighbour lists of the union graph, sorted by canonical label."""
        nbrs: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.union_edges.tolist():
            nbrs[u].append(v)
            nbrs[v].append(u)
        rank = self.rank
        for lst in nbrs:
            lst.sort(key=rank.__getitem__)
        return nbrs

    def neighbors(self, v: VertexId) -> list[VertexId]:
        return [self.label(j) for j in self.adjacency[self.index(v)]]

    def sparse_adjacency(self):
        from scipy.sparse import coo_matrix

        e = self.union_edges
        n = self.node_count
        data = np.ones(2 * len(e), dtype=np.int8)
        rows = np.concatenate((e[:, 0], e[:, 1]))
        cols = np.concatenate((e[:, 1], e[:, 0]))
        return coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

    def perimeter(self, k: int | None = None) -> float:
        """Euclidean length of the iteration-``k`` curve (default: finest)."""
        if self.coords is None:
            raise TopologyError("coordinates are only available for D=2")
        k = self.tiers if k is None else k
        e = self.edge_sets[k]
        d = self.coords[e[:, 1]] - self.coords[e[:, 0]]
        return math.fsum(np.hypot(d[:, 0], d[:, 1]).tolist())

    # -- hierarchy ------------------------------------------------------

    def ancestor(self, v: VertexId, k: int) -> VertexId:
        return ancestor(v, k)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        p = self.params
        vertices = []
        for i, lab in enumerate(self.labels):
            entry = {"label": str(lab), "birth_tier": lab.birth_tier}
            if self.coords is not None:
                entry["coord"] = [float(self.coords[i, 0]), float(self.coords[i, 1])]
            vertices.append(entry)
        labels = self.labels
        return {
            "params": {
                "dimension": p.dimension,
                "tiers": p.tiers,
                "unit_side": str(p.unit_side),
            },
            "node_count": self.node_count,
            "total_length": str(self.total_length),
            "vertices": vertices,
            "edge_sets": [
                [[str(labels[u]), str(labels[v])] for u, v in es.tolist()] for es in self.edge_sets
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def ancestor(v: VertexId, k: int) -> VertexId:
    """Vertex starting the iteration-``k`` segment that contains ``v``'s birth segment."""
    if not 0 <= k <= v.birth_tier:
        raise TopologyError(f"ancestor tier {k} out of range for {v} (birth tier {v.birth_tier})")
    digits = list(v.digits[:k])
    while digits and digits[-1] == 0:
        digits.pop()
    return VertexId(v.side, tuple(digits))


def generate(params: TopoParams) -> FractalTopology:
    if params.tiers == 0:
        n = params.dimension + 1
        iu, ju = np.triu_indices(n, k=1)
        if params.dimension == 2:
            # tier-0 triangle kept in curve order so side i runs from vertex i to i+1
            edges = np.array([[0, 1], [1, 2], [2, 0]], dtype=np.int64)
        else:
            edges = np.column_stack((iu, ju)).astype(np.int64)
        coords = _triangle(float(params.unit_side)) if params.dimension == 2 else None
        return FractalTopology(params, coords, (edges,), (n,))

    coords = _triangle(float(params.unit_side))
    starts = np.array([0, 1, 2], dtype=np.int64)
    edge_sets = [np.array([[0, 1], [1, 2], [2, 0]], dtype=np.int64)]
    tier_base = [3]
    n = 3
    for _ in range(params.tiers):
        seg = edge_sets[-1]
        m = len(seg)
        p, q = coords[seg[:, 0]], coords[seg[:, 1]]
        a = p + (q - p) / 3.0
        b = p + 2.0 * (q - p) / 3.0
        # curve runs counter-clockwise, so outward is a clockwise turn
        apex = a + _rotate(b - a, -math.pi / 3)
        new = np.empty((3 * m, 2))
        new[0::3], new[1::3], new[2::3] = a, apex, b
        new_ids = n + np.arange(3 * m, dtype=np.int64)
        child_start = np.empty(4 * m, dtype=np.int64)
        child_start[0::4] = starts
        child_start[1::4] = new_ids[0::3]
        child_start[2::4] = new_ids[1::3]
        child_start[3::4] = new_ids[2::3]
        child_end = np.roll(child_start, -1)
        edge_sets.append(np.column_stack((child_start, child_end)))
        starts = child_start
        coords = np.concatenate((coords, new))
        n += 3 * m
        tier_base.append(n)
    return FractalTopology(params, coords, tuple(edge_sets), tuple(tier_base))


def _triangle(side: float) -> np.ndarray:
    return np.array([[0.0, 0.0], [side, 0.0], [side / 2.0, side * math.sqrt(3) / 2.0]])
