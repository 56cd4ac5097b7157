"""Hash-linked block ring ("Ouroboros" ledger).

The live window holds at most ``B = ceil(b * S)`` sealed blocks.  Sealing one
more evicts the oldest live block to the archive, so the chain rolls over
like a ring while every sealed block stays verifiable.

Canonical byte encoding (all integers big-endian)::

    record = u32 kind | u32 len | bcadd utf-8 | u64 label_assigned | u64 timestamp
             | self-claim:       u32 side | u32 len | digits (u8 each) | u32 interface
             | routing request:  u32 len | dst_bcadd utf-8
    block  = 32B prev_hash | u32 tier | u64 index | u64 timestamp | u32 count
             | count x (u32 len | record)

The block hash is the digest of the block bytes above.  The serialized form
used for storage and inspection is ``32B hash | block bytes``.
"""

from __future__ import annotations

import hashlib
import math
import struct
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Iterator, NamedTuple

from .topology import VertexId, total_length

DIGEST = "sha256"
ZERO_HASH = bytes(32)


class LedgerError(ValueError):
    pass


def digest(data: bytes) -> bytes:
    return hashlib.new(DIGEST, data).digest()


def capacity(t: int, b: int, r: int) -> tuple[int, int]:
    """Ring capacity ``(B, R)`` with ``B = ceil(b * S)`` and ``R = r * B``."""
    if t < 0 or b <= 0 or r <= 0:
        raise LedgerError(f"capacity needs t >= 0 and positive b, r (got {t}, {b}, {r})")
    blocks = math.ceil(b * total_length(t))
    return blocks, r * blocks


def kept_segments(tier: int, t_max: int, s_keep: int = 1) -> int:
    """Segments retained by a node of ``tier``; lower tiers keep more."""
    if not 0 <= tier <= t_max:
        raise LedgerError(f"tier {tier} outside [0, {t_max}]")
    return s_keep * (t_max - tier + 1)


class RecordKind(IntEnum):
    SELF_CLAIM = 0
    ROUTING_REQUEST = 1


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise LedgerError("truncated encoding")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())

    def text(self) -> str:
        try:
            return self.blob().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LedgerError("invalid utf-8 in encoding") from exc

    def done(self):
        if self.pos != len(self.buf):
            raise LedgerError("trailing bytes in encoding")


def _blob(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


@dataclass(frozen=True)
class SnowedRecord:
    kind: RecordKind
    bcadd: str
    label_assigned: int
    timestamp: int
    label: VertexId | None = None
    interface: int | None = None
    dst_bcadd: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RecordKind(self.kind))
        if not self.bcadd:
            raise LedgerError("record without bcadd")
        if not 0 <= self.label_assigned < 2**64 or not 0 <= self.timestamp < 2**64:
            raise LedgerError("label_assigned and timestamp must fit in u64")
        if self.kind is RecordKind.SELF_CLAIM:
            if self.label is None or self.interface is None or self.dst_bcadd is not None:
                raise LedgerError("self-claim needs label and interface only")
            if not 0 <= self.interface < 2**32:
                raise LedgerError("interface must fit in u32")
        else:
            if self.dst_bcadd is None or self.label is not None or self.interface is not None:
                raise LedgerError("routing request needs dst_bcadd only")
            if not self.dst_bcadd:
                raise LedgerError("empty dst_bcadd")

    @classmethod
    def self_claim(cls, bcadd, label, interface, label_assigned=0, timestamp=0):
        return cls(RecordKind.SELF_CLAIM, bcadd, label_assigned, timestamp, label=label, interface=interface)

    @classmethod
    def routing_request(cls, bcadd, dst_bcadd, label_assigned=0, timestamp=0):
        return cls(RecordKind.ROUTING_REQUEST, bcadd, label_assigned, timestamp, dst_bcadd=dst_bcadd)

    def encode(self) -> bytes:
        out = struct.pack(">I", self.kind) + _blob(self.bcadd.encode())
        out += struct.pack(">QQ", self.label_assigned, self.timestamp)
        if self.kind is RecordKind.SELF_CLAIM:
            out += struct.pack(">I", self.label.side) + _blob(bytes(self.label.digits))
            out += struct.pack(">I", self.interface)
        else:
            out += _blob(self.dst_bcadd.encode())
        return out

    @classmethod
    def decode(cls, buf: bytes) -> "SnowedRecord":
        rd = _Reader(buf)
        rec = cls._read(rd)
        rd.done()
        return rec

    @classmethod
    def _read(cls, rd: _Reader) -> "SnowedRecord":
        kind = rd.u32()
        if kind not in (0, 1):
            raise LedgerError(f"unknown record kind {kind}")
        bcadd = rd.text()
        label_assigned, timestamp = rd.u64(), rd.u64()
        try:
            if kind == RecordKind.SELF_CLAIM:
                side = rd.u32()
                label = VertexId(side, tuple(rd.blob()))
                return cls.self_claim(bcadd, label, rd.u32(), label_assigned, timestamp)
            return cls.routing_request(bcadd, rd.text(), label_assigned, timestamp)
        except ValueError as exc:
            raise LedgerError(f"malformed record: {exc}") from exc

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind.name.lower(),
            "bcadd": self.bcadd,
            "label_assigned": self.label_assigned,
            "timestamp": self.timestamp,
        }
        if self.kind is RecordKind.SELF_CLAIM:
            d["label"] = str(self.label)
            d["interface"] = self.interface
        else:
            d["dst_bcadd"] = self.dst_bcadd
        return d


class BlockHeight(NamedTuple):
    tier: int
    index: int


class RecordRef(NamedTuple):
    """Record coordinates: block height and offset, plus the block sequence number."""

    height: BlockHeight
    offset: int
    seq: int


@dataclass(frozen=True)
class SnowedBlock:
    height: BlockHeight
    prev_hash: bytes
    records: tuple[SnowedRecord, ...]
    timestamp: int
    hash: bytes = field(default=b"")

    def __post_init__(self):
        object.__setattr__(self, "height", BlockHeight(*self.height))
        object.__setattr__(self, "records", tuple(self.records))
        if not self.hash:
            object.__setattr__(self, "hash", self.compute_hash())

    def body(self) -> bytes:
        out = self.prev_hash + struct.pack(">IQQI", self.height.tier, self.height.index, self.timestamp, len(self.records))
        return out + b"".join(_blob(r.encode()) for r in self.records)

    def compute_hash(self) -> bytes:
        return digest(self.body())

    def verify_hash(self) -> bool:
        return bool(self.records) and len(self.prev_hash) == 32 and self.compute_hash() == self.hash

    def encode(self) -> bytes:
        return self.hash + self.body()

    @classmethod
    def decode(cls, buf: bytes) -> "SnowedBlock":
        rd = _Reader(buf)
        stored = rd.take(32)
        prev = rd.take(32)
        tier, index, ts, count = rd.u32(), rd.u64(), rd.u64(), rd.u32()
        records = []
        for _ in range(count):
            sub = _Reader(rd.blob())
            records.append(SnowedRecord._read(sub))
            sub.done()
        rd.done()
        return cls(BlockHeight(tier, index), prev, tuple(records), ts, stored)

    def to_dict(self) -> dict:
        return {
            "height": list(self.height),
            "prev_hash": self.prev_hash.hex(),
            "hash": self.hash.hex(),
            "timestamp": self.timestamp,
            "records": [r.to_dict() for r in self.records],
        }


class RingLedger:
    """Single-writer block ring with archive.

    ``t``, ``b`` and ``r`` fix the capacity through :func:`capacity`; ``tier``
    is the tier whose chain this is and, together with ``t_max`` and
    ``s_keep``, bounds the height index.
    """

    def __init__(self, t: int, b: int, r: int, *, tier: int = 0, t_max: int | None = None, s_keep: int = 1):
        self.t, self.b, self.r = t, b, r
        self.tier = tier
        self.t_max = t if t_max is None else t_max
        self.s_keep = s_keep
        self.capacity_blocks, self.max_records = capacity(t, b, r)
        self.max_height = kept_segments(tier, self.t_max, s_keep) * b
        self.archive: list[SnowedBlock] = []
        self.live: deque[SnowedBlock] = deque()
        self.open_records: list[SnowedRecord] = []
        self.version = 0
        self.max_live_seen = 0
        self._claims: dict[str, RecordRef] = {}
        self._assigned: dict[tuple[VertexId, int], RecordRef] = {}

    # -- bookkeeping ----------------------------------------------------

    @property
    def sealed_count(self) -> int:
        return len(self.archive) + len(self.live)

    @property
    def live_start(self) -> int:
        return len(self.archive)

    @property
    def epoch_counter(self) -> int:
        """Completed rollovers of the ring."""
        return len(self.archive) // self.capacity_blocks

    @property
    def head_hash(self) -> bytes:
        if self.live:
            return self.live[-1].hash
        return self.archive[-1].hash if self.archive else ZERO_HASH

    def _height(self, seq: int) -> BlockHeight:
        return BlockHeight(self.tier, seq % self.max_height)

    def block(self, seq: int) -> SnowedBlock:
        if not 0 <= seq < self.sealed_count:
            raise LedgerError(f"block {seq} out of range [0, {self.sealed_count})")
        if seq < self.live_start:
            return self.archive[seq]
        return self.live[seq - self.live_start]

    def _set_block(self, seq: int, blk: SnowedBlock):
        # test hook for corruption fuzzing
        if seq < self.live_start:
            self.archive[seq] = blk
        else:
            self.live[seq - self.live_start] = blk

    def is_live(self, ref: RecordRef) -> bool:
        if ref.seq == self.sealed_count:
            return ref.offset < len(self.open_records)
        return self.live_start <= ref.seq < self.sealed_count and ref.offset < len(self.live[ref.seq - self.live_start].records)

    def record_at(self, ref: RecordRef) -> SnowedRecord:
        if ref.seq == self.sealed_count:
            return self.open_records[ref.offset]
        return self.block(ref.seq).records[ref.offset]

    def live_claims(self) -> Iterator[tuple[str, RecordRef, SnowedRecord]]:
        """Current self-claim per bcadd (later claims supersede earlier ones)."""
        for bcadd, ref in self._claims.items():
            yield bcadd, ref, self.record_at(ref)

    def current_claim(self, bcadd: str) -> RecordRef | None:
        return self._claims.get(bcadd)

    # -- writes ---------------------------------------------------------

    def append_record(self, rec: SnowedRecord) -> RecordRef:
        if not isinstance(rec, SnowedRecord):
            raise LedgerError(f"not a record: {rec!r}")
        if rec.kind is RecordKind.SELF_CLAIM:
            prior = self._assigned.get((rec.label, rec.label_assigned))
            if prior is not None and self.is_live(prior):
                raise LedgerError(f"label {rec.label_assigned} already assigned by {rec.label} in the live window")
        if len(self.open_records) >= self.r:
            self.seal_block()
        seq = self.sealed_count
        ref = RecordRef(self._height(seq), len(self.open_records), seq)
        self.open_records.append(rec)
        if rec.kind is RecordKind.SELF_CLAIM:
            self._claims[rec.bcadd] = ref
            self._assigned[(rec.label, rec.label_assigned)] = ref
        self.version += 1
        return ref

    def seal_block(self, timestamp: int | None = None) -> SnowedBlock:
        if not self.open_records:
            raise LedgerError("cannot seal an empty block")
        if timestamp is None:
            timestamp = max(r.timestamp for r in self.open_records)
        seq = self.sealed_count
        blk = SnowedBlock(self._height(seq), self.head_hash, tuple(self.open_records), timestamp)
        self.live.append(blk)
        self.open_records = []
        while len(self.live) > self.capacity_blocks:
            self._evict()
        self.max_live_seen = max(self.max_live_seen, len(self.live))
        self.version += 1
        return blk

    def _evict(self):
        seq = self.live_start
        old = self.live.popleft()
        self.archive.append(old)
        for rec in old.records:
            if rec.kind is not RecordKind.SELF_CLAIM:
                continue
            if (ref := self._claims.get(rec.bcadd)) is not None and ref.seq == seq:
                del self._claims[rec.bcadd]
            key = (rec.label, rec.label_assigned)
            if (ref := self._assigned.get(key)) is not None and ref.seq == seq:
                del self._assigned[key]

    # -- verification ---------------------------------------------------

    def verify_chain(self, start: int | None = None, stop: int | None = None) -> bool:
        """Check hashes and links of sealed blocks ``[start, stop)``.

        Only blocks ``start - 1 .. stop - 1`` are read.
        """
        start = 0 if start is None else start
        stop = self.sealed_count if stop is None else stop
        if not 0 <= start <= stop <= self.sealed_count:
            raise LedgerError(f"range [{start}, {stop}) outside [0, {self.sealed_count})")
        prev = self.block(start - 1).hash if start > 0 else ZERO_HASH
        for seq in range(start, stop):
            blk = self.block(seq)
            if not blk.verify_hash() or blk.prev_hash != prev:
                return False
            if blk.height != self._height(seq) or len(blk.records) > self.r:
                return False
            prev = blk.hash
        return True

    def segments(self) -> list[tuple[int, list[SnowedBlock]]]:
        """Live blocks grouped into segments of ``b`` blocks (by sequence number)."""
        out: list[tuple[int, list[SnowedBlock]]] = []
        for i, blk in enumerate(self.live):
            sid = (self.live_start + i) // self.b
            if not out or out[-1][0] != sid:
                out.append((sid, []))
            out[-1][1].append(blk)
        return out

    def replica_digest(self, n_segments: int) -> bytes | None:
        """Digest of the last ``n_segments`` segments plus the open block.

        Returns None when fewer segments are held.
        """
        segs = self.segments()
        if self.open_records:
            sid = self.sealed_count // self.b
            if not segs or segs[-1][0] != sid:
                segs.append((sid, []))
        if len(segs) < n_segments:
            return None
        h = hashlib.new(DIGEST)
        for sid, blocks in segs[len(segs) - n_segments :]:
            h.update(struct.pack(">QI", sid, len(blocks)))
            for blk in blocks:
                h.update(blk.hash)
        for rec in self.open_records:
            h.update(_blob(rec.encode()))
        return h.digest()

    def stats(self) -> dict:
        return {
            "capacity_blocks": self.capacity_blocks,
            "max_records": self.max_records,
            "sealed": self.sealed_count,
            "live": len(self.live),
            "archived": len(self.archive),
            "max_live_seen": self.max_live_seen,
            "epoch_counter": self.epoch_counter,
            "open_records": len(self.open_records),
        }


@dataclass
class Shard:
    """Contention group of same-tier nodes replicating the recent segments."""

    tier: int
    members: frozenset[VertexId]
    kept_segments: int
    digests: dict[VertexId, bytes | None] = field(default_factory=dict)


def shard_sync_check(shard: Shard, ledgers: dict[VertexId, RingLedger]) -> bool:
    """True iff every member holds identical last ``kept_segments`` segments.

    A member with a shorter history counts as out of sync.
    """
    if not shard.members:
        raise LedgerError("shard without members")
    shard.digests = {m: ledgers[m].replica_digest(shard.kept_segments) for m in sorted(shard.members)}
    values = list(shard.digests.values())
    return values[0] is not None and all(v == values[0] for v in values)


def exact_capacity(t: int, b: int, r: int) -> tuple[Fraction, int, int]:
    """``(S, B, R)`` as exact quantities; convenience for reports."""
    blocks, records = capacity(t, b, r)
    return total_length(t), blocks, records
