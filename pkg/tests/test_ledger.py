import random
import struct

import pytest
from hypothesis import given, settings, strategies as st

from snowednet.ledger import (
    ZERO_HASH,
    LedgerError,
    RecordKind,
    RingLedger,
    Shard,
    SnowedBlock,
    SnowedRecord,
    capacity,
    kept_segments,
    shard_sync_check,
)
from snowednet.topology import VertexId


def capacity_oracle(t, b, r):
    # integer-only ceiling of b * 3 * 4^t / 3^t
    blocks = -(-(b * 3 * 4**t) // 3**t)
    return blocks, r * blocks


def test_capacity_reference_point():
    assert capacity(1, 10, 100) == (40, 4000)
    assert capacity(0, 1, 1) == (3, 3)


@settings(max_examples=200)
@given(st.integers(0, 8), st.integers(1, 10**6), st.integers(1, 10**6))
def test_capacity_matches_oracle(t, b, r):
    assert capacity(t, b, r) == capacity_oracle(t, b, r)


def test_kept_segments_decrease_with_tier():
    assert [kept_segments(k, 3, 2) for k in range(4)] == [8, 6, 4, 2]


labels = st.builds(
    VertexId, st.integers(0, 2), st.lists(st.integers(0, 3), max_size=5).map(lambda d: tuple(d) + (1,) if d else ())
)
bcadds = st.text("abcdefghijklmnopqrstuvwxyz234567", min_size=1, max_size=32)
records = st.one_of(
    st.builds(SnowedRecord.self_claim, bcadds, labels, st.integers(0, 2**32 - 1), st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1)),
    st.builds(SnowedRecord.routing_request, bcadds, bcadds, st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1)),
)


@settings(max_examples=300)
@given(records)
def test_record_roundtrip(rec):
    assert SnowedRecord.decode(rec.encode()) == rec


@settings(max_examples=100)
@given(st.lists(records, min_size=1, max_size=6), st.integers(0, 2**32 - 1), st.integers(0, 2**64 - 1))
def test_block_roundtrip(recs, index, ts):
    blk = SnowedBlock((1, index), ZERO_HASH, tuple(recs), ts)
    again = SnowedBlock.decode(blk.encode())
    assert again == blk and again.verify_hash()


def test_block_encoding_layout():
    rec = SnowedRecord.routing_request("ab", "cd", 7, 9)
    blk = SnowedBlock((2, 5), ZERO_HASH, (rec,), 11)
    raw = blk.encode()
    assert raw[:32] == blk.hash and raw[32:64] == ZERO_HASH
    assert struct.unpack(">IQQI", raw[64:88]) == (2, 5, 11, 1)
    assert struct.unpack(">I", raw[88:92])[0] == len(rec.encode())


def test_record_validation():
    with pytest.raises(LedgerError):
        SnowedRecord(RecordKind.SELF_CLAIM, "a", 0, 0)
    with pytest.raises(LedgerError):
        SnowedRecord.routing_request("a", "", 0)
    with pytest.raises(LedgerError):
        SnowedRecord.self_claim("", VertexId(0), 1)
    with pytest.raises(LedgerError):
        SnowedRecord.decode(SnowedRecord.routing_request("a", "b").encode() + b"\x00")


def fill(ledger, n, seed=0):
    rng = random.Random(seed)
    for i in range(n):
        if rng.random() < 0.5:
            ledger.append_record(SnowedRecord.self_claim(f"e{rng.randrange(500)}", VertexId(i % 3), 1, i, i))
        else:
            ledger.append_record(SnowedRecord.routing_request(f"e{i}", f"e{i + 1}", i, i))


def test_ring_bound_and_fifo():
    ledger = RingLedger(1, 10, 4)
    assert ledger.capacity_blocks == 40
    evicted = []
    for i in range(2000):
        before = ledger.live_start
        ledger.append_record(SnowedRecord.routing_request(f"a{i}", "b", i, i))
        assert len(ledger.live) <= 40
        if ledger.live_start != before:
            evicted.append(before)
    assert evicted == list(range(len(evicted)))
    assert ledger.sealed_count == len(ledger.archive) + len(ledger.live)
    assert ledger.epoch_counter == len(ledger.archive) // 40
    assert ledger.verify_chain(0, ledger.live_start) and ledger.verify_chain(ledger.live_start)


def test_verify_detects_tamper_and_relink():
    ledger = RingLedger(0, 2, 3)
    fill(ledger, 60)
    seq = ledger.live_start + 1
    blk = ledger.block(seq)
    forged = SnowedBlock(blk.height, blk.prev_hash, blk.records[:-1], blk.timestamp)
    ledger._set_block(seq, forged)
    assert not ledger.verify_chain(seq, seq + 2)
    assert ledger.verify_chain(ledger.live_start, seq)


def test_label_assignment_unique_in_live_window():
    ledger = RingLedger(0, 1, 2)
    v = VertexId(1)
    ledger.append_record(SnowedRecord.self_claim("x", v, 1, 5))
    with pytest.raises(LedgerError):
        ledger.append_record(SnowedRecord.self_claim("y", v, 2, 5))
    ledger.append_record(SnowedRecord.self_claim("y", VertexId(2), 2, 5))
    for i in range(10):
        ledger.append_record(SnowedRecord.routing_request("p", "q", i))
    # the old assignment was evicted, so the label may be reused
    ledger.append_record(SnowedRecord.self_claim("y", v, 2, 5))


def test_latest_claim_wins_and_eviction_rescinds():
    ledger = RingLedger(0, 1, 1)
    ledger.append_record(SnowedRecord.self_claim("x", VertexId(0), 1, 1))
    ref = ledger.append_record(SnowedRecord.self_claim("x", VertexId(1), 1, 2))
    assert ledger.current_claim("x") == ref
    assert ledger.record_at(ref).label == VertexId(1)
    for i in range(5):
        ledger.append_record(SnowedRecord.routing_request("p", "q", i))
    assert ledger.current_claim("x") is None
    assert not ledger.is_live(ref)


def test_seal_empty_rejected():
    with pytest.raises(LedgerError):
        RingLedger(0, 1, 1).seal_block()


def test_shard_sync():
    a, b = RingLedger(1, 3, 4), RingLedger(1, 3, 4)
    fill(a, 300, seed=4)
    fill(b, 300, seed=4)
    shard = Shard(0, frozenset({VertexId(0), VertexId(1)}), 2)
    ledgers = {VertexId(0): a, VertexId(1): b}
    assert shard_sync_check(shard, ledgers)
    b.append_record(SnowedRecord.routing_request("z", "y", 1))
    assert not shard_sync_check(shard, ledgers)
    short = RingLedger(1, 3, 4)
    fill(short, 5)
    assert not shard_sync_check(Shard(0, frozenset({VertexId(0)}), 3), {VertexId(0): short})
