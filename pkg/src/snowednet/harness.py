"""Scenario runner tying topology, ledger, consensus, routing and identity together.

A scenario is a strict JSON document; ``run`` executes it deterministically
and returns a report whose every number comes from a module operation.
Outputs (``write_outputs``): ``report.json``, ``metrics/*.csv``,
``transcript.jsonl`` and ``ledger.jsonl``.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from . import __version__
from .consensus import (
    ElectionConfig,
    LinkStatus,
    NoEligible,
    RouterState,
    elect_leader,
    heartbeat,
    measure_perf,
    passes_threshold,
    reassign_tiers,
)
from .identity import addr_hash, keygen, run_workflow, setup, workflow_passed
from .ledger import DIGEST, RingLedger, Shard, SnowedRecord, capacity, kept_segments, shard_sync_check
from .routing import SwitchTable, routing_study, study_csv
from .topology import TopoParams, TopologyError, VertexId, generate, node_count, total_length

REFERENCE_SCENARIO = {
    "name": "reference",
    "seed": 2024,
    "rounds": 12,
    "topo": {"dimension": 2, "tiers": 2, "unit_side": "1"},
    "ledger": {"b": 4, "r": 8, "s_keep": 1},
    "consensus": {
        "perf_threshold": {"0": 8, "1": 8, "2": 8},
        "rounds_per_epoch": 4,
        "entities_per_router": 1,
        "reclaim_probability": 0.25,
        "requests_per_round": 6,
        "link_failures": {"5": [["0.1", "0.2"], ["1", "2"]], "6": [["0.1", "0.2"]]},
    },
    "identity": {"params": "desk"},
    "routing_study": {"sample": 2000},
}

_EDGE = {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["topo", "ledger", "consensus"],
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "rounds": {"type": "integer", "minimum": 0},
        "outputs": {"type": "string"},
        "topo": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dimension", "tiers"],
            "properties": {
                "dimension": {"type": "integer", "minimum": 1},
                "tiers": {"type": "integer", "minimum": 0},
                "unit_side": {"type": ["string", "integer"]},
            },
        },
        "ledger": {
            "type": "object",
            "additionalProperties": False,
            "required": ["b", "r"],
            "properties": {
                "b": {"type": "integer", "minimum": 1},
                "r": {"type": "integer", "minimum": 1},
                "s_keep": {"type": "integer", "minimum": 1},
            },
        },
        "consensus": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "perf_threshold": {
                    "type": "object",
                    "patternProperties": {"^[0-9]+$": {"type": "number", "exclusiveMinimum": 0}},
                    "additionalProperties": False,
                },
                "rounds_per_epoch": {"type": "integer", "minimum": 1},
                "entities_per_router": {"type": "integer", "minimum": 0},
                "reclaim_probability": {"type": "number", "minimum": 0, "maximum": 1},
                "requests_per_round": {"type": "integer", "minimum": 0},
                "link_failures": {
                    "type": "object",
                    "patternProperties": {"^[0-9]+$": {"type": "array", "items": _EDGE}},
                    "additionalProperties": False,
                },
            },
        },
        "identity": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"params": {"enum": ["toy", "desk", "full", "none"]}},
        },
        "routing_study": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"sample": {"type": ["integer", "null"], "minimum": 1}},
        },
    },
}


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    seed: int
    rounds: int
    topo: TopoParams
    b: int
    r: int
    s_keep: int
    election: ElectionConfig
    entities_per_router: int
    reclaim_probability: float
    requests_per_round: int
    link_failures: dict[int, list[tuple[VertexId, VertexId]]]
    identity_params: str
    study_sample: int | None
    outputs: str
    raw: dict = field(repr=False)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_scenario(doc: dict | str, *, seed=None, rounds=None, toy=False, outputs=None) -> Scenario:
    """Validate a scenario document (dict or JSON text) and apply CLI overrides."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    doc = copy.deepcopy(doc)
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioError(f"field {where}: {err.message}")
    if seed is not None:
        doc["seed"] = seed
    if rounds is not None:
        doc["rounds"] = rounds
    if toy:
        doc.setdefault("identity", {})["params"] = "toy"
    if outputs is not None:
        doc["outputs"] = outputs

    t = doc["topo"]
    try:
        topo = TopoParams(t["dimension"], t["tiers"], t.get("unit_side", 1))
    except (TopologyError, ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(f"field topo: {exc}") from None
    c = doc["consensus"]
    try:
        election = ElectionConfig(
            rng_seed=doc.get("seed", 0),
            perf_threshold={int(k): v for k, v in c.get("perf_threshold", {}).items()},
            rounds_per_epoch=c.get("rounds_per_epoch", 1),
        )
    except ValueError as exc:
        raise ScenarioError(f"field consensus: {exc}") from None
    failures = {}
    graph = None
    for rnd, edges in c.get("link_failures", {}).items():
        parsed = []
        for i, (a, b) in enumerate(edges):
            where = f"consensus.link_failures.{rnd}.{i}"
            try:
                u, v = VertexId.parse(a), VertexId.parse(b)
            except TopologyError as exc:
                raise ScenarioError(f"field {where}: {exc}") from None
            graph = graph or generate(topo)
            if u not in graph or v not in graph or not graph.adjacent(graph.index(u), graph.index(v)):
                raise ScenarioError(f"field {where}: {a}-{b} is not an edge of the topology")
            parsed.append((u, v))
        failures[int(rnd)] = parsed
    return Scenario(
        name=doc.get("name", "scenario"),
        seed=doc.get("seed", 0),
        rounds=doc.get("rounds", 1),
        topo=topo,
        b=doc["ledger"]["b"],
        r=doc["ledger"]["r"],
        s_keep=doc["ledger"].get("s_keep", 1),
        election=election,
        entities_per_router=c.get("entities_per_router", 1),
        reclaim_probability=c.get("reclaim_probability", 0.0),
        requests_per_round=c.get("requests_per_round", 0),
        link_failures=failures,
        identity_params=doc.get("identity", {}).get("params", "desk"),
        study_sample=doc.get("routing_study", {}).get("sample"),
        outputs=doc.get("outputs", "out"),
        raw=doc,
    )


def load_scenario(path, **overrides) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text, **overrides)


@dataclass
class RunResult:
    report: dict
    rounds_rows: list[dict]
    score_rows: list[dict]
    study_csv: str
    transcript: list[dict]
    ledger: RingLedger
    timing: dict

    @property
    def passed(self) -> bool:
        return self.report["all_passed"]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def run(scenario: Scenario) -> RunResult:
    clock = time.perf_counter()
    timing = {}
    sc = scenario
    topo = generate(sc.topo)
    t = sc.topo.tiers
    checks: dict[str, bool] = {}

    # formula checks
    formula = {"N_expected": node_count(t) if sc.topo.dimension == 2 else sc.topo.dimension + 1, "N_actual": topo.node_count}
    checks["formula_N"] = formula["N_expected"] == formula["N_actual"]
    if sc.topo.dimension == 2:
        s_expected = total_length(t) * sc.topo.unit_side
        perimeter = topo.perimeter()
        formula.update(S_expected=str(s_expected), S_perimeter=_fmt(perimeter))
        checks["formula_S"] = abs(perimeter - float(s_expected)) <= 1e-9 * max(1.0, float(s_expected))
    cap_b, cap_r = capacity(t, sc.b, sc.r)
    ledger = RingLedger(t, sc.b, sc.r, tier=0, t_max=t, s_keep=sc.s_keep)
    formula.update(B_expected=cap_b, B_actual=ledger.capacity_blocks, R_expected=cap_r, R_actual=ledger.max_records)
    checks["formula_B_R"] = (cap_b, cap_r) == (ledger.capacity_blocks, ledger.max_records)

    # entities and routers
    rng = random.Random(sc.seed)
    id_level = "desk" if sc.identity_params == "none" else sc.identity_params
    group = setup(id_level, seed=sc.seed)
    key_rng = random.Random(sc.seed ^ 0x5EED)
    states = [RouterState(lab, lab.birth_tier if t else 0, SwitchTable(lab, ledger)) for lab in topo.labels]
    entities: list[tuple[str, VertexId, int]] = []
    for st in states:
        for port in range(1, sc.entities_per_router + 1):
            entities.append((addr_hash(group, keygen(group, key_rng).public), st.node, port))
    counters = {st.node: 0 for st in states}
    ops: list[tuple] = []

    def append(rec):
        ledger.append_record(rec)
        ops.append(("append", rec))

    def claim(bcadd, label, port, tick):
        counters[label] += 1
        append(SnowedRecord.self_claim(bcadd, label, port, counters[label], tick))

    rounds_rows, score_rows = [], []
    win_counts: dict[int, dict[str, int]] = {k: {} for k in range(t + 1)}
    hop_violations = 0
    heartbeat_probes = 0
    total_swaps = total_demotions = 0
    for rnd in range(sc.rounds):
        tick = rnd + 1
        for bcadd, label, port in entities:
            if rnd == 0 or rng.random() < sc.reclaim_probability:
                claim(bcadd, label, port, tick)
        for _ in range(sc.requests_per_round if entities else 0):
            src, dst = rng.choice(entities), rng.choice(entities)
            counters[src[1]] += 1
            append(SnowedRecord.routing_request(src[0], dst[0], counters[src[1]], tick))

        status = LinkStatus.down(sc.link_failures.get(rnd, ()))
        total_score = 0
        for st in states:
            rep = heartbeat(topo, st, status)
            heartbeat_probes += len(rep.neighbor_hops) + len(rep.remote_hops) + len(rep.entity_hops)
            hop_violations += sum(h > 1 for h in rep.neighbor_hops.values())
            hop_violations += sum(h > 2 * t for h in rep.remote_hops.values())
            hop_violations += sum(h > 1 for h in rep.entity_hops.values())
            st.route_score = rep.total_length
            st.perf_sample = measure_perf(st)
            total_score += rep.total_length
        score_rows.append({"round": rnd, "total_route_score": total_score, "links_down": len(status.down_edges)})

        winners = {}
        for tier in range(t + 1):
            members = [s for s in states if s.tier == tier]
            failures = sum(not passes_threshold(s, sc.election) for s in members)
            try:
                w = elect_leader(states, sc.election, tier, rnd)
            except NoEligible:
                w = None
            if w is not None:
                winners[tier] = w
                win_counts[tier][str(w)] = win_counts[tier].get(str(w), 0) + 1
            rounds_rows.append(
                {
                    "round": rnd,
                    "tier": tier,
                    "winner": "" if w is None else str(w),
                    "winner_score": "" if w is None else next(s.route_score for s in states if s.node == w),
                    "tier_score": sum(s.route_score for s in members),
                    "members": len(members),
                    "swaps": 0,
                    "threshold_failures": failures,
                }
            )
        # the tier-0 leader seals the next block of the shared chain
        if 0 in winners and ledger.open_records:
            ledger.seal_block(tick)
            ops.append(("seal", tick))
        result = reassign_tiers(states, winners, sc.election, t)
        states = result.states
        for w, _, from_tier, _ in result.swaps:
            for row in rounds_rows[-(t + 1) :]:
                if row["tier"] == from_tier:
                    row["swaps"] += 1
        total_swaps += len(result.swaps)
        total_demotions += len(result.demotions)
    timing["simulation_s"] = time.perf_counter() - clock
    checks["heartbeat_hop_bounds"] = hop_violations == 0
    checks["tier_conservation"] = sorted(s.node for s in states) == sorted(topo.labels) and all(
        0 <= s.tier <= t for s in states
    )

    # ledger
    live_ok = ledger.verify_chain(ledger.live_start, ledger.sealed_count)
    archive_ok = ledger.verify_chain(0, ledger.live_start)
    stats = ledger.stats()
    checks["ledger_ring_bound"] = ledger.max_live_seen <= ledger.capacity_blocks
    checks["ledger_conservation"] = stats["sealed"] == sum(op[0] == "seal" for op in ops) + _auto_seals(ops, sc.r)
    checks["ledger_verify_live"] = live_ok
    checks["ledger_verify_archive"] = archive_ok

    # shards: every tier replays the op log into replica ledgers and compares
    shard_rows = {}
    for tier in range(t + 1):
        members = sorted(s.node for s in states if s.tier == tier)[:2]
        if not members:
            continue
        keep = min(kept_segments(tier, t, sc.s_keep), max(1, len(ledger.segments())))
        replicas = {m: _replay(ops, t, sc.b, sc.r, sc.s_keep) for m in members}
        shard = Shard(tier, frozenset(members), keep)
        in_sync = shard_sync_check(shard, replicas) and (
            replicas[members[0]].replica_digest(keep) == ledger.replica_digest(keep)
        )
        shard_rows[str(tier)] = {"kept_segments": keep, "replicas": len(members), "in_sync": in_sync}
    checks["shard_sync"] = all(v["in_sync"] for v in shard_rows.values())

    # routing study
    clock = time.perf_counter()
    sample = None if t <= 3 and sc.study_sample is None else sc.study_sample
    if t <= 3 and topo.node_count ** 2 <= 40000:
        sample = None
    study = routing_study(topo, sample=sample, seed=sc.seed)
    timing["routing_study_s"] = time.perf_counter() - clock
    checks["routing_oracle"] = study.ok

    # identity workflow
    transcript = []
    if sc.identity_params != "none":
        clock = time.perf_counter()
        transcript = run_workflow(group, random.Random(sc.seed))
        timing["identity_s"] = time.perf_counter() - clock
        checks["identity_workflow"] = workflow_passed(transcript)

    report = {
        "version": __version__,
        "scenario": sc.name,
        "seed": sc.seed,
        "digest_algorithm": DIGEST,
        "config_hash": sc.config_hash,
        "formula_checks": formula,
        "routing": {
            "tier": study.tier,
            "pairs": study.pairs,
            "exhaustive": study.exhaustive,
            "mean_stretch": _fmt(study.mean_stretch),
            "max_stretch": _fmt(study.max_stretch),
            "max_hops": study.max_hops,
            "hop_bound": study.hop_bound,
            "bfs_diameter": study.bfs_diameter,
            "claim_2t_satisfied": study.claim_2t_satisfied,
            "claim_2t_with_leaf_hops": study.claim_2t_with_leaf_hops,
            "diameter_witness": study.diameter_witness,
        },
        "elections": {str(k): dict(sorted(v.items())) for k, v in win_counts.items()},
        "consensus": {
            "rounds": sc.rounds,
            "heartbeat_probes": heartbeat_probes,
            "hop_violations": hop_violations,
            "swaps": total_swaps,
            "demotions": total_demotions,
            "route_score_by_round": [row["total_route_score"] for row in score_rows],
            "final_tier_sizes": {str(k): sum(s.tier == k for s in states) for k in range(t + 1)},
        },
        "ledger": {**stats, "verify_live": live_ok, "verify_archive": archive_ok, "shards": shard_rows},
        "identity": {
            "params": sc.identity_params,
            "workflow_passed": checks.get("identity_workflow"),
        },
        "checks": checks,
        "all_passed": all(checks.values()),
    }
    return RunResult(report, rounds_rows, score_rows, study_csv([study]), transcript, ledger, timing)


def _auto_seals(ops, r: int) -> int:
    # blocks sealed implicitly when an append finds the open block full
    n = sealed = 0
    for op in ops:
        if op[0] == "seal":
            n = 0
        else:
            if n == r:
                sealed += 1
                n = 0
            n += 1
    return sealed


def _replay(ops, t, b, r, s_keep) -> RingLedger:
    led = RingLedger(t, b, r, tier=0, t_max=t, s_keep=s_keep)
    for op in ops:
        if op[0] == "append":
            led.append_record(op[1])
        else:
            led.seal_block(op[1])
    return led


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def ledger_lines(ledger: RingLedger) -> list[str]:
    lines = []
    for seq in range(ledger.sealed_count):
        blk = ledger.block(seq)
        window = "archive" if seq < ledger.live_start else "live"
        entry = {"seq": seq, "window": window, "block": blk.to_dict(), "raw": blk.encode().hex()}
        lines.append(json.dumps(entry, sort_keys=True))
    return lines


def output_dir(default) -> Path:
    return Path(os.environ.get("SNOWEDNET_OUT") or default)


def write_outputs(result: RunResult, out: Path, timing: bool = False) -> Path:
    out = Path(out)
    (out / "metrics").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(result.report, indent=2, sort_keys=True) + "\n")
    (out / "metrics" / "rounds.csv").write_text(_csv(result.rounds_rows))
    (out / "metrics" / "route_scores.csv").write_text(_csv(result.score_rows))
    (out / "metrics" / "stretch.csv").write_text(result.study_csv)
    (out / "transcript.jsonl").write_text("".join(json.dumps(s, sort_keys=True) + "\n" for s in result.transcript))
    (out / "ledger.jsonl").write_text("".join(line + "\n" for line in ledger_lines(result.ledger)))
    if timing:
        (out / "timing.json").write_text(json.dumps({k: round(v, 3) for k, v in result.timing.items()}, indent=2) + "\n")
    return out


def election_frequencies(scores: list[int], rounds: int, seed: int) -> list[float]:
    """Empirical winner frequencies for a single tier with fixed ``scores``."""
    table = SwitchTable(None, RingLedger(0, 1, 1))
    states = [RouterState(VertexId(i), 0, table, route_score=s, perf_sample=1) for i, s in enumerate(scores)]
    cfg = ElectionConfig(rng_seed=seed)
    counts = [0] * len(scores)
    for rnd in range(rounds):
        counts[elect_leader(states, cfg, 0, rnd).side] += 1
    return [c / rounds for c in counts]


__all__ = [
    "REFERENCE_SCENARIO",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "election_frequencies",
    "load_scenario",
    "parse_scenario",
    "run",
    "write_outputs",
]
