import copy
import json
import subprocess
import sys
from pathlib import Path

import pytest

from snowednet import harness
from snowednet.cli import main

ROOT = Path(__file__).resolve().parents[1]
SCEN = ROOT / "scenarios"


def small(**changes):
    doc = copy.deepcopy(harness.REFERENCE_SCENARIO)
    doc.update(rounds=4, identity={"params": "toy"}, routing_study={"sample": 300})
    doc.update(changes)
    return doc


def test_reference_file_matches_builtin():
    assert json.loads((SCEN / "reference.json").read_text()) == harness.REFERENCE_SCENARIO


def test_minimal_scenario():
    res = harness.run(harness.load_scenario(SCEN / "minimal.json"))
    assert res.report["formula_checks"]["N_actual"] == 3
    assert res.passed


@pytest.mark.parametrize(
    "doc, where",
    [
        (small(topo={"dimension": 3, "tiers": 1}), "field topo"),
        (small(extra=1), "<root>"),
        (small(ledger={"b": 2, "r": 2, "keep": 1}), "field ledger"),
        (small(ledger={"b": 0, "r": 2}), "field ledger.b"),
        (small(consensus={"link_failures": {"1": [["0", "2.2"]]}}), "consensus.link_failures.1.0"),
        (small(consensus={"link_failures": {"1": [["0", "9"]]}}), "consensus.link_failures.1.0"),
        (small(consensus={"perf_threshold": {"x": 1}}), "field consensus.perf_threshold"),
        (small(seed=-1), "field seed"),
    ],
)
def test_scenario_rejections(doc, where):
    with pytest.raises(harness.ScenarioError, match=where.replace(".", r"\.")):
        harness.parse_scenario(doc)


def test_json_syntax_error_has_line():
    text = '{\n  "topo": {"dimension": 2, "tiers": 1},\n  "ledger": {"b": 1 "r": 2}\n}'
    with pytest.raises(harness.ScenarioError, match="line 3"):
        harness.parse_scenario(text)


def test_overrides_change_config_hash():
    a = harness.parse_scenario(small())
    b = harness.parse_scenario(small(), seed=99)
    assert b.seed == 99 and b.election.rng_seed == 99
    assert a.config_hash != b.config_hash
    assert harness.parse_scenario(small(), toy=True).identity_params == "toy"


def test_link_failures_lower_route_score():
    fail = {"2": [["0", "1"], ["0", "0.1"], ["1.1", "1.2"]]}
    base = harness.run(harness.parse_scenario(small()))
    hit = harness.run(harness.parse_scenario(small(consensus={**small()["consensus"], "link_failures": fail})))
    b, h = base.report["consensus"]["route_score_by_round"], hit.report["consensus"]["route_score_by_round"]
    assert b[:2] == h[:2]
    assert h[2] < b[2]
    assert hit.score_rows[2]["links_down"] == 3


def test_outputs_written(tmp_path):
    res = harness.run(harness.parse_scenario(small()))
    harness.write_outputs(res, tmp_path, timing=True)
    names = sorted(str(p.relative_to(tmp_path)) for p in tmp_path.rglob("*") if p.is_file())
    assert names == [
        "ledger.jsonl", "metrics/rounds.csv", "metrics/route_scores.csv", "metrics/stretch.csv",
        "report.json", "timing.json", "transcript.jsonl",
    ]
    header = (tmp_path / "metrics" / "rounds.csv").read_text().splitlines()[0]
    assert header == "round,tier,winner,winner_score,tier_score,members,swaps,threshold_failures"
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["config_hash"] == harness.parse_scenario(small()).config_hash
    assert report["digest_algorithm"] == "sha256" and "version" in report
    assert "simulation_s" not in (tmp_path / "report.json").read_text()


def test_cli_topo_gen(capsys):
    assert main(["topo", "gen", "--d", "2", "--t", "2"]) == 0
    assert len(json.loads(capsys.readouterr().out)["vertices"]) == 48


def test_cli_route_query(capsys):
    assert main(["route", "query", "--t", "1", "--from", "0.1", "--to", "snw://1.2/abc", "--oracle"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["hops"] == ["0.1", "0", "1", "1.1", "1.2"] and out["oracle"]["length_hops"] == 4


def test_cli_route_query_unknown_vertex(capsys):
    assert main(["route", "query", "--t", "1", "--from", "0.1.1", "--to", "0"]) == 2


def test_cli_route_study(capsys):
    assert main(["route", "study", "--t", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].startswith("2,2256,") and lines[1].split(",")[-1] == "True"


def test_cli_id_demo(capsys):
    assert main(["id", "demo", "--toy"]) == 0
    steps = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert len(steps) == 10 and steps[-1]["verdict"] == "accept"


def test_cli_sim_and_ledger_inspect(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(small()))
    monkeypatch.setenv("SNOWEDNET_OUT", str(tmp_path / "env"))
    assert main(["sim", "run", "--config", str(cfg), "--rounds", "3", "--out", str(tmp_path / "ignored")]) == 0
    out = tmp_path / "env"
    assert (out / "report.json").exists() and not (tmp_path / "ignored").exists()
    capsys.readouterr()
    assert main(["ledger", "inspect", "--file", str(out / "ledger.jsonl"), "--range", "1..3"]) == 0
    blocks = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert [b["seq"] for b in blocks] == [1, 2]
    # corrupt one block and inspection must fail
    lines = (out / "ledger.jsonl").read_text().splitlines()
    entry = json.loads(lines[1])
    raw = bytearray.fromhex(entry["raw"])
    raw[-1] ^= 1
    entry["raw"] = raw.hex()
    lines[1] = json.dumps(entry)
    (out / "ledger.jsonl").write_text("\n".join(lines) + "\n")
    assert main(["ledger", "inspect", "--file", str(out / "ledger.jsonl"), "--range", "0..3"]) == 1


def test_cli_errors(tmp_path, capsys):
    assert main(["sim", "run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(small(topo={"dimension": 3, "tiers": 1})))
    assert main(["sim", "run", "--config", str(bad)]) == 2
    assert "field topo" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["topo", "gen", "--t", "1", "--bogus"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "snowednet", "topo", "gen", "--t", "0"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["node_count"] == 3
