"""
An end-to-end scenario
======================

The harness glues all modules together.  It builds the topology, populates
the ledger, runs consensus rounds with scheduled link failures, runs the
routing study and the identity workflow, and checks every invariant.
"""

import json
import sys
import tempfile
from pathlib import Path

from snowednet import harness

scenario = harness.parse_scenario(harness.REFERENCE_SCENARIO, rounds=6)
result = harness.run(scenario)
print(json.dumps(result.report["checks"], indent=1))
print("route score by round:", result.report["consensus"]["route_score_by_round"])

out = harness.write_outputs(result, Path(tempfile.mkdtemp()))
print("outputs in", out, sorted(p.name for p in out.iterdir()))
sys.exit(0 if result.passed else 1)
