"""
Private identities
==================

A user registers a RealID once, then derives unlinkable network and app
identifiers.  Each identifier carries an authority signature and a
zero-knowledge proof of opening.  Only the authority can map an identifier
back to the person.
"""

import random

from snowednet.identity import commit, run_workflow, setup, workflow_passed

toy = setup("toy")
print("toy commitment g^5 h^7 mod 23 =", commit(toy, 5, 7))

for level in ("toy", "desk"):
    transcript = run_workflow(setup(level), random.Random(0))
    for step in transcript:
        print(f"  [{level}] step {step['step']:2d}: {step['action']}")
    print(level, "workflow passed:", workflow_passed(transcript))
