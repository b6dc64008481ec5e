"""The closed pipeline, scored.

Runs the nearest-demo oracle two ways on the stacking task: once with
eval worlds identical to the demo worlds (retrieval must be perfect) and
once on fresh layouts (retrieval replays the wrong geometry and fails,
which is exactly why a real model has to generalize). Writes a CSV of
per-episode rows.

Run:  python3 demos/04_eval_pipeline.py
"""

import dataclasses
import tempfile
from pathlib import Path

from iclmanip import RunConfig, TaskId, demo_seeds, emit_csv, run_eval

base = RunConfig(task=TaskId.STACK_CUBE, n_demos=10, n_eval=10, seed=0)

same = dataclasses.replace(base, eval_seeds=demo_seeds(base))
report_same = run_eval(same, arm="same-layout")
print(f"same-layout retrieval: success_rate={report_same.success_rate:.2f}")

report_fresh = run_eval(base, arm="fresh-layout")
print(f"fresh-layout retrieval: success_rate={report_fresh.success_rate:.2f}")
print("(an oracle that copies demo trajectories cannot solve unseen layouts;")
print(" swap provider='remote' plus endpoint/model/credential_env for a real run)")

out = Path(tempfile.gettempdir()) / "eval_rows.csv"
emit_csv([report_same, report_fresh], out)
print(f"\nwrote {out}:")
for line in out.read_text().splitlines()[:6]:
    print(" ", line)
print("  ...")
