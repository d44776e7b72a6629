"""
Scoring a replay buffer of transitions
======================================

Offline RL datasets store (s, a, r, s') tuples. Both s and s' count as
visited states. Here a random walk that never leaves one half of a box
is written to JSONL, read back and scored.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from exploration_metrics import StateSpace
from exploration_metrics.harness import compute_metrics, ingest_dataset

rng = np.random.default_rng(3)
space = StateSpace([-1.0, -1.0, 0.0], [1.0, 1.0, 10.0])

# mean-reverting random walk whose first coordinate stays mostly negative
home = np.array([-0.5, 0.0, 5.0])
s = home.copy()
lines = []
for _ in range(1500):
    step = rng.normal(0, [0.05, 0.1, 0.4])
    s_next = s + step - 0.05 * (s - home)
    s_next[0] = min(s_next[0], 0.05)
    lines.append(json.dumps({"s": s.tolist(), "a": step.tolist(), "r": 0.0, "s_next": s_next.tolist()}))
    s = s_next

path = Path(tempfile.mkdtemp()) / "buffer.jsonl"
path.write_text("\n".join(lines) + "\n")

# states that wander outside the box are projected back onto it
ingested = ingest_dataset(path, "jsonl_transitions", space, clip_policy="clip")
print(f"read {ingested.n_read} states, clipped {ingested.n_clipped}")

for r in compute_metrics(ingested.points, space, seed=0):
    print(f"{r.metric_id:>10}  {r.value:+.3f}")
