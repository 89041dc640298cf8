"""
Three ways to cut a line on a moving platform
=============================================

Run the reference cutting scenario (25 mm at 0.2 Hz along x) with each
policy and compare completion, error and time.
"""

from pathlib import Path

import numpy as np

from rsync_sim.harness import read_scenario, run_scenario

sc = read_scenario(Path(__file__).resolve().parents[1] / "scenarios" / "cutting_x.json")
reports = run_scenario(sc)

print(f"{'policy':<14}{'finished':>10}{'median err':>12}{'median time':>13}")
for policy in sc.policies:
    rs = [r for r in reports if r.policy == policy]
    done = [r for r in rs if r.finished]
    err = np.median([r.max_error for r in done]) if done else float("nan")
    print(f"{policy:<14}{len(done) / len(rs):>10.0%}{err:>12.3f}{np.median([r.duration for r in rs]):>13.1f}")

# %% Why no-sync fails: the first disengagement of a few trials
for r in [r for r in reports if r.policy == "none"][:3]:
    print(f"trial {r.trial}: {r.reason}")
