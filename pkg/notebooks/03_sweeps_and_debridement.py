"""
Frequency, motion complexity and grasping
=========================================

Sweep the platform frequency and the motion mode for the intermittent
policy, then compare grasp success with and without synchronisation.
"""

from pathlib import Path

import numpy as np

from rsync_sim.harness import SweepSpec, read_scenario, run_scenario, run_sweep
from rsync_sim.tasks import grasp_rate

here = Path(__file__).resolve().parents[1] / "scenarios"

# %% Faster motion leaves less time near each turning point
sw = run_sweep(SweepSpec("motion.frequency", (0.0, 0.1, 0.2, 0.25, 0.3), read_scenario(here / "frequency_sweep.json")))
for row in sw.rows:
    print(f"{row.value:4} Hz  median {row.error_median:.3f} mm  mean {row.error_mean:.3f} mm")

# %% More moving axes means more that the dominant-axis timing ignores
sw = run_sweep(SweepSpec("motion.mode", ("none", "x", "3d", "6d"), read_scenario(here / "motion_modes.json")))
for row in sw.rows:
    print(f"{row.value:>5}  mean {row.error_mean:.3f} mm  finished {row.finish_rate:.0%}")

# %% Debridement: fewer attempts per minute, but more of them succeed
sc = read_scenario(here / "debridement.json")
reports = run_scenario(sc)
for policy in sc.policies:
    rs = [r for r in reports if r.policy == policy]
    ok = sum(r.successes for r in rs) / sum(r.attempts for r in rs)
    print(f"{policy:<13} success {ok:.1%}  cleared {np.mean([r.finished for r in rs]):.0%}  "
          f"{np.mean([grasp_rate(r) for r in rs]):.1f} grasps/min")
