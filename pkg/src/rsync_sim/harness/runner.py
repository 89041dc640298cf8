"""Monte Carlo execution of scenarios and parameter sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..tasks import CUTTING, TrialReport, run_cutting, run_debridement
from .config import Scenario, SweepSpec

THREADS_ENV = "RSYNC_SIM_THREADS"


def thread_count() -> int:
    """Worker threads allowed by ``RSYNC_SIM_THREADS`` (0 or unset = auto)."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def run_trial(sc: Scenario, policy: str, trial: int) -> TrialReport:
    seed = sc.seed + trial
    m = sc.motion.motion(seed)
    run = run_cutting if sc.task_kind == CUTTING else run_debridement
    rep = run(sc.task, m, sc.sensor, policy, sc.actuation, seed=seed, variation=sc.motion.variation)
    rep.scenario = sc.name
    rep.trial = trial
    return rep


def run_scenario(sc: Scenario) -> list[TrialReport]:
    """Every (policy, trial) pair, ordered by policy then trial index.

    Trial ``i`` uses seed ``sc.seed + i`` for all policies, so policies are
    compared on the same platform realisations and jitter draws.
    """
    jobs = [(p, i) for p in sc.policies for i in range(sc.n_trials)]
    n = min(thread_count(), len(jobs))
    if n <= 1:
        return [run_trial(sc, p, i) for p, i in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        # map preserves submission order regardless of completion order
        return list(pool.map(lambda job: run_trial(sc, *job), jobs))


def error_metric(rep: TrialReport) -> float:
    """Max cutting error for cutting trials, cumulative error otherwise."""
    return rep.max_error if rep.max_error is not None else rep.cumulative_error


@dataclass(frozen=True)
class Aggregate:
    value: object
    policy: str
    n_trials: int
    finish_rate: float
    error_mean: float
    error_median: float
    error_max: float
    error_std: float
    duration_mean: float
    success_rate: float | None = None


def aggregate(reports: list[TrialReport], value=None) -> list[Aggregate]:
    """Per-policy statistics; trials whose estimation failed (NaN) are skipped."""
    out = []
    for policy in dict.fromkeys(r.policy for r in reports):
        rs = [r for r in reports if r.policy == policy]
        err = np.array([error_metric(r) for r in rs], dtype=float)
        err = err[np.isfinite(err)]
        stats = (float(np.mean(err)), float(np.median(err)), float(np.max(err)), float(np.std(err))) \
            if len(err) else (math.nan,) * 4
        success = None
        if rs[0].attempts is not None:
            att = sum(r.attempts for r in rs)
            success = sum(r.successes for r in rs) / att if att else math.nan
        out.append(Aggregate(value, policy, len(rs), float(np.mean([r.finished for r in rs])), *stats,
                             float(np.mean([r.duration for r in rs])), success))
    return out


@dataclass
class SweepReport:
    param: str
    values: list
    rows: list[Aggregate] = field(default_factory=list)
    reports: dict = field(default_factory=dict)

    def row(self, value, policy) -> Aggregate:
        for r in self.rows:
            if r.value == value and r.policy == policy:
                return r
        raise KeyError((value, policy))


def run_sweep(sw: SweepSpec) -> SweepReport:
    out = SweepReport(sw.param, list(sw.values))
    for v, sc in zip(sw.values, sw.scenarios()):
        reps = run_scenario(sc)
        out.reports[_key(v)] = reps
        out.rows.extend(aggregate(reps, v))
    return out


def _key(v):
    return tuple(v) if isinstance(v, list) else v
