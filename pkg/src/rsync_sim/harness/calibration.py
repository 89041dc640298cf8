"""Tune simulator noise so the estimation pipeline shows a target uncertainty.

Three statistics are matched on a reference scenario:

* relative RMSE of the fitted frequency against the commanded one,
* RMSE of the fitted phase (s) against the commanded phase,
* mean within-task spread (max - min) of completion-time errors.

Each depends, to within fitting noise, on a single knob (platform frequency
variation, platform phase variation, latency jitter), so each is solved with
a bracketed 1-D root search on a fixed set of seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from ..control import NoSync, Executor
from ..estimation import dominant_axis, fit_all, wrapped_phase_error
from ..motion import PlatformVariation
from ..sensing import observe
from ..tasks import CuttingTask, trial_inputs
from .config import Scenario

MAX_EVALUATIONS = 200


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class CalibrationTargets:
    freq_rmse: float = 0.03
    phase_rmse: float = 0.22
    latency_spread: float = 0.576


@dataclass(frozen=True)
class CalibrationResult:
    variation_frequency: float
    variation_phase: float
    latency_jitter: float
    freq_rmse: float
    phase_rmse: float
    latency_spread: float
    evaluations: int
    n_seeds: int

    def apply(self, sc: Scenario) -> Scenario:
        """``sc`` with the calibrated noise magnitudes substituted in."""
        var = replace(sc.motion.variation, frequency=self.variation_frequency, phase=self.variation_phase)
        return replace(sc, motion=replace(sc.motion, variation=var),
                       actuation=replace(sc.actuation, latency_jitter=self.latency_jitter))


def fit_errors(sc: Scenario, variation: PlatformVariation, seeds) -> tuple[np.ndarray, np.ndarray]:
    """Relative frequency and phase (s) errors of the dominant-axis fit per seed."""
    fe, pe = [], []
    for seed in seeds:
        m = sc.motion.motion(seed)
        realized, sensor, _ = trial_inputs(m, sc.sensor, sc.actuation, seed, variation)
        fits = fit_all(observe(realized, sensor))
        k = dominant_axis(fits)
        f = fits[k]
        f_cmd = m.axes[k].frequency
        fe.append((f.frequency - f_cmd) / f_cmd)
        pe.append(wrapped_phase_error(f.phi, m.axes[k].phase, f.period))
    return np.array(fe), np.array(pe)


def latency_spreads(sc: Scenario, jitter: float, seeds) -> np.ndarray:
    """Completion-time error spread over one task execution, per seed."""
    act0 = replace(sc.actuation, latency_jitter=jitter)
    # debridement targets depend on the task stream; a default cut stands in
    targets = (sc.task if isinstance(sc.task, CuttingTask) else CuttingTask()).waypoints()
    out = []
    for seed in seeds:
        m = sc.motion.motion(seed)
        realized, _, act = trial_inputs(m, sc.sensor, act0, seed, sc.motion.variation)
        ex = Executor(realized, act, sc.sensor.duration, targets[0].translation)
        policy = NoSync()
        for g in targets:
            ex.step(policy, g)
        out.append(ex.log.timing_spread())
    return np.array(out)


def _rms(a) -> float:
    return float(np.sqrt(np.mean(np.square(a))))


def _solve(fn, target, hi, budget, name, xtol):
    """Root of ``fn(x) = target`` on ``[0, hi]``; ``fn`` increasing."""
    calls = 0

    def g(x):
        nonlocal calls
        calls += 1
        if calls > budget:
            raise CalibrationError(f"{name}: evaluation budget exhausted")
        return fn(x) - target

    g0 = g(0.0)
    if g0 >= 0:
        raise CalibrationError(f"{name}: target {target} is already exceeded with zero noise ({g0 + target:.4g})")
    ghi = g(hi)
    while ghi < 0:
        hi *= 2.0
        ghi = g(hi)
    x = brentq(g, 0.0, hi, xtol=xtol)
    return x, calls


def calibrate(sc: Scenario, targets: CalibrationTargets = CalibrationTargets(), n_seeds: int = 10,
              max_evaluations: int = MAX_EVALUATIONS) -> CalibrationResult:
    """Find platform variation and latency jitter matching ``targets``.

    Uses seeds ``sc.seed .. sc.seed + n_seeds - 1``. The sensor model and
    the per-axis lag are taken from ``sc`` unchanged.
    """
    if sc.motion.frequency <= 0:
        raise CalibrationError("calibration needs a moving platform")
    seeds = range(sc.seed, sc.seed + n_seeds)
    base = sc.motion.variation
    budget = max_evaluations

    def freq_stat(s):
        return _rms(fit_errors(sc, replace(base, frequency=s, phase=0.0), seeds)[0])

    sf, used = _solve(freq_stat, targets.freq_rmse, 0.1, budget, "frequency", 1e-5)
    budget -= used

    def phase_stat(s):
        return _rms(fit_errors(sc, replace(base, frequency=sf, phase=s), seeds)[1])

    sp, n = _solve(phase_stat, targets.phase_rmse, 0.5, budget, "phase", 1e-5)
    budget -= n
    used += n

    def spread_stat(j):
        return float(np.mean(latency_spreads(sc, j, seeds)))

    sj, n = _solve(spread_stat, targets.latency_spread, 0.5, budget, "latency spread", 1e-5)
    used += n

    var = replace(base, frequency=sf, phase=sp)
    fe, pe = fit_errors(sc, var, seeds)
    spread = float(np.mean(latency_spreads(replace(sc, motion=replace(sc.motion, variation=var)), sj, seeds)))
    return CalibrationResult(sf, sp, sj, _rms(fe), _rms(pe), spread, used + 2, n_seeds)


def measure(sc: Scenario, n_seeds: int = 10) -> dict:
    """The three calibration statistics for ``sc`` as configured."""
    seeds = range(sc.seed, sc.seed + n_seeds)
    fe, pe = fit_errors(sc, sc.motion.variation, seeds)
    spread = float(np.mean(latency_spreads(sc, sc.actuation.latency_jitter, seeds)))
    return {"freq_rmse": _rms(fe), "phase_rmse": _rms(pe), "latency_spread": spread}
