"""Synchronisation policies and the simulated positional controller.

A policy turns a nominal target ``g`` into a :class:`Decision` ``(u, tau)``.
The executor then moves the tool in a straight line at a fixed speed, adds
a latency with Gaussian jitter, and scores the command against where the
target really is when the move completes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .estimation import AllFlat, SineFit, dominant_axis, iter_extrema
from .motion import Pose6, RhythmicMotion, apply_motion, motion_pose

log = logging.getLogger(__name__)

NO_SYNC = "none"
FULL_SYNC = "full"
INTERMITTENT = "intermittent"
POLICIES = (NO_SYNC, FULL_SYNC, INTERMITTENT)

# extrema examined before an intermittent decision gives up
MAX_DEFERRALS = 10_000


class ControlError(ValueError):
    pass


class EmptyTargets(ControlError):
    pass


class NoFit(ControlError):
    pass


@dataclass(frozen=True)
class Decision:
    u: Pose6
    tau: float | None = None


@dataclass(frozen=True)
class ActuationModel:
    speed: float = 20.0
    latency_mean: float = 0.6
    latency_jitter: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if not self.speed > 0:
            raise ControlError(f"speed must be > 0, got {self.speed}")
        if self.latency_mean < 0 or self.latency_jitter < 0:
            raise ControlError("latency_mean and latency_jitter must be >= 0")

    def travel_time(self, a, b) -> float:
        return float(np.linalg.norm(np.asarray(b, dtype=float) - np.asarray(a, dtype=float))) / self.speed


def compensation(fits: Sequence[SineFit], t: float) -> np.ndarray:
    """Predicted per-axis displacement ``C[t] - offset``; flat fits give 0."""
    return np.array([0.0 if f.is_flat else float(f.displacement(t)) for f in fits])


def compensate(g: Pose6, fits: Sequence[SineFit], t: float) -> Pose6:
    """Shift ``g`` by the displacement the platform is predicted to have at ``t``."""
    return Pose6.from_array(g.as_array() + compensation(fits, t))


class Policy:
    name = ""

    def decide(self, g: Pose6, now: float, position) -> Decision:
        raise NotImplementedError


class NoSync(Policy):
    """Open loop: command the nominal target and ignore the motion."""

    name = NO_SYNC

    def decide(self, g, now, position):
        return Decision(g)


def _check_fits(fits):
    if fits is None or len(fits) != 6:
        raise NoFit("need one fit per pose axis")
    return list(fits)


class FullSync(Policy):
    """Track the motion: add the predicted displacement at completion time."""

    name = FULL_SYNC

    def __init__(self, fits: Sequence[SineFit], act: ActuationModel):
        self.fits = _check_fits(fits)
        self.act = act

    def completion_time(self, g: Pose6, now: float, position) -> float:
        """Earliest ``tau`` with ``tau = now + travel(u(tau)) + latency_mean``."""
        act = self.act
        p = np.asarray(position, dtype=float)
        t0 = now + act.latency_mean

        def slack(tau):
            return tau - t0 - act.travel_time(p, compensate(g, self.fits, tau).translation)

        lo = t0
        f_lo = slack(lo)
        if f_lo >= 0:
            return lo
        omegas = [f.omega for f in self.fits if not f.is_flat]
        h = min(0.05, min((2 * math.pi / w) / 40 for w in omegas)) if omegas else 0.05
        while True:
            hi = lo + h
            f_hi = slack(hi)
            if f_hi >= 0:
                return brentq(slack, lo, hi, xtol=1e-12)
            lo = hi

    def decide(self, g, now, position):
        tau = self.completion_time(g, now, position)
        return Decision(compensate(g, self.fits, tau), tau)


class IntermittentSync(Policy):
    """Arrive only at extrema of the dominant axis, compensating there."""

    name = INTERMITTENT

    def __init__(self, fits: Sequence[SineFit], act: ActuationModel):
        self.fits = _check_fits(fits)
        self.act = act
        try:
            self.axis = dominant_axis(self.fits)
            self.fallback = False
        except AllFlat:
            log.info("no oscillating axis in the motion fit; intermittent sync falls back to no sync")
            self.axis = None
            self.fallback = True

    def decide(self, g, now, position):
        if self.fallback:
            return Decision(g)
        act = self.act
        for i, s in enumerate(iter_extrema(self.fits[self.axis], now)):
            u = compensate(g, self.fits, s)
            if s - act.travel_time(position, u.translation) - act.latency_mean >= now - 1e-9:
                return Decision(u, s)
            if i >= MAX_DEFERRALS:
                raise ControlError("no reachable extremum found")


def make_policy(name: str, fits: Sequence[SineFit] | None, act: ActuationModel) -> Policy:
    if name == NO_SYNC:
        return NoSync()
    if name == FULL_SYNC:
        return FullSync(fits, act)
    if name == INTERMITTENT:
        return IntermittentSync(fits, act)
    raise ControlError(f"unknown policy {name!r}; expected one of {POLICIES}")


@dataclass(frozen=True)
class DecisionRecord:
    target: Pose6
    u: Pose6
    issue: float
    tau_intended: float
    tau_realized: float
    true_target: Pose6
    error: float

    @property
    def timing_error(self) -> float:
        return self.tau_realized - self.tau_intended


@dataclass
class ExecutionLog:
    t_start: float = 0.0
    records: list[DecisionRecord] = field(default_factory=list)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.records])

    @property
    def t_end(self) -> float:
        return self.records[-1].tau_realized if self.records else self.t_start

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def timing_spread(self) -> float:
        """Range of realised-minus-intended completion times."""
        if not self.records:
            return 0.0
        d = [r.timing_error for r in self.records]
        return max(d) - min(d)


class Executor:
    """Stateful simulated robot: clock, tool position and jitter stream.

    Policies see each target as registered with the platform at ``reference``
    (e.g. its mean pose); the error is always measured against the target
    carried by the true motion.
    """

    def __init__(self, motion: RhythmicMotion, act: ActuationModel, t0: float = 0.0, position=None,
                 reference: Pose6 | None = None):
        self.motion = motion
        self.reference = reference
        self.act = act
        self.now = float(t0)
        self.position = np.zeros(3) if position is None else np.asarray(position, dtype=float).copy()
        self.rng = np.random.default_rng(act.seed)
        self.log = ExecutionLog(t_start=float(t0))

    def step(self, policy: Policy, g: Pose6, dwell: float = 0.0) -> DecisionRecord:
        act = self.act
        seen = g if self.reference is None else apply_motion(self.reference, g)
        d = policy.decide(seen, self.now, self.position)
        travel = act.travel_time(self.position, d.u.translation)
        if d.tau is None:
            issue = self.now
            intended = issue + travel + act.latency_mean
        else:
            issue = max(self.now, d.tau - travel - act.latency_mean)
            intended = d.tau
        # one draw per decision keeps jitter aligned across policies
        z = self.rng.standard_normal()
        latency = max(0.0, act.latency_mean + act.latency_jitter * z)
        tau = issue + travel + latency
        true = apply_motion(motion_pose(self.motion, tau), g)
        err = float(np.linalg.norm(true.translation - d.u.translation))
        rec = DecisionRecord(g, d.u, issue, intended, tau, true, err)
        self.log.records.append(rec)
        self.position = d.u.translation
        self.now = tau + dwell
        return rec


def execute(policy: Policy, targets: Iterable[Pose6], motion: RhythmicMotion, act: ActuationModel,
            t0: float = 0.0, position=None, dwell: float = 0.0) -> ExecutionLog:
    targets = list(targets)
    if not targets:
        raise EmptyTargets("nothing to execute")
    ex = Executor(motion, act, t0, position)
    for g in targets:
        ex.step(policy, g, dwell)
    return ex.log


def cumulative_error(log: ExecutionLog) -> float:
    return float(sum(r.error for r in log.records))


def plan_no_sync(targets: Sequence[Pose6]) -> list[Decision]:
    return [Decision(g) for g in _targets(targets)]


def _nominal_plan(policy: Policy, targets, act: ActuationModel, t0: float, position) -> Iterator[Decision]:
    """Decisions along the jitter-free timeline the policy expects."""
    now = float(t0)
    pos = np.zeros(3) if position is None else np.asarray(position, dtype=float)
    for g in targets:
        d = policy.decide(g, now, pos)
        yield d
        travel = act.travel_time(pos, d.u.translation)
        now = d.tau if d.tau is not None else now + travel + act.latency_mean
        pos = d.u.translation


def _targets(targets) -> list[Pose6]:
    targets = list(targets)
    if not targets:
        raise EmptyTargets("no targets")
    return targets


def plan_full_sync(targets, fits, act: ActuationModel, t0: float = 0.0, position=None) -> Iterator[Decision]:
    targets = _targets(targets)
    return _nominal_plan(FullSync(fits, act), targets, act, t0, position)


def plan_intermittent(targets, fits, act: ActuationModel, t0: float = 0.0, position=None) -> Iterator[Decision]:
    targets = _targets(targets)
    return _nominal_plan(IntermittentSync(fits, act), targets, act, t0, position)
