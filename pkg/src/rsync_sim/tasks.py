"""Benchmark tasks on the moving platform: line cutting and debridement."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .control import NO_SYNC, ActuationModel, Executor, make_policy
from .estimation import SineFit, fit_all
from .motion import (PlatformVariation, Pose6, RhythmicMotion, apply_motion, mean_pose, motion_pose, realize,
                     to_platform_frame)
from .sensing import SensorModel, SensingError, observe

CUTTING = "cutting"
DEBRIDEMENT = "debridement"


class TaskError(ValueError):
    pass


class ZeroDuration(TaskError):
    pass


@dataclass(frozen=True)
class CuttingTask:
    line_length: float = 50.0
    line_thickness: float = 2.0
    waypoint_spacing: float = 2.5
    disengage_threshold: float = 6.0

    def __post_init__(self):
        if not (self.line_length > 0 and self.line_thickness > 0 and self.waypoint_spacing > 0):
            raise TaskError("line_length, line_thickness and waypoint_spacing must be > 0")
        if self.waypoint_spacing > self.line_length:
            raise TaskError("waypoint_spacing must not exceed line_length")
        if not self.disengage_threshold > 0:
            raise TaskError("disengage_threshold must be > 0")

    def waypoints(self) -> list[Pose6]:
        """Points along the platform y axis, centred on the origin."""
        n = int(round(self.line_length / self.waypoint_spacing))
        ys = np.linspace(-0.5 * self.line_length, 0.5 * self.line_length, n + 1)
        return [Pose6(0.0, float(y), 0.0) for y in ys]

    def deviation(self, p) -> float:
        """Distance of a platform-frame point from the nominal line (the y axis)."""
        return float(math.hypot(p[0], p[2]))


@dataclass(frozen=True)
class DebridementTask:
    """Grasp-and-remove task with geometric success checks.

    Registration noise defaults are calibrated so that the static success
    rate is 85%; ``depth_tolerance`` is the vertical capture range of the
    jaws.
    """

    n_inclusions: int = 10
    max_attempts: int = 20
    grasp_tolerance: float = 2.5
    registration_sigma: float = 1.283
    orientation_tolerance: float = 30.0
    orientation_sigma: float = 8.0
    depth_tolerance: float = 11.5
    handling_time: float = 3.0
    region: float = 60.0
    min_separation: float = 8.0

    def __post_init__(self):
        if self.n_inclusions < 1:
            raise TaskError("n_inclusions must be >= 1")
        if self.max_attempts < self.n_inclusions:
            raise TaskError("max_attempts must be >= n_inclusions")
        for name in ("grasp_tolerance", "orientation_tolerance", "depth_tolerance", "region"):
            if not getattr(self, name) > 0:
                raise TaskError(f"{name} must be > 0")
        for name in ("registration_sigma", "orientation_sigma", "handling_time", "min_separation"):
            if getattr(self, name) < 0:
                raise TaskError(f"{name} must be >= 0")

    def place_inclusions(self, rng: np.random.Generator) -> np.ndarray:
        """``(n, 3)`` array of planar x, y (mm) and long-axis angle (deg)."""
        half = 0.5 * self.region
        pts: list[np.ndarray] = []
        for _ in range(100_000):
            if len(pts) == self.n_inclusions:
                break
            p = rng.uniform(-half, half, 2)
            if all(np.linalg.norm(p - q) >= self.min_separation for q in pts):
                pts.append(p)
        else:
            raise TaskError("could not place inclusions with the requested separation")
        angles = rng.uniform(0.0, 180.0, self.n_inclusions)
        return np.column_stack([np.array(pts), angles])


@dataclass
class TrialReport:
    policy: str
    finished: bool
    cumulative_error: float
    duration: float
    max_error: float | None = None
    attempts: int | None = None
    successes: int | None = None
    scenario: str = ""
    trial: int = 0
    seed: int = 0
    reason: str = ""
    fits: list[SineFit] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fits"] = None if self.fits is None else [asdict(f) for f in self.fits]
        return d


def grasp_rate(report: TrialReport) -> float:
    """Attempted grasps per minute."""
    if not report.duration or report.duration <= 0 or report.attempts is None:
        raise ZeroDuration("report has no duration or no attempts")
    return report.attempts * 60.0 / report.duration


@dataclass
class _Trial:
    motion: RhythmicMotion
    executor: Executor
    policy: object
    fits: list[SineFit] | None
    t0: float


# independent random streams derived from one trial seed
PLATFORM_STREAM, SENSOR_STREAM, ACTUATION_STREAM, TASK_STREAM, MODE_STREAM = range(5)


def stream(seed: int, which: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(which,))


def stream_seed(seed: int, which: int) -> int:
    """A 32-bit integer seed for the given stream of a trial."""
    return int(stream(seed, which).generate_state(1)[0])


def trial_inputs(m: RhythmicMotion, sensor: SensorModel, act: ActuationModel, seed: int,
                 variation: PlatformVariation = PlatformVariation()):
    """Realised motion plus sensor and actuation models seeded for one trial."""
    realized = realize(m, variation, np.random.default_rng(stream(seed, PLATFORM_STREAM)))
    sensor = replace(sensor, seed=stream_seed(seed, SENSOR_STREAM))
    act = replace(act, seed=stream_seed(seed, ACTUATION_STREAM))
    return realized, sensor, act


def _setup(m, sensor, policy_name, act, seed, variation, start) -> _Trial:
    realized, sensor, act = trial_inputs(m, sensor, act, seed, variation)
    fits = None
    if policy_name != NO_SYNC:
        fits = fit_all(observe(realized, sensor))
    policy = make_policy(policy_name, fits, act)
    # the task starts when the observation window closes
    t0 = sensor.duration
    # targets are registered with the platform at its mean pose (zero for sinusoids)
    ref = mean_pose(realized)
    ref = ref if ref.as_array().any() else None
    return _Trial(realized, Executor(realized, act, t0, start, ref), policy, fits, t0)


def run_cutting(task: CuttingTask, m: RhythmicMotion, sensor: SensorModel, policy: str,
                act: ActuationModel, seed: int = 0,
                variation: PlatformVariation = PlatformVariation()) -> TrialReport:
    """Cut along the nominal line and report the worst excursion from it.

    Execution continues past a disengagement so that durations and errors are
    comparable across trials; ``finished`` records whether it happened.
    """
    waypoints = task.waypoints()
    try:
        trial = _setup(m, sensor, policy, act, seed, variation, waypoints[0].translation)
    except SensingError as exc:
        return TrialReport(policy, False, math.nan, 0.0, math.nan, seed=seed, reason=f"estimation: {exc}")

    ex = trial.executor
    band = 0.5 * task.line_thickness
    max_err = 0.0
    reason = ""
    for i, g in enumerate(waypoints):
        rec = ex.step(trial.policy, g)
        p = to_platform_frame(motion_pose(trial.motion, rec.tau_realized), rec.u.translation)
        dev = task.deviation(p)
        max_err = max(max_err, dev - band)
        if dev > task.disengage_threshold and not reason:
            reason = f"disengaged at waypoint {i} ({dev:.2f} mm)"
    log = ex.log
    return TrialReport(policy, not reason, float(log.errors.sum()), log.duration, max(0.0, max_err),
                       seed=seed, reason=reason, fits=trial.fits)


def _angle_error(a: float, b: float) -> float:
    # seeds are symmetric under half turns
    d = (a - b + 90.0) % 180.0 - 90.0
    return abs(d)


def run_debridement(task: DebridementTask, m: RhythmicMotion, sensor: SensorModel, policy: str,
                    act: ActuationModel, seed: int = 0,
                    variation: PlatformVariation = PlatformVariation()) -> TrialReport:
    """Remove inclusions one grasp at a time until cleared or out of attempts."""
    try:
        trial = _setup(m, sensor, policy, act, seed, variation, np.zeros(3))
    except SensingError as exc:
        return TrialReport(policy, False, math.nan, 0.0, attempts=0, successes=0, seed=seed,
                           reason=f"estimation: {exc}")
    rng = np.random.default_rng(stream(seed, TASK_STREAM))
    seeds = task.place_inclusions(rng)
    remaining = list(range(task.n_inclusions))
    ex = trial.executor
    attempts = successes = 0
    while remaining and attempts < task.max_attempts:
        here = ex.position[:2]
        j = min(remaining, key=lambda k: (np.linalg.norm(seeds[k, :2] - here), k))
        x, y, ang = seeds[j]
        noise = rng.standard_normal(3) * [task.registration_sigma, task.registration_sigma, task.orientation_sigma]
        g = Pose6(x + noise[0], y + noise[1], 0.0, 0.0, 0.0, ang + noise[2])
        rec = ex.step(trial.policy, g, dwell=task.handling_time)
        attempts += 1
        true_seed = apply_motion(motion_pose(trial.motion, rec.tau_realized), Pose6(x, y, 0.0, 0.0, 0.0, ang))
        planar = float(np.linalg.norm(rec.u.translation[:2] - true_seed.translation[:2]))
        depth = abs(rec.u.tz - true_seed.tz)
        turn = _angle_error(rec.u.rz, true_seed.rz)
        if planar <= task.grasp_tolerance and depth <= task.depth_tolerance and turn <= task.orientation_tolerance:
            successes += 1
            remaining.remove(j)
    log = ex.log
    finished = not remaining
    reason = "" if finished else f"{len(remaining)} inclusions left after {attempts} attempts"
    # duration counts the handling of the final grasp
    duration = log.duration + (task.handling_time if attempts else 0.0)
    return TrialReport(policy, finished, float(log.errors.sum()), duration, None, attempts, successes,
                       seed=seed, reason=reason, fits=trial.fits)
