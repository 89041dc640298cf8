"""Marker-tracking camera: noisy pose samples of the moving platform."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .motion import AXES, RhythmicMotion, period

TRACK_HEADER = ("t",) + AXES

# observation must span at least this many motion periods
MIN_PERIODS = 4


class SensingError(ValueError):
    pass


class NyquistViolation(SensingError):
    pass


class NoSamples(SensingError):
    pass


class MalformedTrack(SensingError):
    pass


@dataclass(frozen=True)
class SensorModel:
    fps: float = 15.0
    duration: float = 60.0
    sigma_trans: float = 0.5
    sigma_rot: float = 0.25
    seed: int = 0
    outlier_fraction: float = 0.0
    # std (s) of a per-track offset between camera timestamps and the robot clock
    clock_offset: float = 0.0

    def __post_init__(self):
        if not (self.fps > 0 and math.isfinite(self.fps)):
            raise SensingError(f"fps must be positive, got {self.fps}")
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise SensingError(f"duration must be positive, got {self.duration}")
        if self.sigma_trans < 0 or self.sigma_rot < 0 or self.clock_offset < 0:
            raise SensingError("noise standard deviations must be >= 0")
        if self.outlier_fraction != 0:
            raise SensingError("outlier_fraction is reserved and must be 0")

    @property
    def n_frames(self) -> int:
        return int(math.floor(self.fps * self.duration + 1e-9))

    def check(self, m: RhythmicMotion) -> None:
        """Raise unless ``m`` can be observed with this sensor."""
        if m.is_static:
            return
        f = m.frequency
        if self.fps <= 2.0 * f:
            raise NyquistViolation(f"fps={self.fps} must exceed twice the motion frequency {f} Hz")
        if self.duration < MIN_PERIODS * period(m) - 1e-9:
            raise NoSamples(f"duration {self.duration}s covers fewer than {MIN_PERIODS} periods of {f} Hz motion")


@dataclass(frozen=True, eq=False)
class TrackSeries:
    t: np.ndarray
    poses: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        poses = np.array(self.poses, dtype=float).reshape(len(t), 6)
        if len(t) == 0:
            raise NoSamples("track has no samples")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise MalformedTrack("sample times must be strictly increasing")
        t.setflags(write=False)
        poses.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "poses", poses)

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        return iter(zip(self.t, self.poses))

    def __eq__(self, other):
        if not isinstance(other, TrackSeries):
            return NotImplemented
        return np.array_equal(self.t, other.t) and np.array_equal(self.poses, other.poses)

    __hash__ = None

    def axis(self, k: int) -> np.ndarray:
        return self.poses[:, k]


def observe(m: RhythmicMotion, s: SensorModel) -> TrackSeries:
    """Sample ``m`` at ``i/fps`` for ``i < fps*duration`` and add pose noise.

    With a non-zero ``clock_offset`` the frame stamped ``t`` shows the
    platform at ``t - delta`` for one ``delta`` drawn per track.
    """
    s.check(m)
    t = np.arange(s.n_frames) / s.fps
    rng = np.random.default_rng(s.seed)
    sigma = np.array([s.sigma_trans] * 3 + [s.sigma_rot] * 3)
    noise = rng.standard_normal((len(t), 6)) * sigma
    delta = s.clock_offset * rng.standard_normal()
    return TrackSeries(t, m.sample(t - delta) + noise)


def write_track(ts: TrackSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACK_HEADER)
        for t, pose in ts:
            w.writerow([repr(float(t))] + [repr(float(v)) for v in pose])


def read_track(path) -> TrackSeries:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedTrack(f"{path}: empty file, expected header {','.join(TRACK_HEADER)}")
    header = [h.strip() for h in rows[0]]
    if tuple(header) != TRACK_HEADER:
        raise MalformedTrack(f"{path}: row 1: bad header {header}")
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 7:
            raise MalformedTrack(f"{path}: row {i}: expected 7 fields, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise MalformedTrack(f"{path}: row {i}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise MalformedTrack(f"{path}: row {i}: non-finite value")
        data.append(vals)
    if not data:
        raise NoSamples(f"{path}: header only, no samples")
    a = np.array(data)
    try:
        return TrackSeries(a[:, 0], a[:, 1:])
    except MalformedTrack as exc:
        raise MalformedTrack(f"{path}: {exc}") from None
