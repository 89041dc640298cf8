"""Ground-truth rhythmic motion of the platform.

Poses are six scalars: translation in millimetres and extrinsic Z-Y-X Euler
angles in degrees. Every workspace point is carried by the platform motion
``m[t]``, which rotates about the platform origin and then translates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation

AXES = ("tx", "ty", "tz", "rx", "ry", "rz")
SINUSOIDAL = "sinusoidal"
BREATHING = "breathing"
KINDS = (SINUSOIDAL, BREATHING)

_E = math.e
_BREATH_SCALE = 2.0 / (_E - 1.0 / _E)

# samples per period for the dense amplitude search
AMPLITUDE_SAMPLES = 10_000


class NoMotion(ValueError):
    """Raised when a motion has no well-defined period."""


def _wrap_deg(a):
    return (np.asarray(a) + 180.0) % 360.0 - 180.0


@dataclass(frozen=True, eq=False)
class Pose6:
    tx: float = 0.0
    ty: float = 0.0
    tz: float = 0.0
    rx: float = 0.0
    ry: float = 0.0
    rz: float = 0.0

    def __post_init__(self):
        vals = self.as_array()
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"non-finite pose component in {vals}")

    @classmethod
    def from_array(cls, a: Sequence[float]) -> "Pose6":
        a = np.asarray(a, dtype=float).ravel()
        if a.shape != (6,):
            raise ValueError(f"expected 6 components, got {a.shape}")
        return cls(*(float(x) for x in a))

    def as_array(self) -> np.ndarray:
        return np.array([self.tx, self.ty, self.tz, self.rx, self.ry, self.rz])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty, self.tz])

    @property
    def angles(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz])

    def rotation(self) -> Rotation:
        # lowercase = extrinsic; angles listed in application order z, y, x
        return Rotation.from_euler("zyx", [self.rz, self.ry, self.rx], degrees=True)

    def isclose(self, other: "Pose6", atol: float = 1e-9) -> bool:
        d = self.as_array() - other.as_array()
        d[3:] = _wrap_deg(d[3:])
        return bool(np.all(np.abs(d) <= atol))

    def __eq__(self, other):
        if not isinstance(other, Pose6):
            return NotImplemented
        return self.isclose(other, atol=0.0)

    __hash__ = None


IDENTITY = Pose6()


@dataclass(frozen=True)
class Waveform:
    """Periodic displacement of one pose axis.

    ``amplitude`` is in mm for translational axes and degrees for rotational
    ones, ``frequency`` in Hz, ``phase`` is a time shift in seconds.
    """

    kind: str = SINUSOIDAL
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown waveform kind {self.kind!r}")
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be finite and >= 0, got {self.amplitude}")
        if not (self.frequency >= 0 and math.isfinite(self.frequency)):
            raise ValueError(f"frequency must be finite and >= 0, got {self.frequency}")
        if not math.isfinite(self.phase):
            raise ValueError("phase must be finite")

    @property
    def is_static(self) -> bool:
        return self.amplitude == 0.0 or self.frequency == 0.0


def eval_waveform(w: Waveform, t):
    """Evaluate a waveform at time(s) ``t``; scalar in, scalar out."""
    arg = 2.0 * np.pi * w.frequency * (np.asarray(t, dtype=float) + w.phase)
    if w.kind == SINUSOIDAL:
        y = w.amplitude * np.sin(arg)
    else:
        y = (np.exp(np.sin(arg)) - 1.0 / _E) * w.amplitude * _BREATH_SCALE
    return float(y) if np.ndim(y) == 0 else y


@dataclass(frozen=True)
class RhythmicMotion:
    """Six per-axis waveforms sharing one frequency.

    Commanded motions also share one phase. A realised platform motion (see
    :func:`realize`) may carry small per-axis phase lags, so only the
    frequency is validated here.
    """

    axes: tuple[Waveform, ...] = field(default_factory=lambda: tuple(Waveform() for _ in AXES))

    def __post_init__(self):
        axes = tuple(self.axes)
        if len(axes) != 6:
            raise ValueError(f"RhythmicMotion needs 6 waveforms, got {len(axes)}")
        object.__setattr__(self, "axes", axes)
        freqs = {w.frequency for w in axes if w.amplitude > 0}
        if len(freqs) > 1:
            raise ValueError(f"all moving axes must share one frequency, got {sorted(freqs)}")

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[float], frequency: float, phase: float = 0.0,
                        kind: str | Sequence[str] = SINUSOIDAL) -> "RhythmicMotion":
        amplitudes = list(amplitudes)
        if len(amplitudes) != 6:
            raise ValueError(f"need 6 amplitudes, got {len(amplitudes)}")
        kinds = [kind] * 6 if isinstance(kind, str) else list(kind)
        return cls(tuple(Waveform(k, float(a), float(frequency), float(phase))
                         for k, a in zip(kinds, amplitudes)))

    @classmethod
    def static(cls) -> "RhythmicMotion":
        return cls()

    @property
    def frequency(self) -> float:
        moving = [w.frequency for w in self.axes if w.amplitude > 0]
        return moving[0] if moving else 0.0

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([w.amplitude for w in self.axes])

    @property
    def is_static(self) -> bool:
        return all(w.is_static for w in self.axes)

    def sample(self, t) -> np.ndarray:
        """Vectorised pose samples, shape ``(len(t), 6)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([np.broadcast_to(eval_waveform(w, t), t.shape) for w in self.axes], axis=1)


def motion_pose(m: RhythmicMotion, t: float) -> Pose6:
    return Pose6.from_array(m.sample(t)[0])


def apply_motion(mpose: Pose6, g: Pose6) -> Pose6:
    """Carry ``g`` with the platform: rotate about the origin, then translate."""
    if not np.any(_wrap_deg(mpose.angles)):
        # pure translation: keep g's angles as given rather than re-extracting them
        return Pose6(*(g.translation + mpose.translation), *g.angles)
    rm = mpose.rotation()
    trans = rm.apply(g.translation) + mpose.translation
    rz, ry, rx = (rm * g.rotation()).as_euler("zyx", degrees=True)
    return Pose6(*trans, rx, ry, rz)


def to_platform_frame(mpose: Pose6, p) -> np.ndarray:
    """Inverse of the translational part of :func:`apply_motion` for points."""
    return mpose.rotation().inv().apply(np.asarray(p, dtype=float) - mpose.translation)


def axis_mean(w: Waveform) -> float:
    """Time average of a waveform over one period (its constant value if static)."""
    if w.kind == SINUSOIDAL or w.amplitude == 0.0:
        return 0.0
    if w.frequency == 0.0:
        return eval_waveform(w, 0.0)
    # the mean of exp(sin x) over a period is I0(1)
    return float((np.i0(1.0) - 1.0 / _E) * w.amplitude * _BREATH_SCALE)


def mean_pose(m: RhythmicMotion) -> Pose6:
    """Platform pose averaged over one period, per axis."""
    return Pose6(*(axis_mean(w) for w in m.axes))


def period(m: RhythmicMotion) -> float:
    if m.is_static:
        raise NoMotion("motion is constant; it has no smallest period")
    return 1.0 / m.frequency


def amplitude(m: RhythmicMotion) -> float:
    """Largest translational excursion ``max_t |T(t)|`` in mm."""
    trans = m.axes[:3]
    if all(w.is_static for w in trans) and all(w.kind == SINUSOIDAL for w in trans):
        return 0.0
    moving = [w for w in trans if not w.is_static]
    if all(w.kind == SINUSOIDAL for w in trans) and len({w.phase for w in moving}) <= 1:
        return float(np.linalg.norm([w.amplitude for w in trans]))
    if m.frequency == 0.0:
        return float(np.linalg.norm(m.sample(0.0)[0, :3]))
    return sampled_amplitude(m)


def sampled_amplitude(m: RhythmicMotion, n: int = AMPLITUDE_SAMPLES) -> float:
    t = np.arange(n) / (n * m.frequency)
    return float(np.max(np.linalg.norm(m.sample(t)[:, :3], axis=1)))


@dataclass(frozen=True)
class PlatformVariation:
    """Trial-to-trial deviation of the physical platform from its command.

    ``frequency`` is the relative std of the realised frequency, ``phase`` the
    std (s) of the common start offset, ``axis_phase`` the std (s) of an extra
    independent lag of each moving axis relative to the reference axis (the
    largest translational amplitude, or the largest overall if no axis
    translates).
    """

    frequency: float = 0.0
    phase: float = 0.0
    axis_phase: float = 0.0

    def __post_init__(self):
        for name in ("frequency", "phase", "axis_phase"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"variation.{name} must be finite and >= 0, got {v}")


def realize(m: RhythmicMotion, variation: PlatformVariation, rng: np.random.Generator) -> RhythmicMotion:
    """Draw the motion the platform actually performs for one trial.

    Draws are taken in a fixed order whether or not the motion is static so
    that downstream random streams stay aligned across scenarios.
    """
    scale = 1.0 + variation.frequency * rng.standard_normal()
    shift = variation.phase * rng.standard_normal()
    lags = variation.axis_phase * rng.standard_normal(6)
    if m.is_static:
        return m
    scale = max(scale, 0.1)
    amps = m.amplitudes
    ref = int(np.argmax(amps[:3])) if amps[:3].max() > 0 else int(np.argmax(amps))
    lags[ref] = 0.0
    lags[amps == 0] = 0.0
    axes = tuple(replace(w, frequency=w.frequency * scale, phase=w.phase + shift + lags[i])
                 for i, w in enumerate(m.axes))
    return RhythmicMotion(axes)


def mode_amplitudes(mode: str, translation_norm: float, rotation_norm: float = 15.0,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-axis amplitudes for the standard motion modes.

    ``none``: no motion; ``x``: all translation on x; ``3d``: a random positive
    direction in translation with the given norm; ``6d``: as ``3d`` plus a
    random positive rotational direction with norm ``rotation_norm`` degrees.
    """
    mode = mode.lower()
    amps = np.zeros(6)
    if mode == "none":
        return amps
    if mode == "x":
        amps[0] = translation_norm
        return amps
    if mode not in ("3d", "6d"):
        raise ValueError(f"unknown motion mode {mode!r}")
    rng = rng if rng is not None else np.random.default_rng(0)
    d = np.abs(rng.standard_normal(3))
    amps[:3] = translation_norm * d / np.linalg.norm(d)
    if mode == "6d":
        r = np.abs(rng.standard_normal(3))
        amps[3:] = rotation_norm * r / np.linalg.norm(r)
    return amps
