"""Scenario files: JSON schema, defaults, validation and sweeps.

A scenario is a JSON object with the top-level keys ``motion``, ``sensor``,
``actuation``, ``task``, ``policies``, ``n_trials`` and ``seed`` (plus an
optional ``name``). Only ``motion`` and ``task`` are required; everything
else falls back to the calibrated defaults below. Unknown keys produce a
:class:`ConfigWarning` and are otherwise ignored.
"""

from __future__ import annotations

import copy
import json
import math
import warnings
from dataclasses import asdict, dataclass, fields, replace
from typing import Any

import numpy as np

from ..control import POLICIES, ActuationModel
from ..motion import KINDS, SINUSOIDAL, PlatformVariation, RhythmicMotion, mode_amplitudes
from ..sensing import MIN_PERIODS, SensorModel
from ..tasks import CUTTING, DEBRIDEMENT, MODE_STREAM, CuttingTask, DebridementTask, stream

MODES = ("none", "x", "3d", "6d")

# output of `calibrate` on the reference cutting scenario, held fixed afterwards
CALIBRATED_VARIATION = PlatformVariation(frequency=0.03929, phase=0.2718, axis_phase=0.5)
CALIBRATED_SENSOR = SensorModel(sigma_trans=0.5, sigma_rot=0.25)
CALIBRATED_ACTUATION = ActuationModel(speed=20.0, latency_mean=0.6, latency_jitter=0.1738)


class ConfigError(ValueError):
    """Invalid scenario; ``path`` names the offending field, e.g. ``sensor.fps``."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MotionSpec:
    """Commanded platform motion.

    Give either explicit per-axis ``amplitudes`` or a ``mode`` (``none``,
    ``x``, ``3d``, ``6d``) with norms; random mode directions are drawn per
    trial.
    """

    frequency: float
    amplitudes: tuple[float, ...] | None = None
    mode: str | None = None
    translation_norm: float = 25.0
    rotation_norm: float = 15.0
    phase: float = 0.0
    kind: str = SINUSOIDAL
    variation: PlatformVariation = CALIBRATED_VARIATION

    def motion(self, seed: int = 0) -> RhythmicMotion:
        """The commanded motion for a trial seed."""
        if self.amplitudes is not None:
            amps = np.array(self.amplitudes)
        else:
            rng = np.random.default_rng(stream(seed, MODE_STREAM))
            amps = mode_amplitudes(self.mode, self.translation_norm, self.rotation_norm, rng)
        return RhythmicMotion.from_amplitudes(amps, self.frequency, self.phase, self.kind)


@dataclass(frozen=True)
class Scenario:
    motion: MotionSpec
    task: CuttingTask | DebridementTask
    sensor: SensorModel = CALIBRATED_SENSOR
    actuation: ActuationModel = CALIBRATED_ACTUATION
    policies: tuple[str, ...] = POLICIES
    n_trials: int = 20
    seed: int = 0
    name: str = ""

    @property
    def task_kind(self) -> str:
        return CUTTING if isinstance(self.task, CuttingTask) else DEBRIDEMENT


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple
    template: Scenario

    def __post_init__(self):
        if not self.values:
            raise ConfigError("values", "sweep needs at least one value")
        d = scenario_to_dict(self.template)
        _lookup(d, self.param)

    def scenarios(self) -> list[Scenario]:
        base = scenario_to_dict(self.template)
        out = []
        for v in self.values:
            d = copy.deepcopy(base)
            _assign(d, self.param, v)
            if self.param.startswith("motion.mode") and v is not None:
                d["motion"]["amplitudes"] = None
            elif self.param.startswith("motion.amplitudes"):
                d["motion"]["mode"] = None
            out.append(scenario_from_dict(d))
        return out


# ---------------------------------------------------------------- parsing


def _warn_unknown(d: dict, known, path: str):
    for k in d:
        if k not in known:
            warnings.warn(f"{path + '.' if path else ''}{k}: unknown field ignored", ConfigWarning, stacklevel=4)


def _obj(d, path) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(path, f"expected an object, got {type(d).__name__}")
    return d


def _num(v, path, lo=None, strict=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    if integer and int(v) != v:
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if lo is not None and (v <= lo if strict else v < lo):
        raise ConfigError(path, f"must be {'>' if strict else '>='} {lo}, got {v}")
    return int(v) if integer else float(v)


def _dataclass_from(cls, d, path, defaults):
    """Build ``cls`` from ``d`` over the field values of ``defaults``."""
    d = _obj(d, path)
    names = [f.name for f in fields(cls)]
    _warn_unknown(d, names, path)
    kw = {}
    for f in fields(cls):
        if f.name in d:
            is_int = isinstance(getattr(defaults, f.name), int) and not isinstance(getattr(defaults, f.name), bool)
            kw[f.name] = _num(d[f.name], f"{path}.{f.name}", integer=is_int)
    try:
        return replace(defaults, **kw)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _motion_from(d) -> MotionSpec:
    d = _obj(d, "motion")
    known = [f.name for f in fields(MotionSpec)]
    _warn_unknown(d, known, "motion")
    if "frequency" not in d:
        raise ConfigError("motion.frequency", "required field missing")
    freq = _num(d["frequency"], "motion.frequency", lo=0)
    amps = d.get("amplitudes")
    mode = d.get("mode")
    if (amps is None) == (mode is None):
        raise ConfigError("motion", "give exactly one of 'amplitudes' or 'mode'")
    if amps is not None:
        if not isinstance(amps, list) or len(amps) != 6:
            raise ConfigError("motion.amplitudes", "expected a list of 6 numbers")
        amps = tuple(_num(a, f"motion.amplitudes[{i}]", lo=0) for i, a in enumerate(amps))
    else:
        if not isinstance(mode, str) or mode.lower() not in MODES:
            raise ConfigError("motion.mode", f"expected one of {MODES}, got {mode!r}")
        mode = mode.lower()
    kind = d.get("kind", SINUSOIDAL)
    if kind not in KINDS:
        raise ConfigError("motion.kind", f"expected one of {KINDS}, got {kind!r}")
    variation = CALIBRATED_VARIATION
    if "variation" in d:
        variation = _dataclass_from(PlatformVariation, d["variation"], "motion.variation", CALIBRATED_VARIATION)
    return MotionSpec(
        frequency=freq,
        amplitudes=amps,
        mode=mode,
        translation_norm=_num(d.get("translation_norm", 25.0), "motion.translation_norm", lo=0),
        rotation_norm=_num(d.get("rotation_norm", 15.0), "motion.rotation_norm", lo=0),
        phase=_num(d.get("phase", 0.0), "motion.phase"),
        kind=kind,
        variation=variation,
    )


def _task_from(d):
    d = dict(_obj(d, "task"))
    if "kind" not in d:
        raise ConfigError("task.kind", "required field missing")
    kind = d.pop("kind")
    if kind == CUTTING:
        return _dataclass_from(CuttingTask, d, "task", CuttingTask())
    if kind == DEBRIDEMENT:
        return _dataclass_from(DebridementTask, d, "task", DebridementTask())
    raise ConfigError("task.kind", f"expected {CUTTING!r} or {DEBRIDEMENT!r}, got {kind!r}")


def scenario_from_dict(d: dict) -> Scenario:
    """Validate a parsed scenario object and fill in defaults."""
    d = _obj(d, "")
    known = ["name", "motion", "sensor", "actuation", "task", "policies", "n_trials", "seed"]
    _warn_unknown(d, known, "")
    for key in ("motion", "task"):
        if key not in d:
            raise ConfigError(key, "required field missing")
    motion = _motion_from(d["motion"])
    task = _task_from(d["task"])
    sensor = _dataclass_from(SensorModel, d.get("sensor", {}), "sensor", CALIBRATED_SENSOR)
    act = _dataclass_from(ActuationModel, d.get("actuation", {}), "actuation", CALIBRATED_ACTUATION)
    pols = d.get("policies", list(POLICIES))
    if not isinstance(pols, list) or not pols:
        raise ConfigError("policies", "expected a non-empty list")
    for i, p in enumerate(pols):
        if p not in POLICIES:
            raise ConfigError(f"policies[{i}]", f"expected one of {POLICIES}, got {p!r}")
    if len(set(pols)) != len(pols):
        raise ConfigError("policies", "duplicate policy")
    n_trials = _num(d.get("n_trials", 20), "n_trials", lo=1, integer=True)
    seed = _num(d.get("seed", 0), "seed", lo=0, integer=True)
    name = d.get("name", "")
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")
    sc = Scenario(motion, task, sensor, act, tuple(pols), n_trials, seed, name)
    validate(sc)
    return sc


def validate(sc: Scenario) -> None:
    """Cross-field checks: sampling rate and observation length vs the motion."""
    m = sc.motion
    moving = m.frequency > 0 and (m.amplitudes is None and m.mode != "none" or
                                  m.amplitudes is not None and any(a > 0 for a in m.amplitudes))
    if not moving:
        return
    if sc.sensor.fps <= 2.0 * m.frequency:
        raise ConfigError("sensor.fps", f"{sc.sensor.fps} fps must exceed twice the motion frequency "
                                        f"{m.frequency} Hz (Nyquist)")
    if sc.sensor.duration * m.frequency < MIN_PERIODS - 1e-9:
        raise ConfigError("sensor.duration", f"{sc.sensor.duration} s covers fewer than {MIN_PERIODS} periods")


def scenario_to_dict(sc: Scenario) -> dict:
    """Fully resolved scenario, including every default."""
    m = sc.motion
    task = asdict(sc.task)
    return {
        "name": sc.name,
        "motion": {
            "frequency": m.frequency,
            "amplitudes": None if m.amplitudes is None else list(m.amplitudes),
            "mode": m.mode,
            "translation_norm": m.translation_norm,
            "rotation_norm": m.rotation_norm,
            "phase": m.phase,
            "kind": m.kind,
            "variation": asdict(m.variation),
        },
        "sensor": asdict(sc.sensor),
        "actuation": asdict(sc.actuation),
        "task": {"kind": sc.task_kind, **task},
        "policies": list(sc.policies),
        "n_trials": sc.n_trials,
        "seed": sc.seed,
    }


def _drop_nulls(d):
    # resolved dicts carry explicit nulls for the unused amplitude/mode choice
    motion = d.get("motion")
    if isinstance(motion, dict):
        for k in ("amplitudes", "mode"):
            if k in motion and motion[k] is None:
                del motion[k]
    return d


def read_scenario(path) -> Scenario:
    """Load and validate a scenario file. IO problems raise ``OSError``."""
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(_drop_nulls(d))


def write_scenario(sc: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(sc), fh, indent=2)
        fh.write("\n")


def scenario_from_json(text: str) -> Scenario:
    return scenario_from_dict(_drop_nulls(json.loads(text)))


# ---------------------------------------------------------------- dotted paths


def _split(path: str) -> list[Any]:
    parts: list[Any] = []
    for tok in path.split("."):
        if not tok:
            raise ConfigError(path, "empty path component")
        while "[" in tok:
            head, rest = tok.split("[", 1)
            if head:
                parts.append(head)
            idx, tok = rest.split("]", 1)
            parts.append(int(idx))
        if tok:
            parts.append(tok)
    return parts


def _walk(d, parts, path):
    cur = d
    for p in parts:
        try:
            cur = cur[p]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(path, "parameter path does not resolve in the scenario") from None
    return cur


def _lookup(d, path: str):
    return _walk(d, _split(path), path)


def _assign(d, path: str, value) -> None:
    parts = _split(path)
    parent = _walk(d, parts[:-1], path)
    _walk(parent, parts[-1:], path)
    parent[parts[-1]] = value


def parse_value(text: str):
    """Interpret a CLI sweep value: JSON if possible, else a bare string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip()
