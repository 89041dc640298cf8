"""Per-axis sinusoid fitting and extremum timing.

The model for one axis is ``offset + alpha*sin(omega*(t + phi))``. Fitting
runs in three stages: a zero-padded periodogram gives a coarse frequency,
linear least squares on a sin/cos basis gives amplitude, phase and offset at
that frequency, and damped Gauss-Newton refines all four parameters jointly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from .sensing import TrackSeries

OK = "ok"
FLAT = "flat"
NONCONVERGED = "nonconverged"

PAD_FACTOR = 16
MAX_ITER = 100
# peak power relative to DC + peak below this counts as no oscillation
FLAT_REL_POWER = 1e-6
# peak power must beat the median periodogram level by this factor
FLAT_SNR = 30.0
N_TRANSLATION = 3


class EstimationError(ValueError):
    pass


class NonConvergence(EstimationError):
    pass


class FlatFit(EstimationError):
    pass


class AllFlat(EstimationError):
    pass


@dataclass(frozen=True)
class SineFit:
    alpha: float
    omega: float
    phi: float
    offset: float
    rmse: float
    status: str = OK

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.status == OK and not self.omega > 0:
            raise ValueError("omega must be > 0 for a non-flat fit")

    @classmethod
    def flat(cls, offset: float = 0.0, rmse: float = 0.0) -> "SineFit":
        return cls(0.0, 0.0, 0.0, offset, rmse, FLAT)

    @property
    def is_flat(self) -> bool:
        return self.status == FLAT or self.alpha == 0.0

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def frequency(self) -> float:
        return self.omega / (2.0 * math.pi)

    def __call__(self, t):
        return self.offset + self.displacement(t)

    def displacement(self, t):
        """Oscillating part only, i.e. ``C[t]`` without the DC term."""
        if self.is_flat:
            return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
        return self.alpha * np.sin(self.omega * (np.asarray(t, dtype=float) + self.phi))

    def velocity(self, t):
        return self.alpha * self.omega * np.cos(self.omega * (np.asarray(t, dtype=float) + self.phi))

    def acceleration(self, t):
        return -self.alpha * self.omega**2 * np.sin(self.omega * (np.asarray(t, dtype=float) + self.phi))


def _normalize(alpha, omega, theta_at_zero, offset):
    if alpha < 0:
        alpha, theta_at_zero = -alpha, theta_at_zero + math.pi
    if omega < 0:
        omega, theta_at_zero = -omega, math.pi - theta_at_zero
    theta = theta_at_zero % (2.0 * math.pi)
    return alpha, omega, theta / omega, offset


def _coarse_frequency(t: np.ndarray, y: np.ndarray):
    """Return (omega, is_flat) from the padded periodogram peak."""
    n = len(y)
    dt = (t[-1] - t[0]) / (n - 1)
    npad = 1 << int(math.ceil(math.log2(PAD_FACTOR * n)))
    centered = y - y.mean()
    power = np.abs(np.fft.rfft(centered, npad)) ** 2
    dc = (n * y.mean()) ** 2
    k = int(np.argmax(power[1:]) + 1)
    peak = power[k]
    if peak <= FLAT_REL_POWER * (dc + peak) or peak == 0.0:
        return 0.0, True
    raw = np.abs(np.fft.rfft(centered)) ** 2
    floor = np.median(raw[1:]) if len(raw) > 2 else 0.0
    # padded bins carry the same power scale as unpadded ones
    if floor > 0 and peak < FLAT_SNR * floor:
        return 0.0, True
    if 1 <= k < len(power) - 1:
        a, b, c = np.log(power[k - 1 : k + 2] + 1e-300)
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom < 0 else 0.0
    else:
        shift = 0.0
    freq = (k + shift) / (npad * dt)
    return 2.0 * math.pi * freq, False


def _linear_fit(t, y, omega):
    basis = np.column_stack([np.sin(omega * t), np.cos(omega * t), np.ones_like(t)])
    (p, q, c), *_ = np.linalg.lstsq(basis, y, rcond=None)
    return math.hypot(p, q), math.atan2(q, p), c


def _rmse(t, y, alpha, omega, theta, offset):
    return math.sqrt(np.mean((y - offset - alpha * np.sin(omega * t + theta)) ** 2))


def fit_axis(t: Sequence[float], y: Sequence[float]) -> SineFit:
    """Least-squares sinusoid fit of one time series.

    Returns a ``status="flat"`` fit with ``alpha=0`` when the series shows no
    oscillation above the noise floor. Raises :class:`NonConvergence` if the
    joint refinement has not settled after ``MAX_ITER`` iterations.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1 or len(t) < 4:
        raise EstimationError("need matching 1-D series with at least 4 samples")
    omega0, flat = _coarse_frequency(t, y)
    if flat:
        return SineFit.flat(float(y.mean()), float(y.std()))

    # centre time for conditioning; theta is the phase at tc
    tc = 0.5 * (t[0] + t[-1])
    s = t - tc
    alpha, theta, offset = _linear_fit(s, y, omega0)
    x = np.array([alpha, omega0, theta, offset])
    rmse_coarse = _rmse(s, y, *x)

    def residual(x):
        a, w, th, c = x
        return y - c - a * np.sin(w * s + th)

    r = residual(x)
    cost = r @ r
    lam = 1e-3
    for _ in range(MAX_ITER):
        a, w, th, c = x
        arg = w * s + th
        sn, cs = np.sin(arg), np.cos(arg)
        jac = np.column_stack([sn, a * cs * s, a * cs, np.ones_like(s)])
        jtj = jac.T @ jac
        g = jac.T @ r
        scale = np.sqrt(np.diag(jtj)) + 1e-300
        while True:
            step = np.linalg.solve(jtj + lam * np.diag(scale**2), g)
            x_new = x + step
            r_new = residual(x_new)
            cost_new = r_new @ r_new
            if cost_new <= cost:
                break
            lam *= 10.0
            if lam > 1e12:
                step = np.zeros(4)
                x_new, r_new, cost_new = x, r, cost
                break
        converged = (cost_new == 0.0 or cost - cost_new <= 1e-14 * cost
                     or bool(np.all(np.abs(step) <= 1e-12 * (np.abs(x) + 1e-9))))
        x, r, cost = x_new, r_new, cost_new
        lam = max(lam / 10.0, 1e-12)
        if converged:
            break
    else:
        raise NonConvergence(f"refinement did not converge in {MAX_ITER} iterations")

    a, w, th, c = x
    rmse = math.sqrt(cost / len(y))
    if rmse > rmse_coarse:
        a, w, th, c = alpha, omega0, theta, offset
        rmse = rmse_coarse
    alpha, omega, phi, offset = _normalize(a, w, th - w * tc, c)
    return SineFit(float(alpha), float(omega), float(phi), float(offset), float(rmse))


def coarse_fit(t, y) -> SineFit:
    """Periodogram plus linear stage only, without joint refinement."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    omega0, flat = _coarse_frequency(t, y)
    if flat:
        return SineFit.flat(float(y.mean()), float(y.std()))
    alpha, theta, offset = _linear_fit(t, y, omega0)
    rmse = _rmse(t, y, alpha, omega0, theta, offset)
    alpha, omega, phi, offset = _normalize(alpha, omega0, theta, offset)
    return SineFit(float(alpha), float(omega), float(phi), float(offset), float(rmse))


def fit_all(track: TrackSeries) -> list[SineFit]:
    """Fit every pose axis; a failed refinement falls back to the coarse fit."""
    fits = []
    for k in range(6):
        y = track.axis(k)
        try:
            fits.append(fit_axis(track.t, y))
        except NonConvergence:
            fits.append(replace(coarse_fit(track.t, y), status=NONCONVERGED))
    return fits


def dominant_axis(fits: Sequence[SineFit]) -> int:
    """Index of the largest-amplitude translational axis.

    Rotational axes are only considered when every translational fit is flat.
    Ties go to the lowest index.
    """
    alphas = [0.0 if f.is_flat else f.alpha for f in fits]
    trans = alphas[:N_TRANSLATION]
    if max(trans) > 0:
        return int(np.argmax(trans))
    if max(alphas) > 0:
        return int(np.argmax(alphas))
    raise AllFlat("every axis fit is flat")


@dataclass(frozen=True)
class ExtremaSchedule:
    times: tuple[float, ...]
    dominant_axis: int
    fit: SineFit


def next_extremum(fit: SineFit, t_start: float) -> float:
    """Smallest ``t >= t_start`` with ``omega*(t+phi) = pi/2 (mod pi)``."""
    if fit.is_flat:
        raise FlatFit("cannot schedule extrema of a flat fit")
    half = math.pi / fit.omega
    n = math.ceil((t_start + fit.phi) / half - 0.5 - 1e-9)
    return (n + 0.5) * half - fit.phi


def iter_extrema(fit: SineFit, t_start: float) -> Iterator[float]:
    first = next_extremum(fit, t_start)
    half = math.pi / fit.omega
    i = 0
    while True:
        yield first + i * half
        i += 1


def extrema_schedule(fit: SineFit, t_start: float, k: int, axis: int = 0) -> ExtremaSchedule:
    if k < 1:
        raise ValueError("k must be >= 1")
    gen = iter_extrema(fit, t_start)
    return ExtremaSchedule(tuple(next(gen) for _ in range(k)), axis, fit)


def window_halfwidth(fit: SineFit, eps: float) -> float:
    """Half-width around an extremum where the motion stays within ``eps``.

    Second-order estimate from the curvature at the peak.
    """
    if fit.is_flat:
        raise FlatFit("flat fit has no extremum window")
    if not eps > 0:
        raise ValueError("eps must be > 0")
    return math.sqrt(2.0 * eps / (fit.alpha * fit.omega**2))


def worst_case_error(fit: SineFit, dt: float) -> float:
    """Displacement from a timing error ``dt`` incurred at peak velocity."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    return fit.alpha * fit.omega * dt


def extremum_error(fit: SineFit, dt: float) -> float:
    """Second-order displacement from a timing error ``dt`` at an extremum."""
    return 0.5 * fit.alpha * fit.omega**2 * dt**2


def perturb_fit(fit: SineFit, freq_rel: float = 0.0, phase_shift: float = 0.0, t_ref: float = 0.0) -> SineFit:
    """Copy of ``fit`` with a relative frequency error and a time shift (s).

    The frequency is scaled about ``t_ref``: at that instant the perturbed
    model is exactly ``phase_shift`` seconds ahead of the original.
    """
    if fit.is_flat:
        return fit
    omega = fit.omega * (1.0 + freq_rel)
    theta = fit.omega * (t_ref + fit.phi + phase_shift)
    phi = (theta / omega - t_ref) % (2.0 * math.pi / omega)
    return replace(fit, omega=omega, phi=phi)


def wrapped_phase_error(phi_est: float, phi_ref: float, period: float) -> float:
    d = (phi_est - phi_ref) % period
    return d - period if d > 0.5 * period else d
