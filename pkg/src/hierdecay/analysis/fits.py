"""Least-squares fits of survival-probability curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from ..dynamics import Trajectory
from ..errors import FitError

__all__ = [
    "FitResult",
    "fit_exponential",
    "fit_damped_cosine",
    "fit_sinc",
    "fluctuation_amplitude",
    "sinc_squared",
    "damped_cosine_squared",
]


@dataclass(frozen=True)
class FitResult:
    model: str
    parameters: dict
    window: tuple
    residual: float

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "parameters": dict(self.parameters),
            "window": list(self.window),
            "residual": self.residual,
        }


def _windowed(traj: Trajectory, window: Optional[Sequence[float]]):
    t = traj.times
    p = traj.p0
    if window is None:
        window = (float(t[0]), float(t[-1]))
    t1, t2 = float(window[0]), float(window[1])
    if not t1 < t2:
        raise FitError(f"empty window {window}")
    if t1 < t[0] or t2 > t[-1]:
        raise FitError(f"window {window} outside the trajectory span [{t[0]}, {t[-1]}]")
    mask = (t >= t1) & (t <= t2)
    return t[mask], p[mask], (t1, t2)


def _relative_rms(model: np.ndarray, data: np.ndarray) -> float:
    scale = np.sqrt(np.mean(data * data))
    return float(np.sqrt(np.mean((model - data) ** 2)) / scale) if scale > 0 else 0.0


def fit_exponential(traj: Trajectory, window: Sequence[float]) -> FitResult:
    """Straight-line fit of ``ln p0`` against ``t``.

    ``rate`` is the amplitude decay rate, i.e. minus half the slope.
    """
    t, p, window = _windowed(traj, window)
    if t.size < 10:
        raise FitError(f"window {window} holds {t.size} samples, need >= 10")
    if np.min(p) <= 1e-12:
        raise FitError(f"survival probability drops to {np.min(p):.3g} <= 1e-12 inside {window}")
    slope, intercept = np.polyfit(t, np.log(p), 1)
    model = np.exp(intercept + slope * t)
    residual = float(np.sqrt(np.mean(((model - p) / p) ** 2)))
    return FitResult(
        "exponential",
        {"rate": -slope / 2, "amplitude": math.exp(intercept)},
        window,
        residual,
    )


def damped_cosine_squared(t, frequency, decay_rate, amplitude=1.0, phase=0.0):
    return amplitude * np.exp(-2 * decay_rate * t) * np.cos(frequency * t + phase) ** 2


def _dominant_frequency(t: np.ndarray, p: np.ndarray) -> float:
    """Angular frequency ``w`` of the ``cos^2(w t)`` oscillation in ``p``."""
    # the derivative suppresses the slowly decaying envelope relative to the oscillation
    y = np.gradient(p, t)
    y = y - y.mean()
    span = t[-1] - t[0]
    dt = span / (t.size - 1)
    pad = 8 * t.size
    spec = np.abs(np.fft.rfft(y, n=pad))
    freqs = np.fft.rfftfreq(pad, d=dt)
    k = int(np.argmax(spec[1:])) + 1
    # refine on the continuous periodogram (handles non-uniform grids too)
    def neg_power(f):
        return -abs(np.sum(y * np.exp(-2j * np.pi * f * t)))

    res = 1.0 / span
    f = minimize_scalar(
        neg_power, bounds=(max(freqs[k] - res, 0.0), freqs[k] + res), method="bounded",
        options={"xatol": 1e-6 * res},
    ).x
    return math.pi * f


def fit_damped_cosine(traj: Trajectory, window: Optional[Sequence[float]] = None) -> FitResult:
    """Fit ``p0 = A exp(-2 delta t) cos^2(Omega t + phi)``.

    ``frequency`` is ``Omega`` (the real part of the oscillating eigenvalue
    pair) and ``decay_rate`` is ``delta``. ``A`` and ``phi`` absorb the small
    weight carried by the fast-decaying third state.
    """
    t, p, window = _windowed(traj, window)
    if t.size < 20:
        raise FitError(f"window {window} holds {t.size} samples, too few for an oscillation fit")
    omega = _dominant_frequency(t, p)
    periods = omega * (t[-1] - t[0]) / math.pi
    if periods < 5:
        raise FitError(f"only {periods:.2f} oscillation periods visible, need >= 5")

    # envelope from the local maxima
    peaks = np.flatnonzero((p[1:-1] >= p[:-2]) & (p[1:-1] >= p[2:])) + 1
    delta0 = 0.0
    if peaks.size >= 2 and np.all(p[peaks] > 0):
        delta0 = max(-np.polyfit(t[peaks], np.log(p[peaks]), 1)[0] / 2, 0.0)
    amp0 = float(p[peaks[0]] * math.exp(2 * delta0 * t[peaks[0]])) if peaks.size else float(p.max())

    def resid(x):
        a, w, dl, ph = x
        return damped_cosine_squared(t, w, dl, a, ph) - p

    best = None
    for ph0 in (0.0, math.pi / 4, -math.pi / 4, math.pi / 2):
        sol = least_squares(resid, [amp0, omega, delta0, ph0 - omega * t[0]], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
    a, w, dl, ph = best.x
    if w < 0:
        w, ph = -w, -ph
    ph = (ph + math.pi / 2) % math.pi - math.pi / 2
    model = damped_cosine_squared(t, w, dl, a, ph)
    return FitResult(
        "damped_cosine",
        {"frequency": float(w), "decay_rate": float(dl), "amplitude": float(a), "phase": float(ph)},
        window,
        _relative_rms(model, p),
    )


def sinc_squared(t, bandwidth):
    """``|sin(D t/2) / (D t/2)|^2``: survival of a state spread flat over a band ``D``."""
    return np.sinc(np.asarray(t) * bandwidth / (2 * np.pi)) ** 2


def fit_sinc(traj: Trajectory, window: Sequence[float]) -> FitResult:
    """One-parameter fit of ``p0`` to ``sinc^2(D t / 2)``; returns ``bandwidth = D``."""
    t, p, window = _windowed(traj, window)
    if t.size < 10:
        raise FitError(f"window {window} holds {t.size} samples, need >= 10")
    t1, t2 = window

    def sse(a):
        return float(np.sum((sinc_squared(t, a) - p) ** 2))

    dt = np.min(np.diff(t)) if t.size > 1 else t2 - t1
    grid = np.geomspace(math.pi / t2, math.pi / max(dt, 1e-300), 600)
    k = int(np.argmin([sse(a) for a in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    a = minimize_scalar(sse, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * hi}).x
    first_zero = 2 * math.pi / a
    if not t1 <= first_zero <= t2:
        raise FitError(
            f"window {window} excludes the first zero of the fitted envelope (t = {first_zero:.4g})"
        )
    return FitResult(
        "sinc",
        {"bandwidth": float(a), "first_zero": first_zero},
        window,
        _relative_rms(sinc_squared(t, a), p),
    )


def fluctuation_amplitude(
    source,
    window: Sequence[float],
    bandwidth: Optional[float] = None,
    centered: bool = True,
) -> float:
    """Size of the late-time fluctuations of ``p0``.

    For a :class:`Trajectory`: rms of ``p0`` over the window (minus its window
    mean when ``centered``). For ensemble statistics: rms over the window of the
    per-time standard deviation across realizations.
    """
    t1, t2 = float(window[0]), float(window[1])
    if bandwidth is not None and bandwidth > 0 and t1 <= 3.0 / bandwidth:
        raise FitError(f"window start {t1} is not past the initial decay (need > 3/D = {3.0 / bandwidth:.4g})")
    times = source.times
    mask = (times >= t1) & (times <= t2)
    if mask.sum() < 50:
        raise FitError(f"window {tuple(window)} holds {int(mask.sum())} samples, need >= 50")
    if isinstance(source, Trajectory):
        p = source.p0[mask]
        if centered:
            p = p - p.mean()
        return float(np.sqrt(np.mean(p * p)))
    return float(np.sqrt(np.mean(source.var_p0[mask])))
