"""Closed-form decay rates and time scales."""

from __future__ import annotations

import math

from ..errors import ParameterError

__all__ = ["gamma_closed_form", "fgr_rate", "crossover_time"]


def gamma_closed_form(u: float, gamma: float, d: float) -> float:
    """Amplitude decay rate ``u^2 / (gamma + d/pi)`` for constant couplings.

    Reduces to the golden-rule value ``pi u^2 / d`` at ``gamma = 0`` and to
    the Zeno rate ``u^2 / gamma`` when ``gamma >> d``.
    """
    if gamma < 0 or d < 0:
        raise ParameterError("gamma and d must be non-negative")
    if gamma == 0 and d == 0:
        raise ParameterError("decay rate undefined for gamma = d = 0")
    return u * u / (gamma + d / math.pi)


def fgr_rate(u_bar: float, d: float) -> float:
    """Golden-rule amplitude rate ``lambda_0 = pi u_bar^2 / d``."""
    if d <= 0:
        raise ParameterError("golden-rule rate needs a positive level spacing")
    return math.pi * u_bar * u_bar / d


def crossover_time(u: float, gamma: float, d: float) -> float:
    """Time ``(gamma/u^2) ln(gamma/d)`` after which the non-Zeno states take over."""
    if not (d > 0 and u != 0):
        raise ParameterError("crossover time needs d > 0 and u != 0")
    if gamma <= d:
        raise ParameterError(f"no Zeno regime for gamma={gamma} <= d={d}")
    return gamma / (u * u) * math.log(gamma / d)
