"""Classification of the random-coupling regimes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

from ..model import ModelParams
from .rates import gamma_closed_form

__all__ = ["Case", "RegimeReport", "classify_regime", "THRESHOLDS"]

# ratio boundaries standing in for the >>, ~ and << of the asymptotic analysis
THRESHOLDS = {
    "case_I_u0_over_D": 3.0,
    "case_II_u0_over_D": (1 / 3, 3.0),
    "case_IV_u0_over_d": 1.0,
    "fgr_u_bar_over_d": 10.0,
}


class Case(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    ORDERED = "ordered"


@dataclass(frozen=True)
class RegimeReport:
    case: Case
    u0: float
    ratios: dict
    lambda0: Optional[float]
    crossover_time: Optional[float]
    fgr: bool = False
    decay_rate: Optional[float] = None
    thresholds: dict = field(default_factory=lambda: dict(THRESHOLDS))

    @property
    def label(self) -> str:
        if self.case is Case.ORDERED:
            return "Ordered"
        return f"Case {self.case.value}" + (" (FGR)" if self.fgr else "")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["case"] = self.case.value
        out["label"] = self.label
        out["thresholds"] = {k: list(v) if isinstance(v, tuple) else v for k, v in self.thresholds.items()}
        return out


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return math.inf if a > 0 else math.nan
    return a / b


def classify_regime(params: ModelParams) -> RegimeReport:
    """Assign one of the regimes by comparing ``u0 = u_bar sqrt(N)`` with ``D`` and ``d``.

    Case I: ``u0 > 3D``; Case II: ``D/3 <= u0 <= 3D``; Case IV: ``u0 < d``;
    Case III otherwise, flagged FGR when ``u_bar > 10 d``. Constant couplings
    get an ``ordered`` report carrying the closed-form decay rate.
    """
    D, d, gamma = params.bandwidth, params.spacing, params.gamma
    u_bar, u0 = params.u_bar, params.u0
    ratios = {
        "u0_over_D": _ratio(u0, D),
        "u0_over_d": _ratio(u0, d),
        "u_bar_over_d": _ratio(u_bar, d),
    }
    lambda0 = math.pi * u_bar**2 / d if d > 0 else None
    crossover = gamma / u_bar**2 * math.log(gamma / d) if (d > 0 and u_bar > 0 and gamma > d) else None

    if not params.coupling.is_random:
        rate = gamma_closed_form(u_bar, gamma, d) if (gamma > 0 or d > 0) else None
        return RegimeReport(Case.ORDERED, u0, ratios, lambda0, crossover, decay_rate=rate)

    lo, hi = THRESHOLDS["case_II_u0_over_D"]
    fgr = False
    if u0 > THRESHOLDS["case_I_u0_over_D"] * D:
        case = Case.I
    elif lo * D <= u0 <= hi * D:
        case = Case.II
    elif u0 < THRESHOLDS["case_IV_u0_over_d"] * d:
        case = Case.IV
    else:
        case = Case.III
        fgr = u_bar > THRESHOLDS["fgr_u_bar_over_d"] * d
    return RegimeReport(case, u0, ratios, lambda0, crossover, fgr=fgr)
