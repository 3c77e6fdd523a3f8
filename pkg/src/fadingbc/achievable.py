"""Superposition-coding inner bound and the gap to the outer bound."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bounds import CaseLabel, UpperBoundReport
from .channel import ChannelSpec
from .errors import BetaOutOfRange, GapExceedsBound, GapNegative

TIE_TOL = 1e-12
GAP_TOL = 1e-9


class Setting(str, enum.Enum):
    CASE1_BOUND = "Case1Bound"
    CASE3_BOUND = "Case3Bound"
    SETTING1_B1 = "Setting1_B1"
    SETTING2_B2 = "Setting2_B2"
    SETTING3_B3 = "Setting3_B3"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AchievableReport:
    beta_star: float
    sr_ach: float
    endpoint_values: tuple[float, float]  # (beta=0, beta=1)


@dataclass(frozen=True)
class GapReport:
    gap: float
    gap_bound: float
    setting: Setting
    beta_preference: float


def r_ach(beta: float, spec: ChannelSpec) -> float:
    """Achievable sum rate when a fraction ``beta`` of power carries user 2's layer."""
    if not 0.0 <= beta <= 1.0:
        raise BetaOutOfRange(f"beta={beta!r} not in [0, 1]")
    q = spec.q
    g2 = spec.g * spec.g
    fading = math.fsum(
        pi * math.log2((1.0 + hi * hi * q) / (1.0 + beta * hi * hi * q)) for hi, pi in zip(spec.h, spec.p)
    )
    return 0.5 * math.log2(1.0 + beta * g2 * q) + 0.5 * fading


def r_ach_grid(betas: np.ndarray, spec: ChannelSpec) -> np.ndarray:
    betas = np.asarray(betas, dtype=float)[:, None]
    h2q = spec.h_arr ** 2 * spec.q
    fading = np.log2((1.0 + h2q) / (1.0 + betas * h2q)) @ spec.p_arr
    return 0.5 * np.log2(1.0 + betas[:, 0] * spec.g ** 2 * spec.q) + 0.5 * fading


def maximize_r_ach(spec: ChannelSpec) -> AchievableReport:
    """The maximum over beta is attained at an endpoint; ties go to beta = 1."""
    r0, r1 = r_ach(0.0, spec), r_ach(1.0, spec)
    if r0 > r1 + TIE_TOL:
        return AchievableReport(beta_star=0.0, sr_ach=r0, endpoint_values=(r0, r1))
    return AchievableReport(beta_star=1.0, sr_ach=max(r0, r1), endpoint_values=(r0, r1))


def beta_preference(x: float, spec: ChannelSpec) -> float:
    """``sum p_i/2 log2(1 + h_i^2 x) - 1/2 log2(1 + g^2 x)``.

    Its derivative in ``x`` is T(x)/(2 ln 2); at ``x = Q`` it equals
    R(beta=0) - R(beta=1), so its sign picks the optimal power split.
    """
    return 0.5 * math.fsum(pi * math.log2(1.0 + hi * hi * x) for hi, pi in zip(spec.h, spec.p)) - 0.5 * math.log2(
        1.0 + spec.g * spec.g * x
    )


def gap_analysis(ub: UpperBoundReport, ach: AchievableReport, spec: ChannelSpec) -> GapReport:
    x = ub.x_star
    g2 = spec.g * spec.g
    pref = beta_preference(spec.q, spec)
    if ub.case is CaseLabel.CASE1:
        bound = beta_preference(x, spec)
        setting = Setting.CASE1_BOUND
    elif ub.case is CaseLabel.CASE3:
        bound = 0.5 * math.fsum(
            pi * math.log2(-hi * hi * x - 1.0) for hi, pi in zip(spec.h, spec.p)
        ) - 0.5 * math.log2(-g2 * x - 1.0)
        setting = Setting.CASE3_BOUND
    else:
        bound = 0.0
        setting = {
            CaseLabel.CASE2_B1: Setting.SETTING1_B1,
            CaseLabel.CASE2_B2: Setting.SETTING2_B2,
            CaseLabel.CASE2_B3: Setting.SETTING3_B3,
        }[ub.case]
    gap = ub.sr_upper - ach.sr_ach
    if gap < -GAP_TOL:
        raise GapNegative(f"upper bound {ub.sr_upper!r} below achievable rate {ach.sr_ach!r}")
    if gap > bound + GAP_TOL:
        raise GapExceedsBound(f"gap {gap!r} exceeds its bound {bound!r} ({setting})")
    return GapReport(gap=gap, gap_bound=bound, setting=setting, beta_preference=pref)
