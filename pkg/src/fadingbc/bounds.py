"""Outer bound on the sum rate.

Everything is computed in the variance domain: the conditional entropies
``f_i = 1/2 log2(2 pi e v_i)`` are represented by ``v_i`` and the ``2 pi e``
factors cancel because the weights ``alpha`` sum to one.  Rates are in bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .channel import ChannelSpec, inverse_gains
from .errors import AlphaInfeasible, NonPositiveLogArgument
from .tfunction import RootAnalysis, find_x_star

ALPHA_TOL = 1e-9
ALPHA_NEG_TOL = 1e-12


class CaseLabel(str, enum.Enum):
    CASE1 = "Case1"
    CASE2_B1 = "Case2_B1"
    CASE2_B2 = "Case2_B2"
    CASE2_B3 = "Case2_B3"
    CASE3 = "Case3"

    @property
    def is_case2(self) -> bool:
        return self in (CaseLabel.CASE2_B1, CaseLabel.CASE2_B2, CaseLabel.CASE2_B3)

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AlphaWeights:
    alpha: tuple[float, ...]

    def residuals(self, spec: ChannelSpec) -> tuple[float, float, float]:
        """(most negative weight, |sum - 1|, |sum alpha_i/h_i^2 - 1/g^2|)."""
        a = inverse_gains(spec)
        return (
            min(0.0, min(self.alpha)),
            abs(math.fsum(self.alpha) - 1.0),
            abs(math.fsum(w * ai for w, ai in zip(self.alpha, a.a)) - a.b),
        )


@dataclass(frozen=True)
class UpperBoundReport:
    x_star: float
    case: CaseLabel
    alpha: AlphaWeights
    d_value: float
    d_is_exact: bool
    c_value: float
    sr_upper: float
    roots: RootAnalysis | None = None


def classify_case(x_star: float, spec: ChannelSpec) -> CaseLabel:
    """Place ``x_star`` in one of the five intervals.

    Shared endpoints resolve with priority Case 1, then Case 2, then Case 3.
    """
    a = inverse_gains(spec)
    a1, an = a.a[0], a.a[-1]
    q = spec.q
    x = x_star
    if 0.0 <= x <= q:
        return CaseLabel.CASE1
    if x >= q:
        return CaseLabel.CASE2_B3
    if -an <= x <= 0.0:
        return CaseLabel.CASE2_B2
    if x <= -q - 2.0 * a1:
        return CaseLabel.CASE2_B1
    if x <= -a1:
        return CaseLabel.CASE3
    raise ValueError(f"x_star={x!r} lies strictly between the extreme poles {-a1!r} and {-an!r}")


def compute_alpha(x_star: float, spec: ChannelSpec) -> AlphaWeights:
    """Weights ``alpha_i = p_i (x* + 1/g^2) / (x* + 1/h_i^2)``.

    Nonnegativity, unit sum and ``sum alpha_i / h_i^2 = 1/g^2`` are checked
    after the fact; they hold analytically whenever T(x*) = 0.
    """
    a = inverse_gains(spec)
    xb = x_star + a.b
    w = AlphaWeights(tuple(pi * xb / (x_star + ai) for pi, ai in zip(spec.p, a.a)))
    neg, r_sum, r_mean = w.residuals(spec)
    if neg < -ALPHA_NEG_TOL or r_sum > ALPHA_TOL or r_mean > ALPHA_TOL:
        raise AlphaInfeasible(
            f"alpha={w.alpha} violates feasibility (min={neg:.3e}, sum residual={r_sum:.3e}, "
            f"mean residual={r_mean:.3e})"
        )
    return w


def _log2(x: float, what: str) -> float:
    if not x > 0:
        raise NonPositiveLogArgument(f"{what}: log argument {x!r} is not positive")
    return math.log2(x)


def _weighted_log_gap(p, xs, y, what: str) -> float:
    """sum_i p_i/2 log2(xs_i) - 1/2 log2(y)."""
    return 0.5 * math.fsum(pi * _log2(xi, what) for pi, xi in zip(p, xs)) - 0.5 * _log2(y, what)


def compute_D(case: CaseLabel, x_star: float, spec: ChannelSpec) -> tuple[float, bool]:
    """Closed-form value of the relaxed entropy program for the given case.

    Returns ``(d_value, d_is_exact)``; in Case 3 the value is only an upper
    bound on the program's optimum.
    """
    a = inverse_gains(spec)
    q, p = spec.q, spec.p
    case = CaseLabel(case)
    if case is CaseLabel.CASE1:
        d = _weighted_log_gap(p, [x_star + ai for ai in a.a], x_star + a.b, "Case1")
        return d, True
    if case in (CaseLabel.CASE2_B1, CaseLabel.CASE2_B3):
        return _weighted_log_gap(p, [q + ai for ai in a.a], q + a.b, str(case)), True
    if case is CaseLabel.CASE2_B2:
        return _weighted_log_gap(p, a.a, a.b, str(case)), True
    d = _weighted_log_gap(p, [-x_star - ai for ai in a.a], -x_star - a.b, "Case3")
    return d, False


def compute_C(spec: ChannelSpec) -> float:
    """Constant term ``1/2 log2(Q + 1/g^2) - sum p_i/2 log2(1/h_i^2)``."""
    a = inverse_gains(spec)
    return 0.5 * math.log2(spec.q + a.b) - 0.5 * math.fsum(
        pi * math.log2(ai) for pi, ai in zip(spec.p, a.a)
    )


def upper_bound(spec: ChannelSpec) -> UpperBoundReport:
    roots = find_x_star(inverse_gains(spec), spec.p)
    x = roots.x_star
    case = classify_case(x, spec)
    alpha = compute_alpha(x, spec)
    d, exact = compute_D(case, x, spec)
    c = compute_C(spec)
    return UpperBoundReport(
        x_star=x,
        case=case,
        alpha=alpha,
        d_value=d,
        d_is_exact=exact,
        c_value=c,
        sr_upper=d + c,
        roots=roots,
    )
