"""The rational function T(x) and its distinguished real root.

    T(x) = sum_i p_i / (x + a_i) - 1 / (x + b),   a_i = 1/h_i**2,  b = 1/g**2

T has poles at -a_1 < ... < -a_n and at -b.  Written over the common
denominator (x + b) prod_j (x + a_j), its numerator is

    l(x) = sum_i p_i (b - a_i) prod_{j != i} (x + a_j)

of degree n - 1 (the x**n terms cancel because the p_i sum to one).  Exactly
n - 2 of its roots lie in [-a_1, -a_n]; the remaining root ``x_star`` lies
outside and drives every closed form downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .channel import InverseGains
from .errors import DegreeCollapse, PoleEvaluation, RootCountMismatch

POLE_RTOL = 1e-14
DEGREE_RTOL = 1e-12
CLUSTER_RTOL = 1e-7
RESIDUAL_RTOL = 1e-9
SCAN_LIMIT = 1e12


@dataclass(frozen=True)
class RootAnalysis:
    numerator_coeffs: tuple[float, ...]  # highest degree first
    poles: tuple[float, ...]
    inside_roots: tuple[float, ...]
    x_star: float
    method: str = "polynomial"

    @property
    def n_inside(self) -> int:
        return len(self.inside_roots)


def _arrays(gains: InverseGains, p: Sequence[float]) -> tuple[np.ndarray, float, np.ndarray]:
    return gains.a_arr, float(gains.b), np.asarray(p, dtype=float)


def t_eval(x: float, gains: InverseGains, p: Sequence[float]) -> float:
    """Evaluate T(x).

    Uses the equivalent form ``sum_i p_i (b - a_i) / ((x + a_i)(x + b))``,
    which avoids the cancellation between the two sums for large ``|x|``.
    """
    x = float(x)
    b = float(gains.b)
    for c in (*gains.a, b):
        if abs(x + c) <= POLE_RTOL * max(abs(x), c):
            raise PoleEvaluation(f"x={x!r} coincides with the pole at {-c!r}")
    xb = x + b
    return math.fsum(pi * (b - ai) / ((x + ai) * xb) for ai, pi in zip(gains.a, p))


def t_values(xs: np.ndarray, gains: InverseGains, p: Sequence[float]) -> np.ndarray:
    """Vectorized T(x) without pole checks (poles give +-inf or nan)."""
    a, b, pa = _arrays(gains, p)
    xs = np.asarray(xs, dtype=float)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sum(pa * (b - a) / ((xs + a) * (xs + b)), axis=-1)


def local_scale(x: float, gains: InverseGains, p: Sequence[float]) -> float:
    """Magnitude of the individual terms of T at ``x``; residuals are measured against it."""
    return math.fsum(pi / abs(x + ai) for ai, pi in zip(gains.a, p)) + 1.0 / abs(x + gains.b)


def numerator_polynomial(gains: InverseGains, p: Sequence[float]) -> np.ndarray:
    """Coefficients of l(x), highest degree first, degree exactly n - 1."""
    a, b, pa = _arrays(gains, p)
    n = len(a)
    coeffs = np.zeros(n)
    for i in range(n):
        others = np.delete(a, i)
        coeffs += pa[i] * (b - a[i]) * np.poly(-others)
    if abs(coeffs[0]) < DEGREE_RTOL * np.max(np.abs(coeffs)):
        raise DegreeCollapse(
            f"leading coefficient {coeffs[0]!r} is negligible; x_star is effectively at infinity"
        )
    return coeffs


def _cluster(values: list[float], width: float) -> list[list[float]]:
    clusters: list[list[float]] = []
    for v in sorted(values):
        if clusters and v - clusters[-1][-1] <= width:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return clusters


def _refine(f, lo: float, hi: float) -> float:
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _bracket_near(x0: float, gains: InverseGains, p: Sequence[float], lo_lim: float, hi_lim: float):
    """Find [lo, hi] inside (lo_lim, hi_lim) around ``x0`` where T changes sign."""
    f = lambda x: t_eval(x, gains, p)
    delta = max(abs(x0), 1.0) * 1e-12
    for _ in range(200):
        lo = max(x0 - delta, lo_lim)
        hi = min(x0 + delta, hi_lim)
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            return lo, lo
        if fhi == 0.0:
            return hi, hi
        if math.copysign(1.0, flo) != math.copysign(1.0, fhi):
            return lo, hi
        delta *= 2.0
    return None


def _nudge_right(x: float) -> float:
    return x + max(abs(x), 1.0) * 1e-13


def _nudge_left(x: float) -> float:
    return x - max(abs(x), 1.0) * 1e-13


def _outer_scan(gains: InverseGains, p: Sequence[float], anchor: float, direction: float):
    """Scan outward from a pole with a doubling step until T changes sign."""
    f = lambda x: t_eval(x, gains, p)
    start = _nudge_right(anchor) if direction > 0 else _nudge_left(anchor)
    fs = f(start)
    prev = start
    step = 1.0
    while step <= SCAN_LIMIT:
        x = anchor + direction * step
        fx = f(x)
        if fx == 0.0:
            return x
        if math.copysign(1.0, fx) != math.copysign(1.0, fs):
            lo, hi = sorted((prev, x))
            return _refine(f, lo, hi)
        prev = x
        step *= 2.0
    return None


def x_star_by_bracketing(gains: InverseGains, p: Sequence[float]) -> tuple[float, list[float]]:
    """Pole-bracketed root search, independent of the polynomial route.

    Returns ``(x_star, inside_roots)``.  Inside roots are found by sign
    changes between consecutive poles; ``x_star`` by an outward doubling scan
    on both unbounded pieces.
    """
    f = lambda x: t_eval(x, gains, p)
    a = sorted(gains.a, reverse=True)
    inside: list[float] = []
    poles = sorted({-c for c in (*a, gains.b)})
    for left, right in zip(poles[:-1], poles[1:]):
        lo, hi = _nudge_right(left), _nudge_left(right)
        if lo >= hi:
            continue
        xs = np.linspace(lo, hi, 65)
        vals = t_values(xs, gains, p)
        for k in range(len(xs) - 1):
            if vals[k] == 0.0:
                inside.append(float(xs[k]))
            elif np.sign(vals[k]) != np.sign(vals[k + 1]) and vals[k + 1] != 0.0:
                inside.append(_refine(f, float(xs[k]), float(xs[k + 1])))
    outside = []
    for anchor, direction in ((-a[-1], 1.0), (-a[0], -1.0)):
        r = _outer_scan(gains, p, anchor, direction)
        if r is not None:
            outside.append(r)
    if len(outside) != 1:
        raise RootCountMismatch(
            f"bracketing found {len(outside)} roots outside [{-a[0]!r}, {-a[-1]!r}]"
        )
    return outside[0], inside


def _polish_x_star(x0: float, gains: InverseGains, p: Sequence[float]) -> float:
    a1, an = max(gains.a), min(gains.a)
    if x0 > -an:
        lo_lim, hi_lim = _nudge_right(-an), math.inf
    else:
        lo_lim, hi_lim = -math.inf, _nudge_left(-a1)
    br = _bracket_near(x0, gains, p, lo_lim, hi_lim)
    if br is None:
        return x0
    lo, hi = br
    if lo == hi:
        return lo
    return _refine(lambda x: t_eval(x, gains, p), lo, hi)


def find_x_star(gains: InverseGains, p: Sequence[float]) -> RootAnalysis:
    """Locate all real roots of T and certify the unique outside root.

    The numerator polynomial is solved through its companion matrix and the
    roots are classified against [-a_1, -a_n]; the outside root is then
    polished with Brent's method on T itself.  If the numerator degree
    collapses the pole-bracketed scan takes over.

    Raises
    ------
    RootCountMismatch
        The outside/inside root counts differ from 1 and n - 2, or the
        residual at ``x_star`` is not small relative to ``local_scale``.
    """
    a = gains.a_arr
    n = len(a)
    a1, an = float(a.max()), float(a.min())
    poles = tuple(sorted([-float(c) for c in a] + [-float(gains.b)]))
    width = CLUSTER_RTOL * (a1 - an)
    edge = 1e-12 * a1

    try:
        coeffs = numerator_polynomial(gains, p)
    except DegreeCollapse:
        coeffs = None

    if coeffs is not None:
        method = "polynomial"
        raw = np.roots(coeffs)
        real = [float(r.real) for r in raw if abs(r.imag) <= width + 1e-12 * abs(r)]
        if len(real) != n - 1:
            raise RootCountMismatch(f"expected {n - 1} real roots of l(x), found {len(real)}")
        inside_raw = [r for r in real if -a1 - edge <= r <= -an + edge]
        outside = [r for r in real if not (-a1 - edge <= r <= -an + edge)]
        inside = [v for c in _cluster(inside_raw, width) for v in c]
        if len(outside) != 1:
            raise RootCountMismatch(
                f"{len(outside)} roots outside [{-a1!r}, {-an!r}], expected exactly one"
            )
        x_star = _polish_x_star(outside[0], gains, p)
    else:
        method = "bracketing"
        coeffs = np.array([0.0])
        x_star, inside = x_star_by_bracketing(gains, p)

    if len(inside) != n - 2:
        raise RootCountMismatch(f"{len(inside)} roots inside [{-a1!r}, {-an!r}], expected {n - 2}")
    if -a1 - edge <= x_star <= -an + edge:
        raise RootCountMismatch(f"x_star={x_star!r} is not outside [{-a1!r}, {-an!r}]")
    resid = abs(t_eval(x_star, gains, p))
    if resid > RESIDUAL_RTOL * local_scale(x_star, gains, p):
        raise RootCountMismatch(f"|T(x_star)|={resid!r} too large at x_star={x_star!r}")
    return RootAnalysis(
        numerator_coeffs=tuple(float(c) for c in coeffs),
        poles=poles,
        inside_roots=tuple(sorted(inside)),
        x_star=float(x_star),
        method=method,
    )
