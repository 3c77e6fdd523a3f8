"""Channel specification for the one-sided fading broadcast channel.

User 1 sees ``Y1 = H X + N1`` with ``H`` drawn from a finite set of fade
magnitudes ``h`` with p.m.f. ``p``; user 2 sees ``Y2 = g X + N2`` with a
constant gain.  Noise is unit variance, input power is at most ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateFading,
    InvalidPmf,
    LengthMismatch,
    NonPositiveParameter,
    StronglyDegraded,
)

MERGE_RTOL = 1e-12
PMF_SUM_TOL = 1e-9
# after renormalization the p.m.f. sums to one within this
PMF_EXACT_TOL = 1e-12


@dataclass(frozen=True)
class ChannelSpec:
    """Normalized channel: ``h`` strictly increasing, ``h[0] < g < h[-1]``."""

    h: tuple[float, ...]
    p: tuple[float, ...]
    g: float
    q: float

    @property
    def n(self) -> int:
        return len(self.h)

    @property
    def h_arr(self) -> np.ndarray:
        return np.asarray(self.h, dtype=float)

    @property
    def p_arr(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    @property
    def near_degenerate(self) -> bool:
        """True when ``g`` coincides with an interior fade magnitude."""
        return any(math.isclose(self.g, hk, rel_tol=MERGE_RTOL, abs_tol=0.0) for hk in self.h[1:-1])

    def with_power(self, q: float) -> "ChannelSpec":
        return validate_and_normalize(self.h, self.p, self.g, q)


@dataclass(frozen=True)
class InverseGains:
    """Noise-to-gain ratios ``a_i = 1/h_i**2`` (decreasing) and ``b = 1/g**2``."""

    a: tuple[float, ...]
    b: float

    @property
    def a_arr(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)


def _positive(name: str, x: float) -> float:
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise NonPositiveParameter(f"{name} must be a positive finite number, got {x!r}")
    return x


def validate_and_normalize(
    h: Sequence[float],
    p: Sequence[float],
    g: float,
    q: float,
    *,
    merge_rtol: float = MERGE_RTOL,
    pmf_tol: float = PMF_SUM_TOL,
) -> ChannelSpec:
    """Validate raw channel parameters and return the canonical form.

    Fade states are sorted ascending with their probabilities, states whose
    magnitudes agree to ``merge_rtol`` are merged by summing probabilities,
    and the p.m.f. is renormalized.

    Raises
    ------
    LengthMismatch, InvalidPmf, NonPositiveParameter
        Malformed input.
    DegenerateFading
        A single fade state remains after merging.
    StronglyDegraded
        ``g <= h_1`` or ``g >= h_n``; one user dominates in every state.
    """
    h = list(h)
    p = list(p)
    if len(h) != len(p):
        raise LengthMismatch(f"h has {len(h)} entries but p has {len(p)}")
    if not h:
        raise InvalidPmf("at least one fade state is required")
    h = [_positive(f"h[{i}]", x) for i, x in enumerate(h)]
    g = _positive("g", g)
    q = _positive("q", q)

    p = [float(x) for x in p]
    if any(not math.isfinite(x) or x <= 0 for x in p):
        raise InvalidPmf(f"probabilities must be positive, got {p}")
    total = math.fsum(p)
    if abs(total - 1.0) > pmf_tol:
        raise InvalidPmf(f"probabilities sum to {total!r}, not 1")

    order = sorted(range(len(h)), key=lambda i: h[i])
    hs: list[float] = []
    ps: list[list[float]] = []
    for i in order:
        if hs and math.isclose(h[i], hs[-1], rel_tol=merge_rtol, abs_tol=0.0):
            ps[-1].append(p[i])
        else:
            hs.append(h[i])
            ps.append([p[i]])
    pm = [math.fsum(group) for group in ps]
    if abs(math.fsum(pm) - 1.0) > PMF_EXACT_TOL:
        s = math.fsum(pm)
        pm = [x / s for x in pm]

    if len(hs) == 1:
        raise DegenerateFading("only one fade state after merging duplicates")
    if not hs[0] < g < hs[-1]:
        raise StronglyDegraded(
            f"g={g!r} lies outside the open fade range ({hs[0]!r}, {hs[-1]!r})"
        )
    return ChannelSpec(h=tuple(hs), p=tuple(pm), g=g, q=q)


def inverse_gains(spec: ChannelSpec) -> InverseGains:
    return InverseGains(a=tuple(1.0 / (x * x) for x in spec.h), b=1.0 / (spec.g * spec.g))
