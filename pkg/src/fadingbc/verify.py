"""Independent numerical oracles for the closed forms in ``bounds`` and ``achievable``.

None of the oracles below read ``x_star``: the concave program is solved
numerically over its box, the power split is searched on a grid, and the
entropy-power inequalities are checked on conditionally Gaussian inputs whose
entropies are known exactly (plus a quadrature tier for Gaussian mixtures).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .achievable import gap_analysis, maximize_r_ach, r_ach_grid
from .bounds import AlphaWeights, CaseLabel, compute_alpha, upper_bound
from .channel import ChannelSpec, inverse_gains, validate_and_normalize
from .errors import (
    BoundsError,
    ConcavityViolated,
    EpiViolated,
    NonConvergence,
    NonPositiveVariance,
    QuadratureNonConvergence,
)
from .tfunction import find_x_star, t_eval, x_star_by_bracketing

LN2 = math.log(2.0)
TWO_PI_E = 2.0 * math.pi * math.e


# --------------------------------------------------------------------------
# concave program


@dataclass(frozen=True)
class ConcaveProgram:
    """max_v  sum p_i/2 log2 v_i - 1/2 log2(sum alpha_i v_i)  over  lower <= v <= upper."""

    alpha: tuple[float, ...]
    p: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @classmethod
    def for_channel(cls, spec: ChannelSpec, alpha: AlphaWeights | Sequence[float]) -> "ConcaveProgram":
        if isinstance(alpha, AlphaWeights):
            alpha = alpha.alpha
        a = inverse_gains(spec).a
        return cls(
            alpha=tuple(float(w) for w in alpha),
            p=tuple(spec.p),
            lower=tuple(a),
            upper=tuple(spec.q + ai for ai in a),
        )


@dataclass(frozen=True)
class OracleResult:
    v: np.ndarray
    value: float
    upper_certificate: float  # no feasible point exceeds this
    iterations: int
    pg_norm: float


def eval_objective(v: Sequence[float], prog: ConcaveProgram) -> float:
    v = np.asarray(v, dtype=float)
    if np.any(~(v > 0)):
        raise NonPositiveVariance(f"variances must be positive, got {v}")
    p = np.asarray(prog.p)
    s = float(np.dot(prog.alpha, v))
    return 0.5 * float(np.dot(p, np.log2(v))) - 0.5 * math.log2(s)


def _objective_and_grad(u, p, log_alpha):
    # log-variance coordinates: concave, the box stays a box
    z = u + log_alpha
    lse = logsumexp(z)
    w = np.exp(z - lse)
    val = (float(np.dot(p, u)) - lse) / (2.0 * LN2)
    return val, (p - w) / (2.0 * LN2)


def _ascend(u, lo, hi, p, log_alpha, tol, max_iter):
    val, g = _objective_and_grad(u, p, log_alpha)
    step = 1.0
    u_prev = g_prev = None
    pg = np.clip(u + g, lo, hi) - u
    for it in range(1, max_iter + 1):
        pg_norm = float(np.max(np.abs(pg)))
        if pg_norm < tol:
            return u, val, g, it - 1, pg_norm
        if u_prev is not None:
            s, y = u - u_prev, g - g_prev
            sy = float(np.dot(s, y))
            if sy < 0:
                step = float(np.dot(s, s)) / -sy
        step = min(max(step, 1e-3), 1e6)
        while True:
            u_new = np.clip(u + step * g, lo, hi)
            val_new, g_new = _objective_and_grad(u_new, p, log_alpha)
            d = u_new - u
            if val_new >= val + 1e-4 * float(np.dot(g, d)) - 1e-15 or step < 1e-12:
                break
            step *= 0.5
        u_prev, g_prev = u, g
        u, val, g = u_new, val_new, g_new
        pg = np.clip(u + g, lo, hi) - u
    return u, val, g, max_iter, float(np.max(np.abs(pg)))


def _starts(lo: np.ndarray, hi: np.ndarray) -> list[np.ndarray]:
    n = len(lo)
    half = np.arange(n) < n // 2
    return [lo.copy(), hi.copy(), 0.5 * (lo + hi), np.where(half, lo, hi), np.where(half, hi, lo)]


def maximize_objective(
    prog: ConcaveProgram,
    *,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    extra_starts: Iterable[Sequence[float]] = (),
) -> OracleResult:
    """Box-constrained maximizer of the entropy program.

    Projected gradient ascent with Barzilai-Borwein steps and Armijo
    backtracking, run in log-variance coordinates where the objective is
    concave.  Five starts (both corners, the centre, two mixed corners) plus
    any ``extra_starts``; the best result is returned together with the
    first-order certificate ``F(u) + max_{box} grad.(u' - u)``.

    The objective is invariant under scaling all variances by a common
    factor, so maximizers are generally not unique; see
    :func:`power_representative` for a canonical choice.
    """
    p = np.asarray(prog.p, dtype=float)
    alpha = np.asarray(prog.alpha, dtype=float)
    with np.errstate(divide="ignore"):
        log_alpha = np.log(alpha)
    lo = np.log(np.asarray(prog.lower, dtype=float))
    hi = np.log(np.asarray(prog.upper, dtype=float))
    starts = _starts(lo, hi) + [np.clip(np.log(np.asarray(s, dtype=float)), lo, hi) for s in extra_starts]

    best = None
    total_it = 0
    for u0 in starts:
        u, val, g, it, pg_norm = _ascend(u0, lo, hi, p, log_alpha, tol, max_iter)
        total_it += it
        if best is None or val > best[1]:
            best = (u, val, g, pg_norm)
    u, val, g, pg_norm = best
    if pg_norm > 1e-6:
        raise NonConvergence(f"projected gradient {pg_norm:.3e} after {max_iter} iterations")
    cert = val + float(np.sum(np.maximum(g * (lo - u), g * (hi - u))))
    return OracleResult(v=np.exp(u), value=val, upper_certificate=cert, iterations=total_it, pg_norm=pg_norm)


def power_representative(v: Sequence[float], lower: Sequence[float]) -> tuple[float, np.ndarray]:
    """Pick the point on the ray through ``v`` whose excess over ``lower`` is most uniform.

    Solves ``c v_i - x = lower_i`` in least squares for ``(c, x)`` and returns
    ``(x, c v)``.  When ``v`` is proportional to ``x + lower`` this recovers
    ``x`` exactly, giving an estimate of the common input power.
    """
    v = np.asarray(v, dtype=float)
    lower = np.asarray(lower, dtype=float)
    A = np.column_stack([v, -np.ones_like(v)])
    (c, x), *_ = np.linalg.lstsq(A, lower, rcond=None)
    return float(x), c * v


# --------------------------------------------------------------------------
# power split


def beta_grid_oracle(spec: ChannelSpec, resolution: int) -> tuple[float, float]:
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    betas = np.linspace(0.0, 1.0, resolution)
    vals = r_ach_grid(betas, spec)
    k = int(np.argmax(vals))
    return float(betas[k]), float(vals[k])


# --------------------------------------------------------------------------
# entropy powers


@dataclass(frozen=True)
class ConditionalGaussianInput:
    """X given U = u is N(0, variances[u]); U has p.m.f. ``weights``."""

    weights: tuple[float, ...]
    variances: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.variances) or not self.weights:
            raise ValueError("weights and variances must be non-empty and of equal length")
        if any(w < 0 for w in self.weights) or abs(math.fsum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"weights {self.weights} are not a p.m.f.")
        if any(not math.isfinite(s) or s < 0 for s in self.variances):
            raise ValueError(f"variances {self.variances} must be finite and nonnegative")


def conditional_entropy_power(inp: ConditionalGaussianInput, t: float) -> float:
    """``2**(2 h(X + sqrt(t) Z | U))`` with ``h`` in bits: ``2 pi e prod (s_u + t)**w_u``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    acc = 0.0
    for w, s in zip(inp.weights, inp.variances):
        if w == 0.0:
            continue
        if s + t == 0.0:
            return 0.0
        acc += w * math.log(s + t)
    return TWO_PI_E * math.exp(acc)


@dataclass(frozen=True)
class ConcavityReport:
    max_second_difference: float
    scale: float

    @property
    def passed(self) -> bool:
        return self.max_second_difference <= 1e-9 * self.scale


def check_costa_concavity(inp: ConditionalGaussianInput, t_grid: Sequence[float], *, strict: bool = True) -> ConcavityReport:
    """Second divided differences of the conditional entropy power over ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 3 or np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be increasing, nonnegative, with at least 3 points")
    f = np.array([conditional_entropy_power(inp, ti) for ti in t])
    slopes = np.diff(f) / np.diff(t)
    second = 2.0 * np.diff(slopes) / (t[2:] - t[:-2])
    # curvature is compared against the function's size over a unit of t
    scale = max(float(np.max(np.abs(f))), 1e-300)
    rep = ConcavityReport(max_second_difference=float(np.max(second)), scale=scale)
    if strict and not rep.passed:
        raise ConcavityViolated(f"second difference {rep.max_second_difference!r} > 0 (scale {scale!r})")
    return rep


@dataclass(frozen=True)
class EpiReport:
    lhs: float  # entropy power at the constant user's noise level
    rhs: float  # alpha-combination of the fading states' entropy powers
    margin: float

    @property
    def passed(self) -> bool:
        return self.margin >= -1e-9 * max(abs(self.lhs), 1.0)


def check_epi_combination(
    inp: ConditionalGaussianInput,
    spec: ChannelSpec,
    alpha: AlphaWeights | Sequence[float],
    *,
    strict: bool = True,
) -> EpiReport:
    """Check ``N(X + N/g | U) >= sum alpha_i N(X + N/h_i | U)``."""
    if isinstance(alpha, AlphaWeights):
        alpha = alpha.alpha
    gains = inverse_gains(spec)
    alpha = [float(w) for w in alpha]
    if (
        len(alpha) != spec.n
        or min(alpha) < -1e-12
        or abs(math.fsum(alpha) - 1.0) > 1e-9
        or abs(math.fsum(w * ai for w, ai in zip(alpha, gains.a)) - gains.b) > 1e-9
    ):
        raise ValueError(f"alpha={alpha} is not feasible for this channel")
    lhs = conditional_entropy_power(inp, gains.b)
    rhs = math.fsum(w * conditional_entropy_power(inp, ai) for w, ai in zip(alpha, gains.a))
    rep = EpiReport(lhs=lhs, rhs=rhs, margin=lhs - rhs)
    if strict and not rep.passed:
        raise EpiViolated(f"entropy power combination violated by {-rep.margin!r}")
    return rep


def mixture_entropy_quadrature(inp: ConditionalGaussianInput, t: float) -> float:
    """Differential entropy (bits) of the zero-mean Gaussian mixture ``X + sqrt(t) Z``."""
    w = np.asarray(inp.weights, dtype=float)
    var = np.asarray(inp.variances, dtype=float) + t
    keep = w > 0
    w, var = w[keep], var[keep]
    if np.any(var <= 0):
        raise ValueError("every mixture component needs positive variance")
    logc = np.log(w) - 0.5 * np.log(2.0 * math.pi * var)
    inv2 = 0.5 / var

    def integrand(y):
        lf = logsumexp(logc - y * y * inv2)
        return -math.exp(lf) * lf

    s = math.sqrt(float(var.max()))
    pts = sorted({k * math.sqrt(v) for v in var for k in (1.0, 3.0, 6.0) if k * math.sqrt(v) < 12.0 * s})
    val, err = integrate.quad(integrand, 0.0, 12.0 * s, points=pts, epsabs=1e-12, epsrel=1e-12, limit=500)
    # symmetric density: double the half-line integral
    h_bits, err_bits = 2.0 * val / LN2, 2.0 * err / LN2
    if err_bits > 1e-8:
        raise QuadratureNonConvergence(f"quadrature error estimate {err_bits:.2e} bits")
    return h_bits


# --------------------------------------------------------------------------
# randomized suites


def random_channel(rng: np.random.Generator, n: int | None = None, q_range=(0.01, 100.0)) -> ChannelSpec:
    """Random accepted channel.

    Fade magnitudes are log-uniform on [0.2, 5] with inverse gains at least
    1% apart (relative), ``g`` log-uniform strictly inside the fade range and
    also 1% away from every 1/h_i^2, every p_i >= 0.1/n, and ``q``
    log-uniform on ``q_range``.
    """
    if n is None:
        n = int(rng.integers(2, 6))
    while True:
        h = np.sort(np.exp(rng.uniform(math.log(0.2), math.log(5.0), n)))
        g = float(np.exp(rng.uniform(math.log(h[0]), math.log(h[-1]))))
        inv = np.sort(np.concatenate([1.0 / h**2, [1.0 / g**2]]))
        if np.all(np.diff(inv) / inv[1:] > 0.01):
            break
    p = 0.9 * rng.dirichlet(np.full(n, 2.0)) + 0.1 / n
    p = p / p.sum()
    q = float(np.exp(rng.uniform(math.log(q_range[0]), math.log(q_range[1]))))
    return validate_and_normalize(h.tolist(), p.tolist(), g, q)


def random_conditional_input(rng: np.random.Generator, m: int | None = None) -> ConditionalGaussianInput:
    if m is None:
        m = int(rng.integers(1, 5))
    w = rng.dirichlet(np.ones(m))
    var = np.exp(rng.uniform(math.log(1e-3), math.log(1e2), m))
    if m > 1 and rng.random() < 0.2:
        var[int(rng.integers(m))] = 0.0
    return ConditionalGaussianInput(tuple(w.tolist()), tuple(var.tolist()))


def pole_sign_limits(spec: ChannelSpec, offset: float = 1e-6) -> bool:
    """T -> -inf / +inf left/right of each -1/h_i^2, and +inf / -inf around -1/g^2."""
    gains = inverse_gains(spec)
    ok = True
    for ai in gains.a:
        ok &= t_eval(-ai - offset, gains, spec.p) < 0 < t_eval(-ai + offset, gains, spec.p)
    b = gains.b
    ok &= t_eval(-b - offset, gains, spec.p) > 0 > t_eval(-b + offset, gains, spec.p)
    return bool(ok)


@dataclass
class SuiteResult:
    passed: int = 0
    failed: int = 0
    worst_residual: float = 0.0
    failures: list = field(default_factory=list)

    def record(self, ok: bool, residual: float = 0.0, note: str | None = None) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if note is not None and len(self.failures) < 10:
                self.failures.append(note)
        if math.isfinite(residual):
            self.worst_residual = max(self.worst_residual, residual)
        else:
            self.worst_residual = math.inf

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failed": self.failed,
            "worst_residual": self.worst_residual,
            "failures": list(self.failures),
        }


D_TOL = 1e-6
SUITES = ("root_count", "alpha_feasibility", "stationarity", "oracle_equivalence", "beta_endpoint", "gap", "concavity", "epi")


def run_suites(
    channels: Sequence[ChannelSpec],
    rng: np.random.Generator,
    beta_resolution: int = 10_001,
) -> dict:
    """Run every oracle suite over ``channels``; returns a JSON-ready summary."""
    res = {name: SuiteResult() for name in SUITES}
    by_case: dict[str, SuiteResult] = {}
    for k, spec in enumerate(channels):
        tag = f"channel {k}: h={list(spec.h)} p={list(spec.p)} g={spec.g!r} q={spec.q!r}"
        gains = inverse_gains(spec)
        try:
            roots = find_x_star(gains, spec.p)
            x_br, _ = x_star_by_bracketing(gains, spec.p)
            agree = abs(roots.x_star - x_br) / max(abs(roots.x_star), 1e-300)
            ok = roots.n_inside == spec.n - 2 and agree <= 1e-9 and pole_sign_limits(spec)
            res["root_count"].record(ok, agree, None if ok else tag)
        except BoundsError as exc:
            res["root_count"].record(False, math.inf, f"{tag}: {exc.code}: {exc}")
            continue

        try:
            ub = upper_bound(spec)
        except BoundsError as exc:
            res["alpha_feasibility"].record(False, math.inf, f"{tag}: {exc.code}: {exc}")
            continue
        r = max(abs(x) for x in ub.alpha.residuals(spec))
        res["alpha_feasibility"].record(r <= 1e-9, r, None if r <= 1e-9 else tag)

        x = ub.x_star
        v = np.array([x + ai for ai in gains.a])
        av = np.asarray(ub.alpha.alpha) * v
        stat = float(np.max(np.abs(np.asarray(spec.p) - av / av.sum())))
        var_id = abs(float(av.sum()) - (x + gains.b)) / max(abs(x + gains.b), 1e-300)
        res["stationarity"].record(max(stat, var_id) <= 1e-9, max(stat, var_id), tag)

        prog = ConcaveProgram.for_channel(spec, ub.alpha)
        try:
            orc = maximize_objective(prog)
        except BoundsError as exc:
            res["oracle_equivalence"].record(False, math.inf, f"{tag}: {exc.code}: {exc}")
            continue
        if ub.case is CaseLabel.CASE3:
            resid = orc.value - ub.d_value
            ok = resid <= 1e-9
        else:
            resid = abs(orc.value - ub.d_value)
            ok = resid <= D_TOL
            if ub.case is CaseLabel.CASE1:
                x_hat, v_rep = power_representative(orc.v, prog.lower)
                coord = float(np.max(np.abs(v_rep - v) / np.maximum(1.0, np.abs(v))))
                ok = ok and coord <= 1e-6
                resid = max(resid, coord)
        res["oracle_equivalence"].record(ok, resid, None if ok else f"{tag} [{ub.case}] oracle={orc.value!r} closed_form={ub.d_value!r}")
        by_case.setdefault(str(ub.case), SuiteResult()).record(ok, resid)

        ach = maximize_r_ach(spec)
        _, grid_best = beta_grid_oracle(spec, beta_resolution)
        excess = grid_best - ach.sr_ach
        rate_floor_ok = ach.sr_ach >= 0.5 * math.log2(1.0 + spec.g**2 * spec.q) - 1e-12
        res["beta_endpoint"].record(excess <= 1e-9 and rate_floor_ok, max(excess, 0.0), tag)

        try:
            gap = gap_analysis(ub, ach, spec)
            res["gap"].record(True, abs(gap.gap) if ub.case.is_case2 else 0.0)
        except BoundsError as exc:
            res["gap"].record(False, math.inf, f"{tag}: {exc.code}: {exc}")

        inp = random_conditional_input(rng)
        grid = np.sort(np.concatenate([[0.0], rng.uniform(0.0, 2.0 * max(gains.a), 12)]))
        grid = np.unique(grid)
        cr = check_costa_concavity(inp, grid, strict=False)
        res["concavity"].record(cr.passed, max(cr.max_second_difference / cr.scale, 0.0), None if cr.passed else tag)
        er = check_epi_combination(inp, spec, ub.alpha, strict=False)
        res["epi"].record(er.passed, max(-er.margin, 0.0), None if er.passed else tag)

    out = {name: r.as_dict() for name, r in res.items()}
    summary = {
        "channels": len(channels),
        "suites": out,
        "oracle_equivalence_by_case": {k: v.as_dict() for k, v in sorted(by_case.items())},
        "all_passed": all(r.failed == 0 for r in res.values()),
    }
    return summary
