import math

import numpy as np
import pytest

from fadingbc.bounds import CaseLabel, upper_bound
from fadingbc.errors import ConcavityViolated, NonPositiveVariance
from fadingbc.verify import (
    ConcaveProgram,
    ConditionalGaussianInput,
    beta_grid_oracle,
    check_costa_concavity,
    check_epi_combination,
    conditional_entropy_power,
    eval_objective,
    maximize_objective,
    mixture_entropy_quadrature,
    power_representative,
    random_channel,
    random_conditional_input,
    run_suites,
)

from conftest import two_state

TWO_PI_E = 2 * math.pi * math.e
D_CASE1 = 0.042481250360578090727
D_B3_CLOSED = -0.0085539288344782390973
D_B2_CLOSED = 0.36848279708310308321
# box optima of the relaxed program with the same weights; each verified by KKT
# (see test_box_optimum_kkt) and evaluated at 40 digits
BOX_MAX_B3 = 0.0016065672898582835648  # interior ray through (6, 5.25)
BOX_MAX_B2 = 0.47372948848561063656  # -1/4 + 1/2 log2(30/11), at (2, 1/4)
BOX_MAX_B1 = 0.0044804769993155944862  # ray through (3, 3.75)


def program(spec):
    return ConcaveProgram.for_channel(spec, upper_bound(spec).alpha)


def test_eval_objective_examples(case1, case2_b3):
    assert eval_objective([1.5, 0.75], program(case1)) == pytest.approx(D_CASE1, abs=1e-15)
    prog = program(case2_b3)
    assert eval_objective(prog.upper, prog) == pytest.approx(D_B3_CLOSED, abs=1e-15)
    for c in (0.1, 1.0, 37.0):
        assert eval_objective([c, c], program(case1)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(NonPositiveVariance):
        eval_objective([0.0, 1.0], program(case1))


def test_oracle_case1_interior(case1):
    prog = program(case1)
    res = maximize_objective(prog)
    assert res.value == pytest.approx(D_CASE1, abs=1e-10)
    assert res.upper_certificate - res.value <= 1e-8
    x_hat, v = power_representative(res.v, prog.lower)
    assert x_hat == pytest.approx(0.5, abs=1e-6)
    np.testing.assert_allclose(v, [1.5, 0.75], atol=1e-6)
    assert np.all(v > np.array(prog.lower)) and np.all(v < np.array(prog.upper))


def test_oracle_case1_maximizer_is_a_segment(case1):
    # scaling every variance leaves the objective unchanged
    prog = program(case1)
    for c in (0.7, 1.0, 1.3):
        assert eval_objective([1.5 * c, 0.75 * c], prog) == pytest.approx(D_CASE1, abs=1e-15)


@pytest.mark.parametrize(
    "fixture, box_max, closed",
    [
        ("case2_b3", BOX_MAX_B3, D_B3_CLOSED),
        ("case2_b2", BOX_MAX_B2, D_B2_CLOSED),
        ("case2_b1", BOX_MAX_B1, -0.038000773361262496241),
    ],
)
def test_oracle_case2_exceeds_boundary_value(request, fixture, box_max, closed):
    spec = request.getfixturevalue(fixture)
    res = maximize_objective(program(spec))
    assert res.value == pytest.approx(box_max, abs=1e-10)
    assert res.upper_certificate - res.value <= 1e-8
    assert upper_bound(spec).d_value == pytest.approx(closed, abs=1e-14)
    assert res.value > closed + 1e-3


def test_box_optimum_kkt(case2_b2):
    # at (2, 1/4) the first coordinate sits at its upper bound with a
    # nonnegative gradient and the second at its lower bound with a
    # nonpositive one; for a concave objective that is the global maximum
    prog = program(case2_b2)
    v = np.array([2.0, 0.25])
    assert tuple(v) == (prog.upper[0], prog.lower[1])
    alpha = np.array(prog.alpha)
    grad = np.array(prog.p) - alpha * v / (alpha @ v)  # d/d(log v)
    assert grad[0] > 0 > grad[1]
    assert eval_objective(v, prog) == pytest.approx(BOX_MAX_B2, abs=1e-15)


def test_oracle_case3_below_bound(case3):
    res = maximize_objective(program(case3))
    d = upper_bound(case3).d_value
    assert res.value <= d + 1e-9


def test_power_representative_recovers_offset():
    lower = np.array([1.0, 0.4, 0.1])
    x, v = power_representative(3.7 * (0.8 + lower), lower)
    assert x == pytest.approx(0.8, rel=1e-12)
    np.testing.assert_allclose(v, 0.8 + lower, rtol=1e-12)


def test_conditional_entropy_power_examples():
    single = ConditionalGaussianInput((1.0,), (1.0,))
    assert conditional_entropy_power(single, 1.0) == pytest.approx(TWO_PI_E * 2, rel=1e-15)
    pair = ConditionalGaussianInput((0.5, 0.5), (0.0, 1.0))
    assert conditional_entropy_power(pair, 1.0) == pytest.approx(TWO_PI_E * math.sqrt(2), rel=1e-15)
    mixed = ConditionalGaussianInput((0.3, 0.7), (2.0, 5.0))
    assert conditional_entropy_power(mixed, 0.0) == pytest.approx(TWO_PI_E * 2**0.3 * 5**0.7, rel=1e-15)
    assert conditional_entropy_power(pair, 0.0) == 0.0


def test_concavity_examples():
    rep = check_costa_concavity(ConditionalGaussianInput((1.0,), (1.0,)), [0, 1, 2, 3])
    assert abs(rep.max_second_difference) <= 1e-12 * rep.scale
    rep = check_costa_concavity(ConditionalGaussianInput((0.5, 0.5), (0.0, 4.0)), [0, 1, 2, 3, 4])
    assert rep.max_second_difference < 0
    rep = check_costa_concavity(ConditionalGaussianInput((0.9, 0.1), (1.0, 100.0)), np.linspace(0, 10, 50))
    assert rep.passed


def test_concavity_detects_convex_input(monkeypatch):
    import fadingbc.verify as vmod

    monkeypatch.setattr(vmod, "conditional_entropy_power", lambda inp, t: math.exp(t))
    with pytest.raises(ConcavityViolated):
        check_costa_concavity(ConditionalGaussianInput((1.0,), (1.0,)), [0, 1, 2])


def test_epi_examples(case1):
    alpha = upper_bound(case1).alpha
    tight = check_epi_combination(ConditionalGaussianInput((1.0,), (1.0,)), case1, alpha)
    assert abs(tight.margin) <= 1e-9 * tight.lhs
    inp = ConditionalGaussianInput((0.5, 0.5), (0.5, 2.0))
    rep = check_epi_combination(inp, case1, alpha)
    lhs = TWO_PI_E * math.sqrt(1.0 * 2.5)
    rhs = TWO_PI_E * (math.sqrt(1.5 * 3.0) / 3 + 2 * math.sqrt(0.75 * 2.25) / 3)
    assert rep.lhs == pytest.approx(lhs, rel=1e-14)
    assert rep.rhs == pytest.approx(rhs, rel=1e-14)
    assert rep.margin > 0
    with pytest.raises(ValueError):
        check_epi_combination(inp, case1, [0.5, 0.5])


def test_epi_random(rng):
    for _ in range(100):
        spec = random_channel(rng)
        alpha = upper_bound(spec).alpha
        inp = random_conditional_input(rng)
        check_epi_combination(inp, spec, alpha)
        check_costa_concavity(inp, np.linspace(0, 5, 11))


def test_beta_grid_oracle(case1, case2_b2):
    beta, val = beta_grid_oracle(case1, 10_001)
    assert beta == 0.0 and val == pytest.approx(0.83048202372184058697, abs=1e-15)
    beta, val = beta_grid_oracle(case2_b2, 10_001)
    assert beta == 1.0 and val == pytest.approx(1.0577386087099679895, abs=1e-15)
    with pytest.raises(ValueError):
        beta_grid_oracle(case1, 1)


def test_quadrature_single_component():
    h = mixture_entropy_quadrature(ConditionalGaussianInput((1.0,), (1.0,)), 0.0)
    assert h == pytest.approx(2.0470955851806411027, abs=1e-8)
    h = mixture_entropy_quadrature(ConditionalGaussianInput((0.5, 0.5), (1.0, 1.0)), 0.0)
    assert h == pytest.approx(2.0470955851806411027, abs=1e-8)
    for s, t in ((0.01, 0.0), (3.0, 2.0), (50.0, 0.5)):
        h = mixture_entropy_quadrature(ConditionalGaussianInput((1.0,), (s,)), t)
        assert h == pytest.approx(0.5 * math.log2(TWO_PI_E * (s + t)), abs=1e-7)


def _riemann_entropy(w, var, n=400_001):
    s = math.sqrt(max(var))
    y = np.linspace(-14 * s, 14 * s, n)
    f = sum(wi * np.exp(-y * y / (2 * v)) / math.sqrt(2 * math.pi * v) for wi, v in zip(w, var))
    integrand = np.where(f > 0, -f * np.log2(np.where(f > 0, f, 1.0)), 0.0)
    return float(np.sum(integrand) * (y[1] - y[0]))


def test_quadrature_mixture_concavity():
    inp = ConditionalGaussianInput((0.5, 0.5), (0.25, 4.0))
    ts = [0.0, 0.5, 1.0, 2.0, 4.0]
    hs = [mixture_entropy_quadrature(inp, t) for t in ts]
    for t, h in zip(ts, hs):
        assert h == pytest.approx(_riemann_entropy(inp.weights, [v + t for v in inp.variances]), abs=1e-6)
    n_pow = np.power(2.0, 2 * np.array(hs))
    slopes = np.diff(n_pow) / np.diff(ts)
    second = 2 * np.diff(slopes) / (np.array(ts[2:]) - np.array(ts[:-2]))
    assert np.all(second <= 0)


def test_run_suites_small():
    rng = np.random.default_rng(3)
    chans = [random_channel(rng) for _ in range(15)]
    out = run_suites(chans, rng, beta_resolution=1001)
    for name in ("root_count", "alpha_feasibility", "stationarity", "beta_endpoint", "gap", "concavity", "epi"):
        assert out["suites"][name]["failed"] == 0, name
    cases = out["oracle_equivalence_by_case"]
    for key in ("Case1", "Case3"):
        if key in cases:
            assert cases[key]["failed"] == 0
