import numpy as np
import pytest
from scipy import optimize

from arplr import (
    InnerConfig,
    NormedSpace,
    RegularizedModel,
    SymmetricTensor,
    TaylorModel,
    Termination,
    minimize_model,
    symmetrize,
)
from arplr.inner import default_max_iters


def _linear_model(g, sigma, r=2.0, p=1, beta=1.0):
    n = len(g)
    tm = TaylorModel(np.zeros(n), 0.0, (SymmetricTensor(1, n, np.asarray(g, float)),))
    return RegularizedModel(tm, sigma, p, beta, NormedSpace(n, r))


def _random_model(p, beta, sigma, dim, r, rng):
    tensors = tuple(
        SymmetricTensor(l, dim, symmetrize(rng.standard_normal((dim,) * l)))
        for l in range(1, p + 1)
    )
    tm = TaylorModel(rng.standard_normal(dim), float(rng.standard_normal()), tensors)
    return RegularizedModel(tm, sigma, p, beta, NormedSpace(dim, r))


def test_analytic_quadratic_instance():
    # m(s) = <g, s> + |s|^2 with g = (2, 0): minimizer (-1, 0), decrease -1
    m = _linear_model([2.0, 0.0], sigma=2.0)
    res = minimize_model(m, InnerConfig(grad_tol_absolute=1e-10, max_iters=50))
    assert np.allclose(res.s, [-1.0, 0.0], atol=1e-8)
    assert res.model_value == pytest.approx(-1.0, abs=1e-8)
    assert res.iterations == 1
    assert res.decreased


def test_zero_gradient_at_entry():
    m = _linear_model([0.0, 0.0], sigma=1.0)
    res = minimize_model(m, InnerConfig(grad_tol_absolute=1e-8, max_iters=10))
    assert res.termination is Termination.ZERO_GRADIENT
    assert res.iterations == 0
    assert np.all(res.s == 0.0)
    assert not res.decreased


def test_rejects_noncoercive_model():
    m = _linear_model([1.0, 1.0], sigma=0.0)
    with pytest.raises(ValueError):
        minimize_model(m, InnerConfig(grad_tol_absolute=1e-8))


def test_strict_monotone_decrease_and_stopping_rule():
    rng = np.random.default_rng(0)
    for r, p, beta in [(2.0, 2, 1.0), (1.5, 2, 0.5), (3.0, 3, 1.0), (1.5, 1, 0.5)]:
        m = _random_model(p, beta, 1.0, 4, r, rng)
        cfg = InnerConfig(
            grad_tol_absolute=1e-6,
            step_power=(100.0, p + beta - 1.0),
            max_iters=20_000,
        )
        res = minimize_model(m, cfg)
        hist = np.array(res.value_history)
        assert np.all(np.diff(hist) < 0.0)
        assert res.termination is not Termination.MAX_ITERS
        bar = max(1e-6, 100.0 * m.space.norm(res.s) ** (p + beta - 1.0))
        assert res.model_grad_dual_norm <= bar


def test_multistart_oracle_confirms_near_global_value():
    rng = np.random.default_rng(1)
    m = _random_model(2, 1.0, 1.0, 4, 2.0, rng)
    res = minimize_model(m, InnerConfig(grad_tol_absolute=1e-7, max_iters=50_000))
    best = np.inf
    for _ in range(40):
        start = rng.standard_normal(4) * rng.choice([0.3, 1.0, 3.0])
        out = optimize.minimize(m.value, start, jac=m.gradient, method="L-BFGS-B")
        best = min(best, float(out.fun))
    assert best >= res.model_value - 1e-6


def test_cumulative_decrease_bounded_by_total_available():
    rng = np.random.default_rng(2)
    m = _random_model(2, 1.0, 0.7, 4, 2.0, rng)
    res = minimize_model(m, InnerConfig(grad_tol_absolute=1e-7, max_iters=50_000))
    cumulative = res.value_history[0] - res.value_history[-1]
    assert cumulative > 0.0
    best = min(
        float(optimize.minimize(m.value, rng.standard_normal(4), jac=m.gradient).fun)
        for _ in range(30)
    )
    assert cumulative <= res.value_history[0] - best + 1e-6


def test_level_set_confinement():
    rng = np.random.default_rng(3)
    m = _random_model(3, 1.0, 1.2, 3, 1.5, rng)
    res = minimize_model(m, InnerConfig(grad_tol_absolute=1e-7, max_iters=20_000))
    m0 = res.value_history[0]
    assert all(v <= m0 for v in res.value_history)


def test_max_iters_is_reported_not_fatal():
    rng = np.random.default_rng(4)
    m = _random_model(2, 1.0, 1e-3, 6, 2.0, rng)
    res = minimize_model(m, InnerConfig(grad_tol_absolute=1e-14, max_iters=2))
    assert res.termination is Termination.MAX_ITERS
    assert res.iterations == 2
    assert res.decreased


def test_step_power_rule_branch_requires_motion():
    # at s = 0 the power branch would read |g| <= 0 and must stay silent
    m = _linear_model([1.0, 0.5], sigma=1.0)
    cfg = InnerConfig(grad_tol_absolute=1e-12, step_power=(1e12, 1.0), max_iters=10)
    res = minimize_model(m, cfg)
    assert res.iterations >= 1
    assert res.termination in (Termination.STEP_POWER_RULE, Termination.GRADIENT_BELOW_TOL,
                               Termination.ZERO_GRADIENT)


def test_exponent_bookkeeping_defaults():
    assert default_max_iters(4, 2, 1e-6) == 10 * 4 * 3 * 6
    assert default_max_iters(1, 1, 0.5) == 10 * 1 * 2 * 1


def test_descent_exponents_bookkeeping():
    from arplr.inner import descent_exponents

    # q = 1.5 geometry, order-2 model with beta = 1: fast branch from the
    # space smoothness, slow branch from the regularizer power
    assert descent_exponents(1.5, 2, 1.0) == (1.5, 3.0)
    assert descent_exponents(2.0, 2, 1.0) == (2.0, 3.0)
    # order-1 model with small beta: the regularizer power is the smaller
    assert descent_exponents(2.0, 1, 0.5) == (1.5, 1.5)


def test_config_validation():
    with pytest.raises(ValueError):
        InnerConfig(grad_tol_absolute=0.0)
    with pytest.raises(ValueError):
        InnerConfig(grad_tol_absolute=1e-6, max_iters=0)
    with pytest.raises(ValueError):
        InnerConfig(grad_tol_absolute=1e-6, step_power=(0.0, 1.0))
    with pytest.raises(ValueError):
        InnerConfig(grad_tol_absolute=1e-6, ray_scan_points=2)
