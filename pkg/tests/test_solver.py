import math

import numpy as np
import pytest

from arplr import (
    DoubleWell,
    IterationRecord,
    NormedSpace,
    OuterConfig,
    QuadraticBowl,
    RunRecord,
    SolveStatus,
    check_trajectory,
    solve,
)


def _trajectory_holder(problem, space, p, x0, run):
    radius = space.norm(x0)
    for rec in run.records:
        radius = max(radius, rec.iterate_norm + rec.step_norm)
    return problem.holder_constant(space, p, 1.01 * radius)


def test_config_validation_messages():
    with pytest.raises(ValueError, match="sigma_min"):
        OuterConfig(p=2, beta=1.0, sigma_min=2.0, sigma0=1.0)
    with pytest.raises(ValueError, match="eta"):
        OuterConfig(p=2, beta=1.0, eta1=0.9, eta2=0.5)
    with pytest.raises(ValueError, match="gamma2"):
        OuterConfig(p=2, beta=1.0, gamma2=5.0, gamma3=2.0)
    with pytest.raises(ValueError, match="chi"):
        OuterConfig(p=2, beta=1.0, chi=1.0)
    with pytest.raises(ValueError, match="epsilon"):
        OuterConfig(p=2, beta=1.0, epsilon=2.0)


def test_quadratic_converges_with_unit_acceptance_ratio():
    problem = QuadraticBowl(6)
    space = NormedSpace(6, 2.0)
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-6)
    run = solve(problem, problem.default_x0(), cfg, space)
    assert run.status is SolveStatus.CONVERGED
    assert run.final_grad_dual_norm <= 1e-6
    # the order-2 model is exact for a quadratic, so every computed step is
    # very successful (ratio 1 up to rounding in the decrease quotient)
    assert all(rec.successful for rec in run.records)
    assert all(rec.rho >= cfg.eta2 for rec in run.records)
    assert np.allclose(run.final_point, problem.minimizer(), atol=1e-5)
    assert check_trajectory(run, cfg, L=0.0, f_low=problem.f_low) == []


def test_stationary_start_returns_zero_iterations():
    problem = QuadraticBowl(5)
    space = NormedSpace(5, 2.0)
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-6)
    x_star = problem.minimizer()
    run = solve(problem, x_star, cfg, space)
    assert run.status is SolveStatus.CONVERGED
    assert run.total_iterations == 0
    assert np.array_equal(run.final_point, x_star)
    assert run.f_evals == 1 and run.deriv_evals == 1
    assert check_trajectory(run, cfg, L=0.0, f_low=problem.f_low) == []


def test_double_well_run_invariants():
    problem = DoubleWell(4)
    space = NormedSpace(4, 2.0)
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    x0 = problem.default_x0()
    run = solve(problem, x0, cfg, space)
    assert run.status is SolveStatus.CONVERGED

    # trajectory checks, with the Hoelder constant valid on the visited ball
    L = _trajectory_holder(problem, space, 2, x0, run)
    assert check_trajectory(run, cfg, L=L, f_low=problem.f_low) == []

    # acceptance implies a decrease of at least eta1 times the predicted one
    for rec in run.records:
        assert rec.model_decrease > 0.0
        if rec.successful:
            assert rec.actual_decrease >= cfg.eta1 * rec.model_decrease - 1e-12

    # sigma never drops below its floor
    assert all(rec.sigma >= cfg.sigma_min for rec in run.records)

    # telescoping: the accepted decreases account exactly for the total
    total = sum(rec.actual_decrease for rec in run.records if rec.successful)
    assert total == pytest.approx(run.f_initial - run.f_final, abs=1e-12 * max(1, abs(run.f_initial)))

    # evaluation accounting
    assert run.f_evals == run.total_iterations + 1
    assert run.deriv_evals == run.successes + 1
    last = run.records[-1]
    assert last.f_evals_so_far == run.f_evals
    assert last.deriv_evals_so_far == run.deriv_evals


def test_double_well_third_order_run():
    problem = DoubleWell(4)
    space = NormedSpace(4, 2.0)
    cfg = OuterConfig(p=3, beta=1.0, epsilon=1e-5)
    x0 = problem.default_x0()
    run = solve(problem, x0, cfg, space)
    assert run.status is SolveStatus.CONVERGED
    L = _trajectory_holder(problem, space, 3, x0, run)
    assert check_trajectory(run, cfg, L=L, f_low=problem.f_low) == []


def test_requesting_unavailable_order_raises():
    problem = QuadraticBowl(4)
    cfg = OuterConfig(p=3, beta=1.0)
    with pytest.raises(ValueError, match="order"):
        solve(problem, np.ones(4), cfg, NormedSpace(4, 2.0))


def test_inner_cap_maps_to_unsuccessful_iteration():
    problem = DoubleWell(4)
    space = NormedSpace(4, 2.0)
    # a huge starting weight keeps steps tiny, so neither inner stopping
    # branch can fire after a single line search and the cap must trip
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-8, sigma0=1e6, inner_max_iters=1,
                      max_outer_iters=40)
    run = solve(problem, problem.default_x0(), cfg, space)
    capped = [rec for rec in run.records if rec.inner_termination == "max_iters"]
    assert capped, "expected at least one capped inner solve"
    assert all(not rec.successful for rec in capped)
    # sigma was raised after each capped iteration
    for rec in capped[:-1]:
        later = run.records[rec.k + 1]
        assert later.sigma == pytest.approx(cfg.gamma2 * rec.sigma, rel=1e-12)


def test_sigma_update_endpoints_deterministic():
    problem = DoubleWell(4)
    space = NormedSpace(4, 2.0)
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    run = solve(problem, problem.default_x0(), cfg, space)
    for a, b in zip(run.records[:-1], run.records[1:]):
        if a.rho >= cfg.eta2 and a.inner_termination != "max_iters":
            assert b.sigma == pytest.approx(max(cfg.sigma_min, cfg.gamma1 * a.sigma), rel=1e-12)
        elif a.successful:
            assert b.sigma == pytest.approx(a.sigma, rel=1e-12)
        else:
            assert b.sigma == pytest.approx(cfg.gamma2 * a.sigma, rel=1e-12)


def _synthetic_run(records, f_initial=10.0, f_final=5.0, sigma_max=1.0,
                   status=SolveStatus.CONVERGED):
    return RunRecord(
        records=tuple(records),
        final_point=np.zeros(2),
        final_grad_dual_norm=1e-9,
        status=status,
        sigma_max_observed=sigma_max,
        f_initial=f_initial,
        f_final=f_final,
        f_evals=len(records) + 1,
        deriv_evals=sum(1 for r in records if r.successful) + 1,
    )


def _record(k=0, sigma=1.0, step=1.0, grad=1.0, md=1.0, ad=0.9, successful=True):
    return IterationRecord(
        k=k,
        sigma=sigma,
        iterate_norm=1.0,
        step_norm=step,
        grad_dual_norm=grad,
        model_decrease=md,
        actual_decrease=ad,
        rho=ad / md,
        successful=successful,
        inner_iters=3,
        inner_termination="gradient_below_tol",
        f_evals_so_far=k + 2,
        deriv_evals_so_far=k + 2,
    )


def test_check_trajectory_flags_model_decrease_violation():
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    # floor is sigma/Gamma(4) |s|^3 = 1/6; a smaller decrease must be caught
    bad = _record(md=0.1, ad=0.09)
    violations = check_trajectory(_synthetic_run([bad]), cfg)
    assert any(v.code == "a" for v in violations)
    good = _record(md=0.2, ad=0.18)
    assert check_trajectory(_synthetic_run([good]), cfg) == []


def test_check_trajectory_flags_sigma_cap_violation():
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    bad = _record(sigma=1e6, md=2e5, ad=1.9e5)
    violations = check_trajectory(_synthetic_run([bad], sigma_max=1e6), cfg, L=1.0)
    assert any(v.code == "b" for v in violations)


def test_check_trajectory_flags_taylor_remainder_violation():
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    bad = _record(md=1.0, ad=-2.0, successful=False)  # |f(trial) - T| = 3 >> L/6
    violations = check_trajectory(_synthetic_run([bad]), cfg, L=1.0)
    assert any(v.code == "c" for v in violations)


def test_check_trajectory_flags_step_floor_violation():
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    tiny = _record(k=0, step=1e-9, md=1e-27, ad=1e-27)
    ok_last = _record(k=1)
    violations = check_trajectory(_synthetic_run([tiny, ok_last]), cfg, L=1.0)
    assert any(v.code == "d" for v in violations)
    # the terminating iteration itself carries no step-size guarantee
    violations2 = check_trajectory(_synthetic_run([ok_last, tiny]), cfg, L=1.0)
    assert not any(v.code == "d" for v in violations2)


def test_check_trajectory_flags_counting_violation():
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    # many unsuccessful iterations with sigma never moving: impossible under
    # the update rule, and the count bound must flag it
    records = [_record(k=i, successful=False, ad=0.0) for i in range(10)]
    violations = check_trajectory(_synthetic_run(records, status=SolveStatus.MAX_ITERS), cfg)
    assert any(v.code == "e" for v in violations)


def test_check_trajectory_flags_success_count_violation():
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5, sigma_min=1.0, eta1=0.5)
    # f only drops by 1e-12 overall, yet dozens of successful records each
    # claim a large model decrease: the worst-case count must flag it
    records = [_record(k=i, md=1e-9, ad=1e-13, step=1e-3) for i in range(50)]
    run = _synthetic_run(records, f_initial=1.0, f_final=1.0 - 1e-12,
                         status=SolveStatus.MAX_ITERS)
    violations = check_trajectory(run, cfg, L=1.0, f_low=1.0 - 1e-12)
    assert any(v.code == "f" for v in violations)


def test_counting_bound_formula_on_real_run():
    problem = DoubleWell(4)
    space = NormedSpace(4, 2.0)
    cfg = OuterConfig(p=2, beta=1.0, epsilon=1e-5)
    run = solve(problem, problem.default_x0(), cfg, space)
    bound = run.successes * (1 + abs(math.log(cfg.gamma1)) / math.log(cfg.gamma2)) + math.log(
        max(run.sigma_max_observed / cfg.sigma0, 1.0)
    ) / math.log(cfg.gamma2)
    assert run.total_iterations <= bound + 1e-9
