"""Experiment driver: single solves, accuracy sweeps, and mesh sweeps.

Run records are serialized as line-delimited text — a ``# key = value``
header echoing the configuration followed by one CSV row per iteration —
with floats rendered by ``repr`` so that identical configurations and
seeds produce byte-identical files.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace

import numpy as np

from .geometry import NormedSpace
from .problems import ProblemOracle, get_problem
from .solver import (
    OuterConfig,
    RunRecord,
    SolveStatus,
    check_trajectory,
    solve,
    theorem_success_bound,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "EpsRow",
    "SweepSummary",
    "MeshRow",
    "run_single",
    "run_epsilon_sweep",
    "run_mesh_sweep",
    "write_run_record",
]


class ConfigError(ValueError):
    """Bad experiment configuration; the message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "quadratic"
    n: int | None = None  # dimension, or mesh intervals for 'pendulum'
    r: float = 0.0  # 0 means the problem's default space
    x0: str = "default"  # default | zeros | ones | random | comma-separated floats
    seed: int = 0
    out: str | None = None
    p: int = 2
    beta: float | None = None  # None: use the problem's Hoelder order
    epsilon: float = 1e-5
    sigma0: float = 1.0
    sigma_min: float = 1e-8
    eta1: float = 0.1
    eta2: float = 0.9
    gamma1: float = 0.5
    gamma2: float = 2.0
    gamma3: float = 4.0
    chi: float = 0.5
    theta: float = 100.0
    max_outer_iters: int = 2000
    inner_max_iters: int | None = None  # None: the solver's default guard
    eps_start: float | None = None
    eps_stop: float | None = None
    eps_points: int = 0
    mesh: tuple = ()

    def build(self):
        """Resolve the configuration into (problem, space, x0, OuterConfig)."""
        try:
            problem = get_problem(self.problem, self.n, self.beta)
        except KeyError as exc:
            raise ConfigError(f"problem: {exc.args[0]}") from None
        except ValueError as exc:
            raise ConfigError(f"n: {exc}") from None
        space = problem.default_space() if self.r <= 0.0 else NormedSpace(problem.dim, self.r)
        beta = problem.beta if self.beta is None else self.beta
        try:
            outer = OuterConfig(
                p=self.p,
                beta=beta,
                epsilon=self.epsilon,
                sigma0=self.sigma0,
                sigma_min=self.sigma_min,
                eta1=self.eta1,
                eta2=self.eta2,
                gamma1=self.gamma1,
                gamma2=self.gamma2,
                gamma3=self.gamma3,
                chi=self.chi,
                theta=self.theta,
                max_outer_iters=self.max_outer_iters,
                inner_max_iters=self.inner_max_iters,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        x0 = self._build_x0(problem)
        return problem, space, x0, outer

    def _build_x0(self, problem: ProblemOracle) -> np.ndarray:
        spec = self.x0
        if spec == "default":
            return problem.default_x0()
        if spec == "zeros":
            return np.zeros(problem.dim)
        if spec == "ones":
            return np.ones(problem.dim)
        if spec == "random":
            return np.random.default_rng(self.seed).standard_normal(problem.dim)
        try:
            values = np.array([float(tok) for tok in spec.split(",")])
        except ValueError:
            raise ConfigError(f"x0: cannot parse {spec!r}") from None
        if values.shape != (problem.dim,):
            raise ConfigError(
                f"x0: expected {problem.dim} entries for '{self.problem}', got {values.size}"
            )
        return values


def _effective_holder(problem: ProblemOracle, space, cfg: OuterConfig, run: RunRecord, x0):
    """Hoelder constant of the order-p derivative on a ball covering the
    recorded trajectory and trial points, when the oracle knows one and the
    solver ran with the oracle's own Hoelder order."""
    if cfg.beta != problem.beta:
        return None
    radius = space.norm(x0)
    for rec in run.records:
        radius = max(radius, rec.iterate_norm + rec.step_norm)
    return problem.holder_constant(space, cfg.p, 1.01 * radius)


def run_single(cfg: ExperimentConfig, label: str | None = None):
    """One solve plus its trajectory checks; writes a record file when an
    output directory is configured.  Returns (run, violations, path)."""
    problem, space, x0, outer = cfg.build()
    run = solve(problem, x0, outer, space)
    L = _effective_holder(problem, space, outer, run, x0)
    violations = check_trajectory(run, outer, L=L, f_low=problem.f_low)
    path = None
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        name = label or f"run_{problem.name}"
        path = os.path.join(cfg.out, f"{name}.txt")
        write_run_record(path, cfg, space, run)
    return run, violations, path


def write_run_record(path: str, cfg: ExperimentConfig, space, run: RunRecord) -> None:
    lines = ["# arplr run record"]
    for f in fields(ExperimentConfig):
        if f.name == "out":  # environment, not part of the experiment
            continue
        lines.append(f"# {f.name} = {getattr(cfg, f.name)!r}")
    lines.append(f"# space_n = {space.n}")
    lines.append(f"# space_r = {space.r!r}")
    lines.append(f"# status = {run.status.value}")
    lines.append(f"# f_initial = {run.f_initial!r}")
    lines.append(f"# f_final = {run.f_final!r}")
    lines.append(f"# final_grad_dual_norm = {run.final_grad_dual_norm!r}")
    lines.append(f"# sigma_max_observed = {run.sigma_max_observed!r}")
    lines.append(
        "k,sigma,iterate_norm,step_norm,grad_dual_norm,model_decrease,"
        "actual_decrease,rho,successful,inner_iters,f_evals,deriv_evals"
    )
    for rec in run.records:
        lines.append(
            f"{rec.k},{rec.sigma!r},{rec.iterate_norm!r},{rec.step_norm!r},"
            f"{rec.grad_dual_norm!r},{rec.model_decrease!r},{rec.actual_decrease!r},"
            f"{rec.rho!r},{int(rec.successful)},{rec.inner_iters},"
            f"{rec.f_evals_so_far},{rec.deriv_evals_so_far}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# -- accuracy sweep ------------------------------------------------------------


@dataclass(frozen=True)
class EpsRow:
    epsilon: float
    successes: int
    successes_pre_termination: int
    total_iters: int
    f_evals: int
    deriv_evals: int
    sigma_max: float
    converged: bool
    bound: float | None
    within_bound: bool | None


@dataclass(frozen=True)
class SweepSummary:
    rows: tuple
    slope: float | None
    slope_residual: float | None
    theoretical_exponent: float
    slope_ok: bool
    all_within_bound: bool


def run_epsilon_sweep(cfg: ExperimentConfig, slope_margin: float = 0.3) -> SweepSummary:
    """Solve at each accuracy of the geometric grid with a shared start and
    seed, check each success count against the worst-case bound (when the
    oracle knows its Hoelder constant), and fit the growth exponent."""
    if cfg.eps_start is None or cfg.eps_stop is None or cfg.eps_points < 1:
        raise ConfigError("epsilon_sweep: eps_start, eps_stop and eps_points are required")
    grid = np.geomspace(cfg.eps_start, cfg.eps_stop, cfg.eps_points)
    rows = []
    for i, eps in enumerate(grid):
        sub = replace(cfg, epsilon=float(eps))
        problem, space, x0, outer = sub.build()
        run = solve(problem, x0, outer, space)
        L = _effective_holder(problem, space, outer, run, x0)
        bound = None
        within = None
        if L is not None and problem.f_low is not None:
            bound = theorem_success_bound(
                outer, L, run.f_initial, problem.f_low, run.sigma_max_observed
            )
            within = run.successes_before_termination() <= bound + 1e-9
        converged = run.status is SolveStatus.CONVERGED
        rows.append(
            EpsRow(
                epsilon=float(eps),
                successes=run.successes,
                successes_pre_termination=run.successes_before_termination(),
                total_iters=run.total_iterations,
                f_evals=run.f_evals,
                deriv_evals=run.deriv_evals,
                sigma_max=run.sigma_max_observed,
                converged=converged,
                bound=bound,
                within_bound=within,
            )
        )
        if cfg.out:
            os.makedirs(cfg.out, exist_ok=True)
            write_run_record(
                os.path.join(cfg.out, f"run_{problem.name}_eps{i}.txt"), sub, space, run
            )

    exponent = (cfg.p + _sweep_beta(cfg)) / (cfg.p + _sweep_beta(cfg) - 1.0)
    fit_rows = [row for row in rows if row.converged and row.successes >= 1]
    slope = residual = None
    if len(fit_rows) >= 2:
        xs = np.log([1.0 / row.epsilon for row in fit_rows])
        ys = np.log([float(row.successes) for row in fit_rows])
        coeffs, res = np.polyfit(xs, ys, 1, full=True)[:2]
        slope = float(coeffs[0])
        residual = float(math.sqrt(res[0] / len(fit_rows))) if len(res) else 0.0
    summary = SweepSummary(
        rows=tuple(rows),
        slope=slope,
        slope_residual=residual,
        theoretical_exponent=exponent,
        slope_ok=slope is None or slope <= exponent + slope_margin,
        all_within_bound=all(row.within_bound is not False for row in rows),
    )
    if cfg.out:
        _write_eps_csv(os.path.join(cfg.out, "summary.csv"), summary)
    return summary


def _sweep_beta(cfg: ExperimentConfig) -> float:
    if cfg.beta is not None:
        return cfg.beta
    problem = get_problem(cfg.problem, cfg.n, cfg.beta)
    return problem.beta


def _write_eps_csv(path: str, summary: SweepSummary) -> None:
    lines = [
        "epsilon,successes,successes_pre_termination,total_iters,f_evals,"
        "deriv_evals,sigma_max,converged,bound,within_bound"
    ]
    for row in summary.rows:
        lines.append(
            f"{row.epsilon!r},{row.successes},{row.successes_pre_termination},"
            f"{row.total_iters},{row.f_evals},{row.deriv_evals},{row.sigma_max!r},"
            f"{int(row.converged)},{row.bound!r},{row.within_bound}"
        )
    lines.append(f"# slope = {summary.slope!r}")
    lines.append(f"# slope_residual = {summary.slope_residual!r}")
    lines.append(f"# theoretical_exponent = {summary.theoretical_exponent!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# -- mesh sweep ------------------------------------------------------------------


@dataclass(frozen=True)
class MeshRow:
    mesh_size: int
    total_iters: int
    successes: int
    f_evals: int
    converged: bool


def run_mesh_sweep(cfg: ExperimentConfig) -> list:
    """Solve the discretized problem at each mesh size with the same
    accuracy; mesh-consistent variables make the iteration counts directly
    comparable."""
    if not cfg.mesh:
        raise ConfigError("mesh_sweep: a nonempty mesh list is required")
    rows = []
    for n_mesh in cfg.mesh:
        sub = replace(cfg, n=int(n_mesh))
        problem, space, x0, outer = sub.build()
        run = solve(problem, x0, outer, space)
        rows.append(
            MeshRow(
                mesh_size=int(n_mesh),
                total_iters=run.total_iterations,
                successes=run.successes,
                f_evals=run.f_evals,
                converged=run.status is SolveStatus.CONVERGED,
            )
        )
        if cfg.out:
            os.makedirs(cfg.out, exist_ok=True)
            write_run_record(
                os.path.join(cfg.out, f"run_{problem.name}.txt"), sub, space, run
            )
    if cfg.out:
        lines = ["mesh_size,total_iters,successes,f_evals,converged"]
        for row in rows:
            lines.append(
                f"{row.mesh_size},{row.total_iters},{row.successes},"
                f"{row.f_evals},{int(row.converged)}"
            )
        with open(os.path.join(cfg.out, "summary.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return rows
