"""Command-line driver.

Subcommands: ``run`` (one solve plus trajectory checks), ``sweep-eps``
(accuracy sweep with the worst-case-count check and exponent fit),
``sweep-mesh`` (mesh-independence table), ``check-oracle`` (finite-difference
verification of a problem's derivatives), and ``list-problems``.

Options may also come from a key-value config file (``key = value`` lines,
``#`` comments); explicit flags override file entries.  Exit codes: 0 on
success, 1 when a check reports violations, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace

import numpy as np

from .harness import (
    ConfigError,
    ExperimentConfig,
    run_epsilon_sweep,
    run_mesh_sweep,
    run_single,
)
from .problems import fd_check_oracle, get_problem, problem_ids
from .solver import SolveStatus

_FLOAT_KEYS = {
    "r", "beta", "epsilon", "sigma0", "sigma_min", "eta1", "eta2",
    "gamma1", "gamma2", "gamma3", "chi", "theta", "eps_start", "eps_stop",
}
_INT_KEYS = {"n", "seed", "p", "max_outer_iters", "inner_max_iters", "eps_points"}
_KEY_ALIASES = {"eps": "epsilon", "max_outer": "max_outer_iters", "inner_max": "inner_max_iters"}


def _parse_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"config file line {lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                key, val = key.strip().replace("-", "_"), val.strip()
                key = _KEY_ALIASES.get(key, key)
                if key in _FLOAT_KEYS:
                    values[key] = float(val)
                elif key in _INT_KEYS:
                    values[key] = int(val)
                elif key == "mesh":
                    values[key] = tuple(int(tok) for tok in val.split(","))
                elif key in {"problem", "x0", "out"}:
                    values[key] = val
                else:
                    raise ConfigError(f"config file line {lineno}: unknown key {key!r}")
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path!r} ({exc})") from None
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key-value config file; flags override it")
    parser.add_argument("--problem", help="problem id (see list-problems)")
    parser.add_argument("--n", type=int, help="dimension (mesh intervals for pendulum)")
    parser.add_argument("--r", type=float, help="norm exponent; default: problem's space")
    parser.add_argument("--p", type=int, help="model order")
    parser.add_argument("--beta", type=float, help="regularizer Hoelder order")
    parser.add_argument("--eps", dest="epsilon", type=float, help="gradient accuracy")
    parser.add_argument("--sigma0", type=float, help="initial regularization weight")
    parser.add_argument("--sigma-min", dest="sigma_min", type=float)
    parser.add_argument("--eta1", type=float)
    parser.add_argument("--eta2", type=float)
    parser.add_argument("--gamma1", type=float)
    parser.add_argument("--gamma2", type=float)
    parser.add_argument("--gamma3", type=float)
    parser.add_argument("--chi", type=float)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--max-outer", dest="max_outer_iters", type=int)
    parser.add_argument("--inner-max", dest="inner_max_iters", type=int,
                        help="per-solve inner iteration cap (default: solver formula)")
    parser.add_argument("--x0", help="zeros | ones | default | random | v1,v2,...")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory for record files")


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(_parse_config_file(args.config))
    known = {f.name for f in fields(ExperimentConfig)}
    for key, val in vars(args).items():
        if key in known and val is not None:
            values[key] = val
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _print_run(run, violations) -> None:
    print(f"status: {run.status.value}")
    print(f"iterations: {run.total_iterations} (successful: {run.successes})")
    print(f"f: {run.f_initial!r} -> {run.f_final!r}")
    print(f"final dual gradient norm: {run.final_grad_dual_norm:.6e}")
    print(f"evaluations: f {run.f_evals}, derivatives {run.deriv_evals}")
    print(f"sigma max observed: {run.sigma_max_observed:.6e}")
    if violations:
        print(f"violations ({len(violations)}):")
        for v in violations:
            where = "run" if v.iteration is None else f"k={v.iteration}"
            print(f"  ({v.code}) {v.name} [{where}]: {v.detail}")
    else:
        print("violations: none")


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    run, violations, path = run_single(cfg)
    _print_run(run, violations)
    if path:
        print(f"record: {path}")
    if violations:
        return 1
    return 0 if run.status is SolveStatus.CONVERGED else 1


def _cmd_sweep_eps(args) -> int:
    cfg = _build_config(args)
    summary = run_epsilon_sweep(cfg)
    print("epsilon      |S|  |S|<bound  iters  f_evals  converged")
    for row in summary.rows:
        mark = "-" if row.within_bound is None else ("yes" if row.within_bound else "NO")
        print(
            f"{row.epsilon:<12.3e} {row.successes:<4d} {mark:<10} "
            f"{row.total_iters:<6d} {row.f_evals:<8d} {row.converged}"
        )
    print(f"theoretical exponent: {summary.theoretical_exponent:.4f}")
    if summary.slope is not None:
        print(f"fitted slope: {summary.slope:.4f} (residual {summary.slope_residual:.3e})")
    ok = summary.slope_ok and summary.all_within_bound and all(r.converged for r in summary.rows)
    print("sweep check:", "ok" if ok else "FAILED")
    return 0 if ok else 1


def _cmd_sweep_mesh(args) -> int:
    cfg = _build_config(args)
    if args.mesh:
        cfg = replace(cfg, mesh=tuple(int(tok) for tok in args.mesh.split(",")))
    rows = run_mesh_sweep(cfg)
    print("mesh  iters  successes  f_evals  converged")
    for row in rows:
        print(
            f"{row.mesh_size:<5d} {row.total_iters:<6d} {row.successes:<10d} "
            f"{row.f_evals:<8d} {row.converged}"
        )
    counts = [row.total_iters for row in rows if row.converged]
    ok = len(counts) == len(rows) and counts and max(counts) <= 2 * min(counts)
    print("mesh-independence check (factor 2):", "ok" if ok else "FAILED")
    return 0 if ok else 1


def _cmd_check_oracle(args) -> int:
    cfg = _build_config(args)
    try:
        problem = get_problem(cfg.problem, cfg.n, cfg.beta)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"problem: {exc}") from None
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for order in range(1, problem.max_order + 1):
        errs = []
        for trial in range(3):
            # keep coordinates away from zero; some oracles have kinks there
            x = problem.default_x0() + 0.05 * rng.standard_normal(problem.dim)
            errs.append(fd_check_oracle(problem, x, order, seed=cfg.seed + trial))
        err = max(errs)
        worst = max(worst, err)
        print(f"order {order}: max relative finite-difference error {err:.3e}")
    ok = worst <= 1e-5
    print("oracle check:", "ok" if ok else "FAILED")
    return 0 if ok else 1


def _cmd_list_problems(_args) -> int:
    for pid in problem_ids():
        problem = get_problem(pid)
        note = "size = mesh intervals" if pid == "pendulum" else f"default n = {problem.dim}"
        print(
            f"{pid:<12} dim {problem.dim:<4d} orders 1..{problem.max_order}  "
            f"beta {problem.beta:g}  ({note})"
        )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="arplr",
        description="Adaptive higher-order regularization over R^n with l^r norms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one solve plus trajectory checks")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_eps = sub.add_parser("sweep-eps", help="accuracy sweep and exponent fit")
    _add_common(p_eps)
    p_eps.add_argument("--eps-start", dest="eps_start", type=float)
    p_eps.add_argument("--eps-stop", dest="eps_stop", type=float)
    p_eps.add_argument("--eps-points", dest="eps_points", type=int)
    p_eps.set_defaults(func=_cmd_sweep_eps)

    p_mesh = sub.add_parser("sweep-mesh", help="mesh-independence table")
    _add_common(p_mesh)
    p_mesh.add_argument("--mesh", help="comma-separated mesh sizes, e.g. 32,128,512")
    p_mesh.set_defaults(func=_cmd_sweep_mesh)

    p_check = sub.add_parser("check-oracle", help="finite-difference derivative check")
    _add_common(p_check)
    p_check.set_defaults(func=_cmd_check_oracle)

    p_list = sub.add_parser("list-problems", help="available problem ids")
    p_list.set_defaults(func=_cmd_list_problems)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
