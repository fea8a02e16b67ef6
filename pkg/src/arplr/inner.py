"""Steepest descent in the dual pairing with exact one-dimensional minimization.

Minimizes a regularized model starting from s = 0: at each iteration the
dual-attaining unit direction of the current model gradient is computed and
the model is globally minimized along that ray.  The iteration stops once
the dual gradient norm falls below ``max(grad_tol, theta |s|^(p+beta-1))``
(the step-power branch is only armed once s is nonzero, since at s = 0 it
could never fire before the absolute branch).

One-dimensional minimization: the polynomial restriction of the Taylor part
is combined with the norm regularizer, which is convex in the ray parameter.
When the polynomial part is convex too (nonnegative coefficients beyond the
linear one — always the case for order-1 models and for order-2 models with
nonnegative curvature along the ray) the minimizer is the unique root of the
derivative and is found by bracketed regula falsi.  Otherwise a bracket is
grown until the ray value exceeds its value at 0, the derivative is scanned
on a mixed linear/geometric grid, and every sign change is refined.  Either
way the model value decreases strictly at every iteration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .tensors import RayPolynomial, RegularizedModel

__all__ = ["InnerConfig", "InnerResult", "Termination", "minimize_model", "default_max_iters"]


class Termination(enum.Enum):
    GRADIENT_BELOW_TOL = "gradient_below_tol"
    STEP_POWER_RULE = "step_power_rule"
    ZERO_GRADIENT = "zero_gradient"
    MAX_ITERS = "max_iters"


def default_max_iters(n: int, p: int, grad_tol: float) -> int:
    """Pragmatic iteration guard: 10 n (p+1) ceil(log10(1/grad_tol))."""
    digits = max(1, math.ceil(math.log10(1.0 / grad_tol)))
    return 10 * n * (p + 1) * digits


def descent_exponents(q: float, p: int, beta: float) -> tuple:
    """Extreme exponents (gamma_1, gamma_m) of the per-step decrease profile
    when minimizing an order-p model with a (p+beta)-power regularizer in a
    q-smooth geometry: gamma_1 = min(q, p+beta) governs the fast branch (the
    smoother the space, the faster), gamma_m = p+beta the slow one."""
    e = p + beta
    return min(q, e), e


@dataclass(frozen=True)
class InnerConfig:
    grad_tol_absolute: float
    step_power: tuple | None = None  # (theta, exponent), exponent = p + beta - 1
    max_iters: int = 10_000
    ray_scan_points: int = 256
    ray_refine_tol: float = 1e-12

    def __post_init__(self):
        if not self.grad_tol_absolute > 0.0:
            raise ValueError("gradient tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.step_power is not None:
            theta, expo = self.step_power
            if not theta > 0.0:
                raise ValueError("step-power coefficient theta must be positive")
            if not expo > 0.0:
                raise ValueError("step-power exponent must be positive")
        if self.ray_scan_points < 8:
            raise ValueError("ray_scan_points is too small to isolate minima")


@dataclass(frozen=True)
class InnerResult:
    s: np.ndarray
    model_value: float
    model_grad_dual_norm: float
    iterations: int
    decreased: bool
    termination: Termination
    value_history: tuple  # model values, starting at m(0)


class _ProgressFloor(Exception):
    """No representable decrease remains along the descent ray (the gradient
    tolerance is below what the model values can resolve)."""


class _RayEval:
    """Cached evaluation of a model along one ray.

    For r = 2 the squared norm along the ray is a quadratic in t, so scalar
    evaluations are O(1) after caching its coefficients.
    """

    __slots__ = ("anchor", "direction", "coeffs", "dcoeffs", "r", "e",
                 "reg_v", "reg_d", "is_r2", "qa", "qb")

    def __init__(self, model: RegularizedModel, ray: RayPolynomial):
        self.anchor = ray.anchor
        self.direction = ray.direction
        self.coeffs = ray.coeffs
        self.dcoeffs = npoly.polyder(ray.coeffs)
        self.r = model.space.r
        self.e = model.reg_exponent
        self.reg_v = model.sigma / math.gamma(self.e + 1.0)
        self.reg_d = model.sigma / math.gamma(self.e)
        self.is_r2 = self.r == 2.0
        if self.is_r2:
            self.qa = float(np.dot(self.anchor, self.anchor))
            self.qb = float(np.dot(self.anchor, self.direction))
        else:
            self.qa = self.qb = 0.0

    def _qnorm(self, t: float) -> float:
        # |anchor - t d|^2 for r = 2 (unit direction)
        return max(self.qa - 2.0 * self.qb * t + t * t, 0.0)

    def value(self, t: float) -> float:
        poly = float(npoly.polyval(t, self.coeffs))
        if self.is_r2:
            return poly + self.reg_v * self._qnorm(t) ** (0.5 * self.e)
        w = self.anchor - t * self.direction
        nw = float(np.sum(np.abs(w) ** self.r)) ** (1.0 / self.r)
        return poly + self.reg_v * nw ** self.e

    def deriv(self, t: float) -> float:
        poly = float(npoly.polyval(t, self.dcoeffs))
        if self.is_r2:
            q = self._qnorm(t)
            if q == 0.0:
                return poly
            return poly + self.reg_d * q ** (0.5 * (self.e - 2.0)) * (t - self.qb)
        w = self.anchor - t * self.direction
        aw = np.abs(w)
        nw = float(np.sum(aw ** self.r)) ** (1.0 / self.r)
        if nw == 0.0:
            return poly
        num = -float(np.dot(np.sign(w) * aw ** (self.r - 1.0), self.direction))
        return poly + self.reg_d * nw ** (self.e - self.r) * num

    def batch(self, ts: np.ndarray):
        pvals = npoly.polyval(ts, self.coeffs)
        pders = npoly.polyval(ts, self.dcoeffs)
        if self.is_r2:
            q = np.maximum(self.qa - 2.0 * self.qb * ts + ts * ts, 0.0)
            vals = pvals + self.reg_v * q ** (0.5 * self.e)
            pos = q > 0.0
            ders = pders + np.where(
                pos, self.reg_d * np.where(pos, q, 1.0) ** (0.5 * (self.e - 2.0)) * (ts - self.qb), 0.0
            )
            return vals, ders
        pts = self.anchor[None, :] - ts[:, None] * self.direction[None, :]
        apts = np.abs(pts)
        norms = np.sum(apts ** self.r, axis=1) ** (1.0 / self.r)
        vals = pvals + self.reg_v * norms ** self.e
        num = -np.sum(np.sign(pts) * apts ** (self.r - 1.0) * self.direction[None, :], axis=1)
        pos = norms > 0.0
        ders = pders + np.where(
            pos, self.reg_d * np.where(pos, norms, 1.0) ** (self.e - self.r) * num, 0.0
        )
        return vals, ders


def _restrict_with_cache(
    model: RegularizedModel,
    s0: np.ndarray,
    d: np.ndarray,
    taylor_grad: np.ndarray,
    value_at_s0: float,
) -> RayPolynomial:
    """Ray restriction reusing the Taylor gradient and model value at the
    anchor: the constant coefficient is the Taylor value there and the linear
    one is minus the pairing of the Taylor gradient with the direction."""
    coeffs = np.zeros(model.p + 1)
    coeffs[0] = value_at_s0 - _anchor_regularizer(model, s0)
    coeffs[1] = -float(np.dot(taylor_grad, d))
    for t in model.taylor.tensors:
        l = t.order
        if l < 2:
            continue
        arr = np.dot(np.dot(t.entries, d), d)
        for j in range(2, l + 1):
            partial = arr
            for _ in range(l - j):
                partial = np.dot(partial, s0)
            coeffs[j] += math.comb(l, j) * (-1.0) ** j * float(partial) / math.factorial(l)
            if j < l:
                arr = np.dot(arr, d)
    return RayPolynomial(coeffs, s0, d)


def _refine_root(fun, a, b, fa, fb, ftol, max_iter=80):
    """Regula falsi (Illinois) on a sign-change bracket of a continuous fun."""
    t, ft = a, fa
    side = 0
    for _ in range(max_iter):
        t = (fa * b - fb * a) / (fa - fb)
        if not a < t < b:
            t = 0.5 * (a + b)
        ft = fun(t)
        if abs(ft) <= ftol or (b - a) <= 1e-15 * max(1.0, abs(b)):
            return t
        if (ft > 0.0) == (fb > 0.0):
            b, fb = t, ft
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = t, ft
            if side == 1:
                fb *= 0.5
            side = 1
    return t


def _unit_grid(points: int) -> np.ndarray:
    """Scan abscissae on [0, 1]: a linear grid plus a geometric refinement
    toward 0 for stationary points far below the bracket scale."""
    half = max(points // 2, 8)
    return np.sort(
        np.concatenate([np.linspace(0.0, 1.0, points), np.geomspace(1e-12, 1.0, half)])
    )


def _anchor_regularizer(model: RegularizedModel, s0: np.ndarray) -> float:
    e = model.reg_exponent
    return model.sigma / math.gamma(e + 1.0) * model.space.norm(s0) ** e


def _quadratic_ray(model, s0, d, taylor_grad, value_at_s0, hessian_d) -> RayPolynomial:
    # order-2 shortcut for _restrict_with_cache given H d
    coeffs = np.array(
        [
            value_at_s0 - _anchor_regularizer(model, s0),
            -float(np.dot(taylor_grad, d)),
            0.5 * float(np.dot(d, hessian_d)),
        ]
    )
    return RayPolynomial(coeffs, s0, d)


def _line_minimize(
    model: RegularizedModel,
    ray: RayPolynomial,
    cfg: InnerConfig,
    unit_grid: np.ndarray,
    value: float,
):
    """Global minimizer of ``tau -> m(s - tau d)`` over tau >= 0.

    Returns ``(tau, m(s - tau d))`` with a strictly smaller value; the slope
    at tau = 0 equals minus the dual gradient norm, so a decrease exists.
    """
    ev = _RayEval(model, ray)
    v0 = value
    slope0 = ev.deriv(0.0)
    ftol = cfg.ray_refine_tol * max(1.0, -slope0)

    # scale at which the regularizer alone overtakes the initial slope
    scale = ((-slope0) * math.gamma(ev.e + 1.0) / model.sigma) ** (1.0 / (ev.e - 1.0))
    scale = min(max(scale, 1e-12), 1e12)

    candidates = []
    if np.all(ray.coeffs[2:] >= 0.0):
        # polynomial part convex, so the whole ray function is: the global
        # minimizer is the unique positive root of the derivative
        t_hi = scale
        d_hi = ev.deriv(t_hi)
        for _ in range(200):
            if d_hi > 0.0 or not math.isfinite(d_hi) or t_hi >= 1e30:
                break
            t_hi *= 2.0
            d_hi = ev.deriv(t_hi)
        if math.isfinite(d_hi) and d_hi > 0.0:
            candidates.append(_refine_root(ev.deriv, 0.0, t_hi, slope0, d_hi, ftol))
    else:
        t_hi = scale
        for _ in range(200):
            val = ev.value(t_hi)
            if math.isfinite(val) and val <= v0 and t_hi < 1e30:
                t_hi *= 2.0
            else:
                break
        grid = t_hi * unit_grid
        vals, dvals = ev.batch(grid)
        finite = np.isfinite(vals)
        if finite.any():
            candidates.append(float(grid[int(np.argmin(np.where(finite, vals, np.inf)))]))
        signs = np.sign(dvals)
        flips = np.nonzero(signs[:-1] * signs[1:] < 0.0)[0]
        for i in flips:
            candidates.append(
                _refine_root(ev.deriv, grid[i], grid[i + 1], dvals[i], dvals[i + 1], ftol)
            )
        candidates.extend(float(t) for t in grid[dvals == 0.0])

    best_t, best_v = 0.0, v0
    for t in candidates:
        v = ev.value(t)
        if math.isfinite(v) and v < best_v:
            best_t, best_v = float(t), v
    if best_t > 0.0:
        return best_t, best_v
    # fall back on backtracking along the guaranteed-descent slope
    t = scale
    for _ in range(200):
        v = ev.value(t)
        if math.isfinite(v) and v < v0:
            return t, v
        t *= 0.5
    raise _ProgressFloor


def minimize_model(model: RegularizedModel, cfg: InnerConfig) -> InnerResult:
    """Run the dual-direction descent on a coercive regularized model."""
    if not model.sigma > 0.0:
        raise ValueError("model must have a positive regularization weight")
    space = model.space
    s = np.zeros(space.n)
    value = model.value(s)
    history = [value]
    unit_grid = _unit_grid(cfg.ray_scan_points)
    iters = 0
    # for order-2 models the step is rank-one along d, so the Hessian
    # product with s can be maintained incrementally (one product per
    # iteration) with periodic exact refreshes against rounding drift
    quadratic = model.p == 2
    if quadratic:
        grad0 = model.taylor.tensors[0].entries
        hessian = model.taylor.tensors[1].entries
        hessian_s = np.zeros(space.n)
        since_refresh = 0
    while True:
        if quadratic:
            taylor_grad = grad0 + hessian_s
        else:
            taylor_grad = model.taylor.gradient(s)
        grad = model.gradient_from_taylor(s, taylor_grad)
        grad_norm = space.dual_norm(grad)
        if grad_norm == 0.0:
            term = Termination.ZERO_GRADIENT
            break
        if grad_norm <= cfg.grad_tol_absolute:
            term = Termination.GRADIENT_BELOW_TOL
            break
        if cfg.step_power is not None:
            theta, expo = cfg.step_power
            step_norm = space.norm(s)
            if step_norm > 0.0 and grad_norm <= theta * step_norm ** expo:
                term = Termination.STEP_POWER_RULE
                break
        if iters >= cfg.max_iters:
            term = Termination.MAX_ITERS
            break
        d = space.dual_direction(grad)
        if quadratic:
            hessian_d = np.dot(hessian, d)
            ray = _quadratic_ray(model, s, d, taylor_grad, value, hessian_d)
        else:
            ray = _restrict_with_cache(model, s, d, taylor_grad, value)
        try:
            tau, value = _line_minimize(model, ray, cfg, unit_grid, value)
        except _ProgressFloor:
            # stopping rules unmet but no representable decrease remains;
            # report budget exhaustion so the caller escalates
            term = Termination.MAX_ITERS
            break
        s = s - tau * d
        if quadratic:
            hessian_s = hessian_s - tau * hessian_d
            since_refresh += 1
            if since_refresh >= 256:
                hessian_s = np.dot(hessian, s)
                since_refresh = 0
        history.append(value)
        iters += 1
    return InnerResult(
        s=s,
        model_value=value,
        model_grad_dual_norm=grad_norm,
        iterations=iters,
        decreased=value < history[0],
        termination=term,
        value_history=tuple(history),
    )
