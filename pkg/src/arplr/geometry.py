"""l^r norm geometry on R^n.

Provides the primal norm, its dual norm, the duality map (gradient of
``|.|^p / p``), the steepest-descent dual direction, and a Monte-Carlo
estimate of the modulus of smoothness.  R^n with the l^r norm is a
uniformly min(r, 2)-smooth space for 1 < r < infinity, which is why the
endpoints r = 1 and r = infinity are rejected at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["GeometryError", "NormedSpace", "smoothness_modulus_estimate"]


class GeometryError(ValueError):
    """Misuse of a normed-space operation (bad exponent, shape, or input)."""


def _as_vector(n: int, v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise GeometryError(f"expected a vector of dimension {n}, got shape {arr.shape}")
    # a single reduction: any NaN or infinity poisons the sum
    if not math.isfinite(float(np.abs(arr).sum())):
        raise GeometryError("vector entries must be finite")
    return arr


def _scaled_power_norm(abs_vals: np.ndarray, exponent: float) -> float:
    # factor out the largest entry so tiny/huge vectors neither underflow
    # nor overflow; preserves "zero iff the vector is zero"
    peak = float(abs_vals.max())
    if peak == 0.0:
        return 0.0
    return peak * float(np.sum((abs_vals / peak) ** exponent)) ** (1.0 / exponent)


@dataclass(frozen=True)
class NormedSpace:
    """R^n equipped with the l^r norm, 1 < r < infinity.

    The dual space carries the conjugate norm with exponent r/(r-1), and
    the smoothness order is q = min(r, 2).
    """

    n: int
    r: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GeometryError(f"dimension must be a positive integer, got {self.n!r}")
        if not (1.0 < float(self.r) < math.inf):
            raise GeometryError(
                f"norm exponent must lie strictly between 1 and infinity, got {self.r!r}"
            )

    @property
    def r_dual(self) -> float:
        """Conjugate exponent, 1/r + 1/r_dual = 1."""
        return self.r / (self.r - 1.0)

    @property
    def q(self) -> float:
        """Uniform smoothness order of the space, min(r, 2)."""
        return min(self.r, 2.0)

    # -- norms -------------------------------------------------------------

    def norm(self, v) -> float:
        v = _as_vector(self.n, v)
        return _scaled_power_norm(np.abs(v), self.r)

    def dual_norm(self, g) -> float:
        g = _as_vector(self.n, g)
        return _scaled_power_norm(np.abs(g), self.r_dual)

    # -- duality -----------------------------------------------------------

    def duality_map(self, x, p: float) -> np.ndarray:
        """Gradient of ``|.|^p / p`` at x, for p > 1.

        Characterized by ``<J(x), x> = |x|^p`` and ``|J(x)|_* = |x|^(p-1)``;
        maps 0 to 0.  Computed in the scaled form
        ``sign(x_i) (|x_i|/|x|)^(r-1) |x|^(p-1)`` to avoid overflow when
        p < r and |x| is tiny.
        """
        if not p > 1.0:
            raise GeometryError(f"duality map requires exponent p > 1, got {p!r}")
        x = _as_vector(self.n, x)
        ax = np.abs(x)
        nx = float(np.sum(ax ** self.r)) ** (1.0 / self.r)
        if nx == 0.0:
            return np.zeros(self.n)
        u = ax / nx
        return np.sign(x) * u ** (self.r - 1.0) * nx ** (p - 1.0)

    def dual_direction(self, g) -> np.ndarray:
        """Unit-norm d attaining the dual pairing, ``<g, d> = |g|_*``.

        For the l^r norm: ``d_i = sign(g_i) (|g_i| / |g|_*)^(r_dual - 1)``.
        Raises if g = 0, which signals first-order stationarity; callers
        must test the dual norm before asking for a direction.
        """
        g = _as_vector(self.n, g)
        ag = np.abs(g)
        gn = float(np.sum(ag ** self.r_dual)) ** (1.0 / self.r_dual)
        if gn == 0.0:
            raise GeometryError("dual direction undefined at g = 0 (stationary point)")
        u = ag / gn
        return np.sign(g) * u ** (self.r_dual - 1.0)

    def _row_norms(self, m: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(m) ** self.r, axis=1) ** (1.0 / self.r)


def smoothness_modulus_estimate(
    space: NormedSpace, t: float, samples: int, seed=0
) -> float:
    """Monte-Carlo lower estimate of the modulus of smoothness at t.

    The modulus is the supremum of ``(|x+y| + |x-y|)/2 - 1`` over |x| = 1
    and |y| = t; sampling pairs gives a lower bound on it, so the estimate
    can be compared against upper envelopes such as t^2/2 in the r = 2
    case.
    """
    if t < 0:
        raise GeometryError("modulus argument t must be nonnegative")
    if t == 0.0:
        return 0.0
    if samples < 1:
        raise GeometryError("need at least one sample")
    rng = np.random.default_rng(seed)
    best = 0.0
    remaining = int(samples)
    while remaining > 0:
        m = min(remaining, 200_000)
        x = rng.standard_normal((m, space.n))
        y = rng.standard_normal((m, space.n))
        x /= space._row_norms(x)[:, None]
        y *= (t / space._row_norms(y))[:, None]
        vals = (space._row_norms(x + y) + space._row_norms(x - y)) / 2.0 - 1.0
        best = max(best, float(vals.max()))
        remaining -= m
    return best
