"""Catalog of KPP nonlinearities f(x, s) and their zero-order linearizations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from .domain import Grid

Array = NDArray[np.float64]


class ReactionError(ValueError):
    """Invalid reaction parameters."""


@dataclass(frozen=True)
class GrowthProfile:
    """Zero-order growth rate r(x1, y), optionally time-periodic.

    `rate` is vectorized over coordinate meshes.  When the profile is
    time-periodic, `rate_t(t, X, Y)` must reduce t mod `period` exactly.
    Declared asymptotic data (`mu`, `alpha_limit`, `beta_limit`, callables of
    y) is carried when known analytically; `sup_rate` bounds |r| on the strip.
    """

    rate: Callable[[Array, Array], Array]
    sup_rate: float
    period: Optional[float] = None
    rate_t: Optional[Callable[[float, Array, Array], Array]] = None
    mu: Optional[Callable[[Array], Array]] = None
    alpha_limit: Optional[Callable[[Array], Array]] = None
    beta_limit: Optional[Callable[[Array], Array]] = None
    homogeneous_x: bool = False

    @property
    def time_periodic(self) -> bool:
        return self.period is not None

    def rate_on(self, grid: Grid, t: float | None = None) -> Array:
        X1, Y = grid.meshes()
        if t is None or not self.time_periodic:
            return np.asarray(self.rate(X1, Y), dtype=float)
        assert self.rate_t is not None
        return np.asarray(self.rate_t(t, X1, Y), dtype=float)


@dataclass(frozen=True)
class Reaction:
    """KPP nonlinearity with saturation bound S and declared linearization.

    `f(X, Y, S)` is vectorized; `slope` is the analytic f_s(x, y, s) when
    available (used by the Newton Jacobian).  Time-periodic reactions provide
    `f_t(t, X, Y, S)` and carry the period on their growth profile.
    """

    f: Callable[[Array, Array, Array], Array]
    S: float
    growth: GrowthProfile
    slope: Optional[Callable[[Array, Array, Array], Array]] = None
    f_t: Optional[Callable[[float, Array, Array, Array], Array]] = None
    slope_t: Optional[Callable[[float, Array, Array, Array], Array]] = None
    slope_bound: float = 0.0
    name: str = ""

    @property
    def time_periodic(self) -> bool:
        return self.growth.time_periodic

    def apply(self, grid: Grid, u: Array, t: float | None = None) -> Array:
        X1, Y = grid.meshes()
        if t is None or not self.time_periodic:
            return np.asarray(self.f(X1, Y, u), dtype=float)
        assert self.f_t is not None
        return np.asarray(self.f_t(t, X1, Y, u), dtype=float)

    def apply_slope(self, grid: Grid, u: Array, t: float | None = None) -> Array:
        """f_s(x, y, u), analytic when declared, else central differences."""
        X1, Y = grid.meshes()
        if t is None or not self.time_periodic:
            if self.slope is not None:
                return np.asarray(self.slope(X1, Y, u), dtype=float)
            h = 1e-6 * (1.0 + np.abs(u))
            return (self.apply(grid, u + h) - self.apply(grid, u - h)) / (2.0 * h)
        if self.slope_t is not None:
            return np.asarray(self.slope_t(t, X1, Y, u), dtype=float)
        h = 1e-6 * (1.0 + np.abs(u))
        return (self.apply(grid, u + h, t) - self.apply(grid, u - h, t)) / (2.0 * h)


_EDGE = 1e-12  # closed-on-the-favorable-side sampling survives float wobble


def rho_step(x: Array, L: float, theta: float) -> Array:
    """Plateau profile: 2 on [-L, L] (closed), theta outside."""
    return np.where(np.abs(x) <= L + _EDGE, 2.0, float(theta))


def mu_step(y: Array, alpha: float) -> Array:
    """Cross-sectional profile: +1 on [0, alpha] (closed), -1 above."""
    return np.where(y <= alpha + _EDGE, 1.0, -1.0)


def band(v: Array, lo: float, hi: float, inside: float, outside: float) -> Array:
    """Closed band indicator with the same edge tolerance as the catalog steps."""
    return np.where((v >= lo - _EDGE) & (v <= hi + _EDGE), float(inside), float(outside))


def make_illustration(alpha: float, L: float, theta: float) -> Reaction:
    """Mixed-environment family f(x1,y,s) = (rho_L(x1) + mu_alpha(y)) s - s^2.

    rho_L is 2 on [-L, L] and theta outside; mu_alpha is +1 on [0, alpha] and
    -1 above.  Discontinuities are sampled closed on the favorable side.
    """
    if not (0.0 < alpha < 1.0):
        raise ReactionError(f"alpha must lie in (0, 1), got {alpha}")
    if L < 0:
        raise ReactionError(f"L must be >= 0, got {L}")
    alpha = float(alpha)
    L = float(L)
    theta = float(theta)

    def rate(X1, Y):
        return rho_step(X1, L, theta) + mu_step(Y, alpha)

    def limit(y):
        return theta + mu_step(np.asarray(y, dtype=float), alpha)

    sup_rate = max(abs(2.0) + 1.0, abs(theta) + 1.0)
    growth = GrowthProfile(
        rate=rate,
        sup_rate=sup_rate,
        mu=limit,
        alpha_limit=limit,
        beta_limit=limit,
    )
    S = 3.0

    def f(X1, Y, U):
        return rate(X1, Y) * U - U * U

    def slope(X1, Y, U):
        return rate(X1, Y) - 2.0 * U

    return Reaction(
        f=f,
        S=S,
        growth=growth,
        slope=slope,
        slope_bound=sup_rate + 2.0 * S,
        name=f"illustration(alpha={alpha}, L={L}, theta={theta})",
    )


def make_compact_favorable(m: float, mprime: float, L: float, K: float) -> Reaction:
    """Logistic patch on 0 <= x1 <= L, linear death -s*m outside, constant in y."""
    if min(m, mprime, L, K) <= 0:
        raise ReactionError(f"parameters must be positive, got m={m}, m'={mprime}, L={L}, K={K}")
    m, mprime, L, K = float(m), float(mprime), float(L), float(K)

    def inside(X1):
        return (X1 >= -_EDGE) & (X1 <= L + _EDGE)

    def rate(X1, Y):
        return np.where(inside(X1), mprime, -m)

    def limit(y):
        return np.full_like(np.asarray(y, dtype=float), -m)

    growth = GrowthProfile(
        rate=rate,
        sup_rate=max(m, mprime),
        mu=limit,
        alpha_limit=limit,
        beta_limit=limit,
    )

    def f(X1, Y, U):
        return np.where(inside(X1), mprime * U * (1.0 - U / K), -m * U)

    def slope(X1, Y, U):
        return np.where(inside(X1), mprime * (1.0 - 2.0 * U / K), -m)

    return Reaction(
        f=f,
        S=K,
        growth=growth,
        slope=slope,
        slope_bound=max(m, mprime),  # |f_s| on 0 <= s <= K
        name=f"compact_favorable(m={m}, m'={mprime}, L={L}, K={K})",
    )


def penalty_rate(n: int) -> float:
    """Exterior penalization schedule rho_n = -2^n."""
    return -float(2**n)


def make_penalized(base: Reaction, n: int, strip_margin: float = 1.0) -> Reaction:
    """Extend a strip reaction to the surrounding rectangle with a kill rate.

    Inside the closed strip 0 <= y <= 1 the base reaction applies unchanged;
    outside, F_n(x, s) = rho_n s - s^2 with rho_n = -2^n.  `strip_margin` is
    the intended exterior width on each side and is carried as metadata for
    grid construction.
    """
    if n < 0:
        raise ReactionError(f"penalization index must be >= 0, got {n}")
    rho_n = penalty_rate(n)
    base_rate = base.growth.rate

    def in_strip(Y):
        return (Y >= -_EDGE) & (Y <= 1.0 + _EDGE)

    def rate(X1, Y):
        return np.where(in_strip(Y), base_rate(X1, Y), rho_n)

    growth = GrowthProfile(
        rate=rate,
        sup_rate=max(base.growth.sup_rate, abs(rho_n)),
        mu=base.growth.mu,
        alpha_limit=base.growth.alpha_limit,
        beta_limit=base.growth.beta_limit,
    )

    def f(X1, Y, U):
        return np.where(in_strip(Y), base.f(X1, Y, U), rho_n * U - U * U)

    def slope(X1, Y, U):
        inner = base.slope(X1, Y, U) if base.slope is not None else None
        outer = rho_n - 2.0 * U
        if inner is None:
            # fall back to numeric slope for the strip part only
            h = 1e-6 * (1.0 + np.abs(U))
            inner = (base.f(X1, Y, U + h) - base.f(X1, Y, U - h)) / (2.0 * h)
        return np.where(in_strip(Y), inner, outer)

    return Reaction(
        f=f,
        S=base.S,
        growth=growth,
        slope=slope,
        slope_bound=max(base.slope_bound, abs(rho_n) + 2.0 * base.S),
        name=f"penalized(n={n}, rho_n={rho_n}, base={base.name})",
    )


def make_time_periodic(r0: GrowthProfile, amplitude: float, T: float) -> Reaction:
    """Seasonal forcing r(t,x) = r0(x) + amplitude*cos(2 pi t / T), f = r s - s^2."""
    if T <= 0:
        raise ReactionError(f"period must be positive, got {T}")
    amplitude = float(amplitude)
    T = float(T)
    base_rate = r0.rate

    def osc(t: float) -> float:
        # reduce mod T so r(t+T) == r(t) exactly
        return amplitude * math.cos(2.0 * math.pi * (float(t) % T) / T)

    def rate(X1, Y):
        return base_rate(X1, Y) + osc(0.0)

    def rate_t(t, X1, Y):
        return base_rate(X1, Y) + osc(t)

    sup_rate = r0.sup_rate + abs(amplitude)
    growth = GrowthProfile(
        rate=rate,
        sup_rate=sup_rate,
        period=T,
        rate_t=rate_t,
        mu=r0.mu,
        alpha_limit=r0.alpha_limit,
        beta_limit=r0.beta_limit,
        homogeneous_x=r0.homogeneous_x,
    )
    S = max(sup_rate, 1.0)

    def f(X1, Y, U):
        return rate(X1, Y) * U - U * U

    def f_t(t, X1, Y, U):
        return rate_t(t, X1, Y) * U - U * U

    def slope(X1, Y, U):
        return rate(X1, Y) - 2.0 * U

    def slope_t(t, X1, Y, U):
        return rate_t(t, X1, Y) - 2.0 * U

    return Reaction(
        f=f,
        S=S,
        growth=growth,
        slope=slope,
        f_t=f_t,
        slope_t=slope_t,
        slope_bound=sup_rate + 2.0 * S,
        name=f"time_periodic(amplitude={amplitude}, T={T})",
    )


def make_logistic(rate_fn: Callable[[Array, Array], Array], sup_rate: float,
                  mu: Optional[Callable[[Array], Array]] = None,
                  alpha_limit=None, beta_limit=None,
                  homogeneous_x: bool = False, name: str = "logistic") -> Reaction:
    """General f = r(x) s - s^2 from a supplied rate; S = max(sup r, 1)."""
    growth = GrowthProfile(
        rate=rate_fn,
        sup_rate=float(sup_rate),
        mu=mu,
        alpha_limit=alpha_limit,
        beta_limit=beta_limit,
        homogeneous_x=homogeneous_x,
    )
    S = max(float(sup_rate), 1.0)

    def f(X1, Y, U):
        return rate_fn(X1, Y) * U - U * U

    def slope(X1, Y, U):
        return rate_fn(X1, Y) - 2.0 * U

    return Reaction(f=f, S=S, growth=growth, slope=slope,
                    slope_bound=float(sup_rate) + 2.0 * S, name=name)


def shift_rate(reaction: Reaction, k: float) -> Reaction:
    """Reaction with r replaced by r + k everywhere (exact matrix shift).

    The adjusted saturation bound assumes a logistic-type tail (f = rs - s^2
    beyond the plateau); that covers every catalog reaction this is used on.
    """
    k = float(k)
    base_rate = reaction.growth.rate
    old_mu = reaction.growth.mu

    def rate(X1, Y):
        return base_rate(X1, Y) + k

    def mu(y):
        return old_mu(y) + k if old_mu is not None else None

    growth = GrowthProfile(
        rate=rate,
        sup_rate=reaction.growth.sup_rate + abs(k),
        mu=mu if old_mu is not None else None,
        alpha_limit=(lambda y: reaction.growth.alpha_limit(y) + k) if reaction.growth.alpha_limit else None,
        beta_limit=(lambda y: reaction.growth.beta_limit(y) + k) if reaction.growth.beta_limit else None,
        homogeneous_x=reaction.growth.homogeneous_x,
    )
    base_f = reaction.f
    base_slope = reaction.slope

    def f(X1, Y, U):
        return base_f(X1, Y, U) + k * U

    def slope(X1, Y, U):
        if base_slope is None:
            raise ReactionError("shift_rate requires an analytic slope")
        return base_slope(X1, Y, U) + k

    S = reaction.S if k <= 0 else reaction.S + k  # keep f <= 0 beyond S
    return Reaction(
        f=f,
        S=S,
        growth=growth,
        slope=slope if base_slope is not None else None,
        slope_bound=reaction.slope_bound + abs(k),
        name=f"{reaction.name}+shift({k})",
    )
