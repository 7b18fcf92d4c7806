"""Reference experiment configurations shared by the CLI and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import ThresholdProblem
from .domain import BoundaryKind, Grid, build_grid
from .eigen import drift_eigen
from .reaction import Reaction, band, make_illustration, make_logistic


@dataclass(frozen=True)
class ConcentrationSetup:
    """Self-calibrated strip reaction and the rectangle around it.

    Growth is confined to a mid-strip window by a strongly unfavorable band
    near the strip edges, which keeps the front's lateral edge slope
    exponentially small: the exterior values behave like s0 / sqrt(|rho_n|),
    so criteria on absolute exterior levels need s0 tiny.  The level is
    calibrated by an exact constant shift of r so the discrete Dirichlet
    drift eigenvalue lands on `target` (slightly negative: near-critical
    amplitude).
    """

    base: Reaction
    c: float
    rect_grid: Grid
    strip_grid: Grid
    lambda_target: float
    shift: float


def concentration_setup(
    c: float = 1.0,
    X: float = 8.0,
    nx: int = 319,
    nodes_per_unit_y: int = 20,
    wall: float = 500.0,
    plateau_rate: float = 70.0,
    plateau_half_length: float = 3.0,
    x_exterior_rate: float = -4.0,
    window: tuple[float, float] = (0.325, 0.675),
    target: float = -0.05,
) -> ConcentrationSetup:
    m = nodes_per_unit_y
    strip = build_grid(X, 1.0, nx, m - 1, BoundaryKind.DIRICHLET)
    rect = build_grid(X, 3.0, nx, 3 * m - 1, BoundaryKind.DIRICHLET, y0=-1.0)
    lo, hi = window

    def raw_rate(X1, Y):
        return band(X1, -plateau_half_length, plateau_half_length, plateau_rate, x_exterior_rate) + band(
            Y, lo, hi, 0.0, -wall
        )

    raw = make_logistic(raw_rate, plateau_rate, name="confined-strip-raw")
    lam_raw = drift_eigen(strip, raw.growth, c).lambda_
    shift = lam_raw - target  # lambda(r + k) = lambda(r) - k exactly

    def rate(X1, Y):
        return raw_rate(X1, Y) + shift

    def mu(y):
        return band(np.asarray(y, dtype=float), lo, hi, 0.0, -wall) + x_exterior_rate + shift

    base = make_logistic(
        rate,
        plateau_rate + abs(shift),
        mu=mu,
        alpha_limit=mu,
        beta_limit=mu,
        name=f"confined-strip(target={target})",
    )
    return ConcentrationSetup(
        base=base, c=c, rect_grid=rect, strip_grid=strip, lambda_target=target, shift=shift
    )


@dataclass(frozen=True)
class IllustrationSetup:
    alpha: float
    theta: float
    c: float
    eigen_grid: Grid
    dyn_grid: Grid
    problem: ThresholdProblem


def illustration_setup(
    alpha: float = 0.3,
    theta: float = -2.0,
    c: float = 1.0,
    X: float = 60.0,
    nodes_per_unit: float = 10.0,
    ny: int = 21,
    dyn_X: float = 30.0,
    dyn_dt: float = 0.05,
    horizon: float = 160.0,
    max_horizon: float = 640.0,
) -> IllustrationSetup:
    """Mixed-environment threshold study in the plateau length L."""
    nx = int(round(2 * X * nodes_per_unit)) - 1
    eigen_grid = build_grid(X, 1.0, nx, ny, BoundaryKind.NEUMANN)
    dyn_nx = int(round(2 * dyn_X * nodes_per_unit)) - 1
    dyn_grid = build_grid(dyn_X, 1.0, dyn_nx, ny, BoundaryKind.NEUMANN)

    def reaction_for(L: float):
        return make_illustration(alpha, L, theta), c

    problem = ThresholdProblem(
        reaction_for=reaction_for,
        eigen_grid=eigen_grid,
        dyn_grid=dyn_grid,
        u0_height=1.0,
        u0_width=2.0,
        horizon=horizon,
        max_horizon=max_horizon,
        sample_every=2.0,
        dt=dyn_dt,
    )
    return IllustrationSetup(
        alpha=alpha, theta=theta, c=c, eigen_grid=eigen_grid, dyn_grid=dyn_grid, problem=problem
    )
