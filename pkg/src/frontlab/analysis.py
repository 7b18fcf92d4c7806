"""Post-processing: decay fits, symmetry verdicts, threshold searches, concentration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from .domain import BoundaryKind, EndsKind, Grid, build_grid, field_from_function
from .eigen import drift_eigen
from .evolve import Outcome, Trajectory, classify, run
from .front import (
    DirichletFrontResult,
    FrontSolution,
    NewtonError,
    dirichlet_front,
    newton_front,
    subsolution_seed,
)
from .reaction import Reaction, make_penalized

Array = NDArray[np.float64]


class FitError(RuntimeError):
    """Decay fit could not be carried out on positive data."""


@dataclass(frozen=True)
class DecayFit:
    side: str
    exponent: float  # positive decay rate in |x1|
    intercept: float
    r_squared: float
    window: tuple[float, float]
    clean: bool  # r^2 >= 0.99


def _fit_window(grid: Grid, side: str, window_fraction: tuple[float, float]) -> tuple[float, float]:
    lo, hi = window_fraction
    if not (0.0 < lo < hi <= 1.0):
        raise ValueError(f"window fractions must satisfy 0 < lo < hi <= 1, got {window_fraction}")
    if side == "right":
        return lo * grid.X, hi * grid.X
    return -hi * grid.X, -lo * grid.X


def fit_decay(
    front: FrontSolution,
    side: str,
    window_fraction: tuple[float, float] = (0.5, 0.9),
    row: Optional[int] = None,
) -> DecayFit:
    """Least-squares slope of ln U along the mid-height row inside the tail.

    The exponent is reported as a positive decay rate.  Nonpositive samples
    (clamp floor) shrink the outer edge of the window; running out of window
    raises FitError.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    grid = front.U.grid
    a, b = _fit_window(grid, side, window_fraction)
    j = grid.mid_row if row is None else row
    vals = front.U.values[:, j]
    x = grid.x
    for _ in range(40):
        mask = (x >= a) & (x <= b)
        if int(np.count_nonzero(mask)) < 3:
            raise FitError(f"window [{a:.3g}, {b:.3g}] has fewer than 3 usable nodes")
        seg = vals[mask]
        if np.all(seg > 0.0):
            break
        # clamp floor reached: pull the outer edge inward
        if side == "right":
            b = a + 0.9 * (b - a)
        else:
            a = b - 0.9 * (b - a)
    else:
        raise FitError("no all-positive window found (front touched the clamp floor)")
    xs = x[mask]
    logs = np.log(seg)
    slope, intercept = np.polyfit(xs, logs, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - np.mean(logs)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    exponent = -slope if side == "right" else slope
    return DecayFit(
        side=side,
        exponent=float(exponent),
        intercept=float(intercept),
        r_squared=float(r2),
        window=(float(a), float(b)),
        clean=bool(r2 >= 0.99),
    )


def decay_uniformity(
    front: FrontSolution, side: str, window_fraction: tuple[float, float] = (0.5, 0.9)
) -> float:
    """Relative spread of per-row exponents (lateral-layer check, < 10% is uniform)."""
    grid = front.U.grid
    exps = []
    for j in range(grid.ny):
        try:
            exps.append(fit_decay(front, side, window_fraction, row=j).exponent)
        except FitError:
            continue
    if len(exps) < 2:
        return float("nan")
    mean = float(np.mean(exps))
    if mean == 0:
        return float("inf")
    return float((max(exps) - min(exps)) / abs(mean))


def predicted_exponents(lambda_alpha: float, lambda_beta: float, c: float) -> tuple[float, float]:
    """Tail decay rates (left, right) from the cross-sectional eigenvalues."""
    left = 0.5 * (-c + math.sqrt(c * c + 4.0 * lambda_alpha))
    right = 0.5 * (c + math.sqrt(c * c + 4.0 * lambda_beta))
    return left, right


@dataclass(frozen=True)
class SymmetryReport:
    left_exponent: float
    right_exponent: float
    left_predicted: float
    right_predicted: float
    criterion_lhs: float
    criterion_rhs: float
    verdict: str  # "Asymmetric" | "PossiblySymmetric"
    asymmetry_sup: float  # sup |U(x,.) - U(-x,.)| after sup-normalization
    left_fit: DecayFit
    right_fit: DecayFit


def symmetry_report(
    front: FrontSolution,
    lambda_alpha: float,
    lambda_beta: float,
    c: float,
    criterion_tol: float = 1e-6,
    window_fraction: tuple[float, float] = (0.5, 0.9),
) -> SymmetryReport:
    """Tail-exponent comparison against the asymmetry criterion.

    The analytic criterion lambda_beta != lambda_alpha + c^2 - 2c
    sqrt(lambda_alpha + c^2/4) decides the verdict; measured exponents and
    the raw mirror-asymmetry norm are reported alongside.
    """
    if lambda_alpha <= 0 or lambda_beta <= 0:
        raise ValueError("symmetry report needs lambda_alpha, lambda_beta > 0")
    if front.U.grid.ends_bc is not EndsKind.DIRICHLET:
        raise ValueError("symmetry report needs Dirichlet-ends grids (mirror nodes must exist)")
    left_fit = fit_decay(front, "left", window_fraction)
    right_fit = fit_decay(front, "right", window_fraction)
    lp, rp = predicted_exponents(lambda_alpha, lambda_beta, c)
    lhs = lambda_beta
    rhs = lambda_alpha + c * c - 2.0 * c * math.sqrt(lambda_alpha + c * c / 4.0)
    verdict = "Asymmetric" if abs(lhs - rhs) > criterion_tol else "PossiblySymmetric"
    u = front.U.values
    sup = float(np.max(np.abs(u)))
    asym = float(np.max(np.abs(u - u[::-1, :]))) / sup if sup > 0 else 0.0
    return SymmetryReport(
        left_exponent=left_fit.exponent,
        right_exponent=right_fit.exponent,
        left_predicted=lp,
        right_predicted=rp,
        criterion_lhs=lhs,
        criterion_rhs=rhs,
        verdict=verdict,
        asymmetry_sup=asym,
        left_fit=left_fit,
        right_fit=right_fit,
    )


def tail_bound_check(
    front: FrontSolution,
    lambda_mu: float,
    lambda_alpha: float,
    lambda_beta: float,
    c: float,
    slack: float = 0.1,
) -> dict:
    """Two-sided envelope check on the outer quarter of the domain.

    Upper envelope uses the global rate alpha* = (-c + sqrt(c^2+4 lambda_mu))/2;
    lower envelopes use the per-side rates sqrt(lambda +- c^2/4) -+ c/2.
    Constants are fitted at the quarter boundary; exponents get `slack`
    relative loosening.  The region is clipped at 0.9 X: past the
    effective-infinity cut the homogeneous-Dirichlet truncation forces the
    solution below any exponential envelope.
    """
    grid = front.U.grid
    mid = grid.mid_row
    vals = front.U.values[:, mid]
    x = grid.x
    alpha_star = 0.5 * (-c + math.sqrt(c * c + 4.0 * lambda_mu))
    lower_left = math.sqrt(lambda_alpha + c * c / 4.0) - c / 2.0
    lower_right = math.sqrt(lambda_beta + c * c / 4.0) + c / 2.0
    out = {}
    for side, rate_low in (("left", lower_left), ("right", lower_right)):
        x_q = 0.75 * grid.X
        x_cut = 0.9 * grid.X
        if side == "right":
            mask = (x >= x_q) & (x <= x_cut)
            anchor_idx = int(np.argmax(x >= x_q))
        else:
            mask = (x <= -x_q) & (x >= -x_cut)
            anchor_idx = int(len(x) - 1 - np.argmax(x[::-1] <= -x_q))
        xs = np.abs(x[mask])
        us = vals[mask]
        anchor_x = abs(x[anchor_idx])
        anchor_u = vals[anchor_idx]
        up_rate = alpha_star * (1.0 - slack)
        low_rate = rate_low * (1.0 + slack)
        c_up = anchor_u * math.exp(up_rate * anchor_x)
        c_low = anchor_u * math.exp(low_rate * anchor_x)
        upper_env = c_up * np.exp(-up_rate * xs)
        lower_env = c_low * np.exp(-low_rate * xs)
        ok = bool(np.all(us <= upper_env * (1.0 + 1e-9)) and np.all(us >= lower_env * (1.0 - 1e-9)))
        out[side] = {
            "ok": ok,
            "upper_rate": up_rate,
            "lower_rate": low_rate,
            "max_upper_violation": float(np.max(us / upper_env)) if len(us) else float("nan"),
            "min_lower_margin": float(np.min(us / lower_env)) if len(us) else float("nan"),
        }
    out["ok"] = bool(out["left"]["ok"] and out["right"]["ok"])
    return out


@dataclass(frozen=True)
class ThresholdProblem:
    """Context for a persistence threshold search in one scalar parameter.

    reaction_for maps the parameter value to (reaction, drift speed).  The
    eigen grid serves the eigen_sign objective; the dynamic objective runs on
    dyn_grid (eigen grid when absent) from a Gaussian bump of the given
    height and width, doubling the horizon on Undecided outcomes up to
    max_horizon, then falling back to the trend of the sup-norm.
    """

    reaction_for: Callable[[float], tuple[Reaction, float]]
    eigen_grid: Grid
    dyn_grid: Optional[Grid] = None
    u0_height: float = 1.0
    u0_width: float = 2.0
    horizon: float = 150.0
    max_horizon: float = 600.0
    sample_every: float = 1.0
    dt: Optional[float] = None
    extinction_threshold: float = 1e-6
    persistence_floor: float = 1e-2
    increasing_lambda: bool = False  # True when lambda grows with the parameter (e.g. c)


@dataclass(frozen=True)
class ThresholdResult:
    value: float
    objective: str
    evaluations: int
    bracket: tuple[float, float]


def _dynamic_sign(problem: ThresholdProblem, x: float) -> float:
    reaction, c = problem.reaction_for(x)
    grid = problem.dyn_grid or problem.eigen_grid
    u0 = field_from_function(
        grid, lambda X1, Y: problem.u0_height * np.exp(-((X1 / problem.u0_width) ** 2))
    )
    horizon = problem.horizon
    while True:
        traj = run(
            reaction,
            c,
            u0,
            horizon=horizon,
            sample_every=problem.sample_every,
            dt=problem.dt,
            stop_below=0.5 * problem.extinction_threshold,
            settle_rtol=1e-4,
        )
        outcome = classify(traj, problem.extinction_threshold, problem.persistence_floor)
        if outcome is Outcome.EXTINCTION:
            return 1.0
        if outcome is Outcome.PERSISTENCE:
            return -1.0
        if horizon >= problem.max_horizon:
            # trend tie-break: deep decay counts as extinction
            decayed = traj.sup_norm[-1] < 1e-3 * max(traj.sup_norm[0], 1e-300)
            return 1.0 if decayed else -1.0
        horizon = min(2.0 * horizon, problem.max_horizon)


def threshold_search(
    problem: ThresholdProblem,
    bounds: tuple[float, float],
    objective: str,
    tol: float,
) -> ThresholdResult:
    """Bisection for the parameter value where persistence switches.

    eigen_sign bisects on the drift eigenvalue; dynamic_outcome bisects on
    the Persistence/Extinction classifier.  The objective must satisfy
    value(lo) > 0 > value(hi) after orientation (extinction side first).
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise ValueError("bounds must be increasing")
    sign = -1.0 if problem.increasing_lambda else 1.0
    evals = 0

    if objective == "eigen_sign":

        def value(x: float) -> float:
            reaction, c = problem.reaction_for(x)
            return sign * drift_eigen(problem.eigen_grid, reaction.growth, c).lambda_

    elif objective == "dynamic_outcome":

        def value(x: float) -> float:
            return sign * _dynamic_sign(problem, x)

    else:
        raise ValueError(f"unknown objective {objective!r}")

    f_lo = value(lo)
    f_hi = value(hi)
    evals += 2
    if not (f_lo > 0.0 > f_hi):
        raise ValueError(
            f"objective does not bracket a threshold: value({lo})={f_lo:.6g}, "
            f"value({hi})={f_hi:.6g} (need value(lo) > 0 > value(hi))"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = value(mid)
        evals += 1
        if fm > 0.0:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(
        value=0.5 * (lo + hi), objective=objective, evaluations=evals, bracket=(lo, hi)
    )


@dataclass(frozen=True)
class ConcentrationRecord:
    n: int
    rho_n: float
    lambda_n: float
    sup_exterior: float
    dist_to_dirichlet_front: float
    min_decrement: float  # min over nodes of U_{n-1} - U_n (NaN at n = 0)


@dataclass(frozen=True)
class ConcentrationResult:
    records: list[ConcentrationRecord]
    lambda_d: float
    dirichlet: DirichletFrontResult
    final_distance: float
    lambda_monotone: bool
    exterior_monotone: bool
    fronts_monotone: bool


def _strip_grid_of(rect: Grid, margin: float) -> tuple[Grid, int]:
    """Aligned Dirichlet strip grid inside a rectangle grid; returns (grid, m).

    The rectangle must be Dirichlet-lateral on [-margin, 1+margin] with ny+1
    divisible so that nodes land exactly on y = 0 and y = 1.
    """
    if rect.lateral_bc is not BoundaryKind.DIRICHLET:
        raise ValueError("concentration rectangle must have Dirichlet lateral boundaries")
    H = 1.0 + 2.0 * margin
    if abs(rect.H - H) > 1e-12 or abs(rect.y0 + margin) > 1e-12:
        raise ValueError(f"rectangle must span [-{margin}, {1 + margin}] in y")
    total = rect.ny + 1
    per_unit = total / H
    m = int(round(per_unit))
    if abs(per_unit - m) > 1e-9 or m < 4:
        raise ValueError("rectangle ny+1 must be divisible by the y-extent with >= 4 nodes per unit")
    strip = build_grid(rect.X, 1.0, rect.nx, m - 1, BoundaryKind.DIRICHLET)
    return strip, m


def concentration_sweep(
    base: Reaction,
    c: float,
    n_max: int,
    rect_grid: Grid,
    tol: float = 1e-10,
    margin: float = 1.0,
) -> ConcentrationResult:
    """Penalization ladder rho_n = -2^n on the rectangle around the unit strip.

    Each n is solved independently (deterministic under any worker count):
    drift eigenvalue of the penalized profile, whole-rectangle front seeded
    from its certified subsolution, exterior sup, and sup-distance of the
    strip restriction to the Dirichlet front of the strip.
    """
    strip_grid, m = _strip_grid_of(rect_grid, margin)
    dres = dirichlet_front(base, c, strip_grid, tol=tol)
    if dres.c_star is None or c >= dres.c_star:
        raise ValueError(
            f"concentration sweep needs c < c*_Dirichlet ({dres.c_star}), got c={c}"
        )
    lam_d_drift = drift_eigen(strip_grid, base.growth, c).lambda_
    ud = dres.front.U.values

    exterior_cols = np.ones(rect_grid.ny, dtype=bool)
    exterior_cols[m - 1 : 2 * m] = False  # closed strip columns y in [0, 1]
    strip_cols = slice(m, 2 * m - 1)  # interior strip columns, align with strip grid

    records: list[ConcentrationRecord] = []
    prev_front: Optional[Array] = None
    final_distance = float("nan")
    for n in range(n_max + 1):
        rx_n = make_penalized(base, n, strip_margin=margin)
        eig_n = drift_eigen(rect_grid, rx_n.growth, c)
        seed = subsolution_seed(eig_n, rx_n)
        try:
            fr = newton_front(rx_n, c, rect_grid, seed, tol=tol)
        except NewtonError as exc:
            # larger n stiffens the problem; report which rung failed
            raise NewtonError(str(exc), exc.residual, index=n) from exc
        u = fr.U.values
        sup_ext = float(np.max(np.abs(u[:, exterior_cols])))
        dist = float(np.max(np.abs(u[:, strip_cols] - ud)))
        dec = float("nan") if prev_front is None else float(np.min(prev_front - u))
        records.append(
            ConcentrationRecord(
                n=n,
                rho_n=-float(2**n),
                lambda_n=eig_n.lambda_,
                sup_exterior=sup_ext,
                dist_to_dirichlet_front=dist,
                min_decrement=dec,
            )
        )
        prev_front = u
        final_distance = dist
    lams = [r.lambda_n for r in records]
    sups = [r.sup_exterior for r in records]
    return ConcentrationResult(
        records=records,
        lambda_d=lam_d_drift,
        dirichlet=dres,
        final_distance=final_distance,
        lambda_monotone=all(b >= a - 1e-10 for a, b in zip(lams, lams[1:])),
        exterior_monotone=all(b <= a + 1e-10 for a, b in zip(sups, sups[1:])),
        fronts_monotone=all(
            (math.isnan(r.min_decrement) or r.min_decrement >= -1e-10) for r in records
        ),
    )


@dataclass(frozen=True)
class MassSummary:
    final_dist_l1: float
    slope: float  # log-linear decay rate of the L1 gap (NaN when not estimable)
    r_squared: float


def mass_series(trajectory: Trajectory, tail_fraction: float = 0.5) -> MassSummary:
    """Final L1 distance and the log-linear decay slope of dist_l1(t)."""
    t = np.asarray(trajectory.t)
    d = np.asarray(trajectory.dist_l1)
    final = float(d[-1])
    cut = t[-1] * (1.0 - tail_fraction)
    mask = (t >= cut) & (d > 0.0)
    if int(np.count_nonzero(mask)) < 3:
        return MassSummary(final, float("nan"), float("nan"))
    logs = np.log(d[mask])
    slope, _ = np.polyfit(t[mask], logs, 1)
    pred = np.polyval(np.polyfit(t[mask], logs, 1), t[mask])
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - np.mean(logs)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return MassSummary(final, float(-slope), float(r2))
