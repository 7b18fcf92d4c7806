"""Moving-frame evolution u_t = Delta u + c d1 u + f(x, u): marching and dynamics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from .domain import Field, Grid, norm, tail_ok
from .periodic import InstabilityError, PeriodicSpec, floquet_eigen, transport_matrix
from .reaction import Reaction

Array = NDArray[np.float64]

CLAMP_FLAG_LIMIT = 1e-10


class ExtinctionRegimeError(RuntimeError):
    """Pulsating-front solve refused because the periodic eigenvalue is >= 0."""


@dataclass(frozen=True)
class SimState:
    t: float
    u: Field
    dt: float


class Outcome(enum.Enum):
    PERSISTENCE = "persistence"
    EXTINCTION = "extinction"
    UNDECIDED = "undecided"


@dataclass
class Trajectory:
    """Sampled diagnostics of one run; distances are against `reference`
    (the zero field when no reference front is supplied)."""

    t: list[float] = field(default_factory=list)
    sup_norm: list[float] = field(default_factory=list)
    l1_norm: list[float] = field(default_factory=list)
    dist_sup: list[float] = field(default_factory=list)
    dist_l1: list[float] = field(default_factory=list)
    tail_sup: list[float] = field(default_factory=list)
    max_clamp: float = 0.0
    sup_eventually_monotone: bool = True
    final_state: Optional[SimState] = None

    def append(self, t, sup, l1, dsup, dl1, tail):
        self.t.append(t)
        self.sup_norm.append(sup)
        self.l1_norm.append(l1)
        self.dist_sup.append(dsup)
        self.dist_l1.append(dl1)
        self.tail_sup.append(tail)

    def rows(self):
        return zip(self.t, self.sup_norm, self.l1_norm, self.dist_sup, self.dist_l1, self.tail_sup)


def slope_sup(reaction: Reaction, grid: Grid, s_max: float, t: float | None = None) -> float:
    """Numeric bound on |f_s| over the grid for s in [0, s_max]."""
    worst = 0.0
    for s in (0.0, 0.5 * s_max, s_max):
        u = np.full((grid.nx, grid.ny), s)
        worst = max(worst, float(np.max(np.abs(reaction.apply_slope(grid, u, t)))))
    return worst


def default_dt(reaction: Reaction, grid: Grid, s_max: float | None = None, c: float = 0.0) -> float:
    """Reaction-limited step min(0.25/sup|f_s|, hx), tightened by two guards.

    Crank-Nicolson is A-stable but not monotone: at advective CFL above ~1/2
    (or when growth can re-amplify the slowly damped stiff 2-cycle that the
    positivity clamp rectifies) a spurious checkerboard state can survive, so
    dt is additionally capped by 0.5 hx / c and hx / sqrt(sup r).
    """
    s_max = reaction.S if s_max is None else max(s_max, reaction.S)
    bound = max(slope_sup(reaction, grid, s_max), 1e-12)
    dt = min(0.25 / bound, grid.hx)
    if c > 1.0:
        dt = min(dt, 0.5 * grid.hx / c)
    sup_r = max(reaction.growth.sup_rate, 1.0)
    return min(dt, grid.hx / float(np.sqrt(sup_r)))


class Stepper:
    """IMEX trapezoidal machinery for a fixed (grid, c, dt).

    Diffusion and drift are treated by Crank-Nicolson; the reaction enters
    explicitly at the step midpoint through a stabilized half-step predictor
    u_mid = u + (dt/2)(I - dt/2 L)^{-1} (L u + f(t, u)).  Steady states of
    the spatial discretization are exact fixed points of the step, which the
    autonomous-reduction and stability-consistency checks rely on.
    """

    def __init__(self, reaction: Reaction, grid: Grid, c: float, dt: float, s_max: float | None = None):
        smax = max(reaction.S, s_max or 0.0)
        self.bound = slope_sup(reaction, grid, smax)
        if dt * self.bound > 0.5:
            raise ValueError(
                f"dt={dt} violates the reaction stability bound dt*sup|f_s| <= 0.5 "
                f"(sup|f_s|={self.bound:.3g})"
            )
        self.reaction = reaction
        self.grid = grid
        self.c = float(c)
        self.dt = float(dt)
        A = transport_matrix(grid, self.c)  # A = -(Delta + c d1)
        eye = sp.identity(A.shape[0], format="csr")
        self._A = A
        self._plus = (eye - 0.5 * dt * A).tocsr()  # I + dt/2 L
        self._lu = spla.splu((eye + 0.5 * dt * A).tocsc())  # I - dt/2 L
        self.max_clamp = 0.0

    def step(self, u: Array, t: float) -> Array:
        g, dt = self.grid, self.dt
        periodic = self.reaction.time_periodic
        t0 = t if periodic else None
        t_mid = t + 0.5 * dt if periodic else None
        flat = u.reshape(-1)
        rhs = -(self._A @ flat) + self.reaction.apply(g, u, t0).reshape(-1)
        u_mid = (flat + 0.5 * dt * self._lu.solve(rhs)).reshape(g.nx, g.ny)
        f_mid = self.reaction.apply(g, u_mid, t_mid).reshape(-1)
        out = self._lu.solve(self._plus @ flat + dt * f_mid).reshape(g.nx, g.ny)
        if not np.all(np.isfinite(out)):
            raise InstabilityError("non-finite values in IMEX step")
        neg = float(-np.min(out))
        if neg > 0.0:
            self.max_clamp = max(self.max_clamp, neg)
            out = np.maximum(out, 0.0)
        return out


def step_imex(state: SimState, reaction: Reaction, c: float) -> SimState:
    """Advance one IMEX step; builds its own solver, so prefer run() for loops."""
    stepper = Stepper(reaction, state.u.grid, c, state.dt, s_max=float(np.max(state.u.values)))
    u = stepper.step(np.asarray(state.u.values, dtype=float), state.t)
    return SimState(t=state.t + state.dt, u=Field(state.u.grid, u), dt=state.dt)


def run(
    reaction: Reaction,
    c: float,
    u0: Field,
    horizon: float,
    sample_every: float,
    reference: Optional[Field] = None,
    dt: Optional[float] = None,
    stop_below: Optional[float] = None,
    settle_rtol: Optional[float] = None,
) -> Trajectory:
    """March to the horizon, sampling norms and distances to the reference.

    Early exits: `stop_below` ends the run when the sup-norm falls below it;
    `settle_rtol` ends it when the sup-norm has changed relatively less than
    this over the trailing 10% of the elapsed time.  Sampling still records
    the exit state.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    grid = u0.grid
    smax = float(np.max(u0.values))
    dt = default_dt(reaction, grid, smax, c) if dt is None else float(dt)
    stepper = Stepper(reaction, grid, c, dt, s_max=smax)
    ref = reference.values if reference is not None else None
    traj = Trajectory()
    u = np.asarray(u0.values, dtype=float)
    t = 0.0

    def record():
        fu = Field(grid, u)
        diff = fu if ref is None else Field(grid, u - ref)
        traj.append(
            t,
            norm(fu, "sup"),
            norm(fu, "L1"),
            norm(diff, "sup"),
            norm(diff, "L1"),
            _outer_sup(fu),
        )

    record()
    steps_per_sample = max(1, int(round(sample_every / dt)))
    n_steps = int(math.ceil(horizon / dt))
    for k in range(1, n_steps + 1):
        u = stepper.step(u, t)
        t = k * dt
        if k % steps_per_sample == 0 or k == n_steps:
            record()
            sup = traj.sup_norm[-1]
            if stop_below is not None and sup < stop_below:
                break
            if settle_rtol is not None and _settled(traj, settle_rtol):
                break
    traj.max_clamp = stepper.max_clamp
    traj.sup_eventually_monotone = _eventually_monotone(traj.sup_norm)
    traj.final_state = SimState(t=t, u=Field(grid, u), dt=dt)
    return traj


def _outer_sup(f: Field) -> float:
    g = f.grid
    outer = np.abs(g.x) >= 0.9 * g.X
    if not np.any(outer):
        return float("nan")
    return float(np.max(np.abs(f.values[outer, :])))


def _settled(traj: Trajectory, rtol: float) -> bool:
    if len(traj.t) < 5:
        return False
    t_now = traj.t[-1]
    window = t_now * 0.1
    sups = [s for tt, s in zip(traj.t, traj.sup_norm) if tt >= t_now - window]
    if len(sups) < 2:
        return False
    lo, hi = min(sups), max(sups)
    return hi > 0 and (hi - lo) / hi < rtol


def _eventually_monotone(sups: list[float]) -> bool:
    # monotone (either direction) over the trailing half of the samples
    tail = sups[len(sups) // 2 :]
    if len(tail) < 2:
        return True
    eps = 1e-12 * max(1.0, max(tail))
    return all(b <= a + eps for a, b in zip(tail, tail[1:])) or all(
        b >= a - eps for a, b in zip(tail, tail[1:])
    )


def classify(
    trajectory: Trajectory,
    extinction_threshold: float = 1e-6,
    persistence_floor: float = 1e-2,
) -> Outcome:
    """Dichotomy verdict from a finished trajectory.

    Extinction: final sup below the threshold.  Persistence: final sup above
    the floor and relative sup change over the last 10% of the horizon below
    1e-3.  Anything else is Undecided, a first-class outcome.
    """
    if not trajectory.t:
        raise ValueError("empty trajectory")
    final = trajectory.sup_norm[-1]
    if final < extinction_threshold:
        return Outcome.EXTINCTION
    if final > persistence_floor:
        t_end = trajectory.t[-1]
        window = [s for tt, s in zip(trajectory.t, trajectory.sup_norm) if tt >= 0.9 * t_end]
        if len(window) >= 2:
            lo, hi = min(window), max(window)
            if hi > 0 and (hi - lo) / hi < 1e-3:
                return Outcome.PERSISTENCE
    return Outcome.UNDECIDED


@dataclass(frozen=True)
class PulsatingFront:
    """Converged periodic orbit: fields at k*T/4 within one period."""

    orbit: tuple[Field, Field, Field, Field]
    lambda_p: float
    defect: float
    periods: int
    positive: bool
    tail_ok: bool
    max_clamp: float


def pulsating_front(
    reaction: Reaction,
    c: float,
    grid: Grid,
    spec: PeriodicSpec,
    tol: float = 1e-6,
    max_periods: int = 400,
    eta: float = 1e-2,
) -> PulsatingFront:
    """Iterate the nonlinear period map from a small Floquet-eigenfunction seed.

    Requires the truncated periodic eigenvalue to be negative; refuses with
    ExtinctionRegimeError otherwise.  Successive period snapshots must be
    nodewise nondecreasing (within clamp slack); the returned orbit satisfies
    sup|u(T) - u(0)| < tol.
    """
    if not reaction.time_periodic:
        raise ValueError("pulsating_front needs a time-periodic reaction")
    flo = floquet_eigen(reaction.growth, grid, c, spec, tol=min(tol, 1e-8))
    if flo.lambda_p >= 0:
        raise ExtinctionRegimeError(
            f"extinction regime: periodic principal eigenvalue {flo.lambda_p:.6g} >= 0"
        )
    chi = flo.snapshot_0.values
    K = spec.time_steps_per_period
    dt = spec.T / K
    stepper = Stepper(reaction, grid, c, dt, s_max=reaction.S)

    for _attempt in range(6):
        u = eta * reaction.S * chi
        prev = u.copy()
        monotone_ok = True
        defect = float("inf")
        for n in range(1, max_periods + 1):
            t0 = (n - 1) * spec.T
            for k in range(K):
                u = stepper.step(u, t0 + k * dt)
            drop = float(np.min(u - prev))
            if drop < -CLAMP_FLAG_LIMIT * max(1.0, reaction.S):
                monotone_ok = False
                break
            defect = float(np.max(np.abs(u - prev)))
            prev = u.copy()
            if defect < tol:
                break
        if monotone_ok and defect < tol:
            break
        eta *= 0.25  # seed was not a discrete subsolution; shrink and retry
    else:
        raise RuntimeError("pulsating front iteration failed: non-monotone period sequence")
    if defect >= tol:
        raise RuntimeError(
            f"pulsating front did not settle within {max_periods} periods (defect {defect:.3e})"
        )

    # one more period to collect the orbit at quarter-period phases
    orbit = [Field(grid, u)]
    t0 = 0.0
    v = u.copy()
    for q in range(3):
        for k in range(K // 4):
            v = stepper.step(v, t0)
            t0 += dt
        orbit.append(Field(grid, v))
    for k in range(K - 3 * (K // 4)):
        v = stepper.step(v, t0)
        t0 += dt
    final_defect = float(np.max(np.abs(v - u)))
    positive = all(float(np.min(f.values)) > 0.0 for f in orbit)
    return PulsatingFront(
        orbit=tuple(orbit),  # type: ignore[arg-type]
        lambda_p=flo.lambda_p,
        defect=final_defect,
        periods=n,
        positive=positive,
        tail_ok=tail_ok(orbit[0]),
        max_clamp=stepper.max_clamp,
    )
