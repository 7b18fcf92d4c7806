"""Steady fronts of Delta U + c d1 U + f(x, U) = 0 by damped Newton iteration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from .domain import BoundaryKind, Field, Grid, norm, tail_ok
from .eigen import EigenResult, drift_eigen
from .evolve import run
from .periodic import transport_matrix
from .reaction import Reaction

Array = NDArray[np.float64]

TRIVIAL_SUP = 1e-7


class NewtonError(RuntimeError):
    """Newton iteration diverged or stalled; carries the last residual."""

    def __init__(self, message: str, residual: float, index: Optional[int] = None):
        suffix = f" [parameter index n={index}]" if index is not None else ""
        super().__init__(f"{message} (last residual {residual:.3e}){suffix}")
        self.residual = residual
        self.index = index


class SeedError(RuntimeError):
    """Subsolution certificate could not be established."""


@dataclass(frozen=True)
class FrontSolution:
    """Converged steady state with its certificates.

    `trivial` marks convergence to the zero solution, the valid outcome that
    encodes nonexistence (c >= c*); it is distinct from a solver error.
    """

    U: Field
    residual: float
    c: float
    bc: BoundaryKind
    mass: float
    positive: bool
    tail_ok: bool
    trivial: bool
    iterations: int
    clamp_magnitude: float  # size of the negative part removed after convergence


def pde_residual(reaction: Reaction, grid: Grid, c: float, u: Array) -> Array:
    """Discrete residual F(U) = (Delta + c d1)U + f(x, U) as an (nx, ny) array."""
    A = transport_matrix(grid, c)
    lin = -(A @ u.reshape(-1)).reshape(grid.nx, grid.ny)
    return lin + reaction.apply(grid, u)


def subsolution_seed(eig: EigenResult, reaction: Reaction, epsilon: float | None = None) -> Field:
    """eps * phi shrunk until it certifies as a discrete subsolution.

    The drift eigenfunction phi (sup-normalized) satisfies
    (Delta + c d1)phi = -(r + lambda)phi exactly on the fitted assembly, so
    for lambda < 0 the residual of eps*phi becomes nonnegative once eps is
    small; 60 halvings without a certificate suggests lambda >= 0 at the
    discrete level.  Halving starts at the saturation bound S by default: the
    largest certified amplitude sits inside the positive root's Newton basin,
    small ones do not.
    """
    if eig.lambda_ >= 0:
        raise ValueError(f"subsolution seed needs lambda < 0, got {eig.lambda_:.6g}")
    if epsilon is None:
        epsilon = reaction.S
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not isinstance(eig.eigenfunction, Field) or eig.c is None:
        raise ValueError("subsolution_seed expects a drift_eigen result on a 2D grid")
    phi = eig.eigenfunction
    grid = phi.grid
    c = eig.c
    # (Delta + c d1) phi = -(r + lambda) phi holds exactly for the discrete
    # eigenpair; evaluating the residual through this identity keeps the
    # certificate free of matrix-application roundoff in the deep tails.
    r = reaction.growth.rate_on(grid)
    lin = -(r + eig.lambda_) * phi.values
    sup_phi = float(np.max(phi.values))

    def certified(e: float) -> bool:
        res = e * lin + reaction.apply(grid, e * phi.values)
        return float(np.min(res)) >= -1e-12 and e * sup_phi <= reaction.S

    eps = float(epsilon)
    hi = None
    for _ in range(60):
        if certified(eps):
            break
        hi = eps
        eps *= 0.5
    else:
        raise SeedError(
            "could not certify a subsolution after 60 halvings "
            f"(lambda={eig.lambda_:.6g} may be >= 0 at the discrete level)"
        )
    if hi is not None:
        # push eps toward the largest certified amplitude: small seeds fall
        # into the trivial root's Newton basin
        lo = eps
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            if certified(mid):
                lo = mid
            else:
                hi = mid
        eps = lo
    return Field(grid, eps * phi.values)


def newton_front(
    reaction: Reaction,
    c: float,
    grid: Grid,
    seed: Field,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> FrontSolution:
    """Damped Newton on F(U) = (Delta + c d1)U + f(., U) from a nonnegative seed."""
    if float(np.min(seed.values)) < 0:
        raise ValueError("seed must be nonnegative")
    A = transport_matrix(grid, c)
    n = grid.nx * grid.ny
    u = np.asarray(seed.values, dtype=float).copy()

    def residual(vec2d: Array) -> Array:
        return -(A @ vec2d.reshape(-1)).reshape(grid.nx, grid.ny) + reaction.apply(grid, vec2d)

    F = residual(u)
    nrm = float(np.max(np.abs(F)))
    it = 0
    while nrm >= tol and it < max_iter:
        it += 1
        J = (-A + sp.diags(reaction.apply_slope(grid, u).reshape(-1))).tocsc()
        try:
            delta = spla.splu(J).solve(-F.reshape(-1)).reshape(grid.nx, grid.ny)
        except RuntimeError as exc:
            raise NewtonError(f"Jacobian factorization failed: {exc}", nrm)
        s = 1.0
        while s >= 2.0**-30:
            trial = u + s * delta
            nrm_trial = float(np.max(np.abs(residual(trial))))
            if nrm_trial < nrm * (1.0 - 1e-4 * s) or nrm_trial < tol:
                u = trial
                F = residual(u)
                nrm = float(np.max(np.abs(F)))
                break
            s *= 0.5
        else:
            raise NewtonError("line search stalled", nrm)
    if nrm >= tol:
        raise NewtonError(f"no convergence in {max_iter} Newton steps", nrm)

    clamp = float(max(0.0, -np.min(u)))
    u = np.maximum(u, 0.0)
    U = Field(grid, u)
    sup = float(np.max(u))
    trivial = sup < TRIVIAL_SUP * max(1.0, reaction.S)
    positive = (not trivial) and float(np.min(u)) > 0.0
    return FrontSolution(
        U=U,
        residual=float(np.max(np.abs(residual(u)))),
        c=float(c),
        bc=grid.lateral_bc,
        mass=norm(U, "L1"),
        positive=positive,
        tail_ok=True if trivial else tail_ok(U),
        trivial=trivial,
        iterations=it,
        clamp_magnitude=clamp,
    )


def solve_front(
    reaction: Reaction,
    c: float,
    grid: Grid,
    tol: float = 1e-10,
    eig: Optional[EigenResult] = None,
) -> FrontSolution:
    """Front pipeline: certified-subsolution seed, constant-S fallback.

    When lambda < 0 a positive front exists; if Newton from the certified
    subsolution still lands on the trivial root (possible when the
    certificate amplitude sits below the Newton basin ridge, e.g. strongly
    saturating reactions), the constant-S supersolution seed is used, from
    which damped Newton descends reliably.
    """
    if eig is None:
        eig = drift_eigen(grid, reaction.growth, c)
    s_seed = Field(grid, np.full((grid.nx, grid.ny), reaction.S))
    if eig.lambda_ >= 0:
        return newton_front(reaction, c, grid, s_seed, tol=tol)
    fr = newton_front(reaction, c, grid, subsolution_seed(eig, reaction), tol=tol)
    if fr.trivial or fr.clamp_magnitude > 1e-10 * max(1.0, reaction.S):
        # landed on the trivial root or a sign-indefinite root; descend from S
        fr = newton_front(reaction, c, grid, s_seed, tol=tol)
    return fr


@dataclass(frozen=True)
class ProbeResult:
    max_distance: float
    n_converged: int
    all_trivial: bool
    skipped: bool
    note: str
    violation: bool


def uniqueness_probe(
    reaction: Reaction,
    c: float,
    grid: Grid,
    n_seeds: int = 3,
    tol: float = 1e-10,
    march_time: float = 50.0,
) -> ProbeResult:
    """Drive several seeds to convergence and report the max pairwise distance.

    Seeds: the certified subsolution, the constant S supersolution, and the
    state time-marched from the subsolution for `march_time`.  A reaction
    homogeneous in x1 is skipped: translates of any front are fronts too, so
    uniqueness genuinely fails there.
    """
    if n_seeds < 2:
        raise ValueError("need at least 2 seeds")
    r = reaction.growth.rate_on(grid)
    if reaction.growth.homogeneous_x or float(np.max(np.ptp(r, axis=0))) < 1e-13:
        return ProbeResult(
            max_distance=float("nan"),
            n_converged=0,
            all_trivial=False,
            skipped=True,
            note="reaction is homogeneous in x1; uniqueness fails by translation",
            violation=False,
        )
    eig = drift_eigen(grid, reaction.growth, c)
    if eig.lambda_ < 0:
        sub = subsolution_seed(eig, reaction)
    else:
        sub = Field(grid, 0.01 * reaction.S * eig.eigenfunction.values)
    seeds = [sub, Field(grid, np.full((grid.nx, grid.ny), reaction.S))]
    if n_seeds >= 3:
        marched = run(reaction, c, sub, horizon=march_time, sample_every=march_time / 10.0)
        seeds.append(marched.final_state.u)
    fronts = [newton_front(reaction, c, grid, s, tol=tol) for s in seeds[:n_seeds]]
    positives = [f for f in fronts if f.positive]
    if not positives:
        all_trivial = all(f.trivial for f in fronts)
        note = "all seeds reached the trivial root" if all_trivial else "no positive limit found"
        return ProbeResult(0.0, len(fronts), all_trivial, False, note, False)
    dmax = 0.0
    for i in range(len(positives)):
        for j in range(i + 1, len(positives)):
            d = float(np.max(np.abs(positives[i].U.values - positives[j].U.values)))
            dmax = max(dmax, d)
    violation = dmax > 100.0 * tol
    note = "uniqueness violation: limits disagree (discretization bug indicator)" if violation else ""
    return ProbeResult(dmax, len(fronts), False, False, note, violation)


@dataclass(frozen=True)
class DirichletFrontResult:
    front: FrontSolution
    lambda_d: float
    c_star: Optional[float]


def dirichlet_front(reaction: Reaction, c: float, grid: Grid, tol: float = 1e-10) -> DirichletFrontResult:
    """Front with Dirichlet lateral rows; c* comes from the Dirichlet eigenvalue."""
    if grid.lateral_bc is not BoundaryKind.DIRICHLET:
        raise ValueError("dirichlet_front requires a grid with Dirichlet lateral boundaries")
    eig0 = drift_eigen(grid, reaction.growth, 0.0)
    c_star = None if eig0.lambda_ >= 0 else 2.0 * float(np.sqrt(-eig0.lambda_))
    front = solve_front(reaction, c, grid, tol=tol)
    return DirichletFrontResult(front=front, lambda_d=eig0.lambda_, c_star=c_star)
