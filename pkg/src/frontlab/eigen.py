"""Discrete elliptic operators and principal eigenvalue solvers.

Sign convention: every eigenvalue reported here is the principal eigenvalue
of -(Delta + c d/dx1 + r), so persistence corresponds to lambda < 0 for the
drift operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from .domain import BoundaryKind, EndsKind, Field, Grid, build_grid
from .reaction import GrowthProfile

Array = NDArray[np.float64]


class ConvergenceError(RuntimeError):
    """Eigen iteration failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class ConsistencyError(RuntimeError):
    """Cross-check between two discretizations disagreed beyond tolerance."""


class AssemblyError(ValueError):
    """Operator assembly refused (bad Peclet number or incompatible BCs)."""


@dataclass(frozen=True)
class SparseOperator:
    """Assembled operator with metadata needed to interpret eigenvectors.

    `matrix` acts on flattened (nx*ny) node vectors.  When a diagonal
    similarity was applied to make the matrix exactly symmetric (Neumann
    mirror rows), `to_field` converts matrix eigenvectors back to physical
    node values.
    """

    matrix: sp.csr_matrix
    grid: Optional[Grid]
    symmetric: bool
    c: float
    to_field_scale: Optional[Array] = None  # physical = matrix_vec * scale

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def to_field_values(self, vec: Array) -> Array:
        if self.to_field_scale is not None:
            vec = vec * self.to_field_scale
        return vec


@dataclass(frozen=True)
class EigenResult:
    """Principal eigenpair of an assembled operator.

    lambda_ is the eigenvalue of the negated operator per the module sign
    convention; the eigenfunction is strictly positive and sup-normalized.
    """

    lambda_: float
    eigenfunction: object  # Field for 2D operators, ndarray for 1D ones
    iterations: int
    residual: float
    lambda_cross: Optional[float] = None  # non-symmetric route, when computed
    c: Optional[float] = None  # drift speed, set by drift_eigen


def _lap_1d(n: int, h: float, bc: BoundaryKind) -> tuple[sp.csr_matrix, Optional[Array]]:
    """1D -d^2/dy^2 matrix and the diagonal similarity that symmetrizes it.

    Dirichlet and periodic rows are already symmetric (scale None).  Neumann
    mirror-ghost rows carry off-diagonal -2/h^2 at the ends; conjugating by
    D = diag(sqrt(w)) with boundary weights 1/2 restores exact symmetry
    without changing the spectrum.
    """
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    if bc is BoundaryKind.DIRICHLET:
        A = sp.diags([off, main, off], [-1, 0, 1], format="csr")
        return A, None
    if bc is BoundaryKind.PERIODIC_Y:
        A = sp.diags([off, main, off], [-1, 0, 1], format="lil")
        A[0, n - 1] = -1.0 / h**2
        A[n - 1, 0] = -1.0 / h**2
        return A.tocsr(), None
    if bc is BoundaryKind.NEUMANN:
        A = sp.diags([off, main, off], [-1, 0, 1], format="lil")
        A[0, 1] = -2.0 / h**2
        A[n - 1, n - 2] = -2.0 / h**2
        d = np.ones(n)
        d[0] = d[-1] = math.sqrt(0.5)
        # D A D^{-1} has symmetric off-diagonals -sqrt(2)/h^2 at the ends
        return A.tocsr(), d
    raise AssemblyError(f"unsupported lateral bc {bc}")


def _peclet_guard(c: float, h: float) -> None:
    if abs(c) * h / 2.0 >= 1.0:
        raise AssemblyError(f"grid Peclet number {abs(c) * h / 2.0:.3f} >= 1; refine hx")


def _x_operator(grid: Grid, c: float, symmetrized: bool) -> sp.csr_matrix:
    """x1 part of the assembly: -d^2/dx^2 (- c d/dx) with the chosen scheme.

    On Dirichlet-ends grids the drift uses exponentially fitted weights
    (-e^{+ch/2} u_{i+1} - e^{-ch/2} u_{i-1} + 2 u_i)/h^2 + (c^2/4) u_i,
    the exact diagonal conjugate of the symmetric -d^2/dx^2 + c^2/4 part, so
    the discrete drift-shift identity holds to solver precision and the
    matrix stays an M-matrix at any Peclet number.  Periodic boxes use plain
    central differences (no Liouville weight exists there; constants must be
    annihilated exactly).
    """
    n, h = grid.nx, grid.hx
    if grid.ends_bc is EndsKind.PERIODIC_X:
        A = sp.lil_matrix((n, n))
        up = -1.0 / h**2
        w = c / (2.0 * h)
        if c != 0.0:
            _peclet_guard(c, h)
        for i in range(n):
            A[i, i] = 2.0 / h**2
            A[i, (i + 1) % n] = up - w
            A[i, (i - 1) % n] = up + w
        return A.tocsr()
    if symmetrized or c == 0.0:
        main = np.full(n, 2.0 / h**2)
        off = np.full(n - 1, -1.0 / h**2)
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")
    up = np.full(n - 1, -math.exp(c * h / 2.0) / h**2)
    lo = np.full(n - 1, -math.exp(-c * h / 2.0) / h**2)
    main = np.full(n, 2.0 / h**2 + c * c / 4.0)
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr")


def assemble(grid: Grid, growth: GrowthProfile, c: float, symmetrized: bool) -> SparseOperator:
    """Assemble -(Delta + c d1 + r) on the grid.

    symmetrized=True builds the Liouville form -Delta - r + c^2/4, exactly
    symmetric (Neumann mirror rows conjugated by their half-weights).  The
    non-symmetrized form is the exact diagonal conjugate of the symmetrized
    one on Dirichlet-ends grids; see _x_operator.
    """
    if symmetrized and c != 0.0 and grid.ends_bc is EndsKind.PERIODIC_X:
        raise AssemblyError(
            "symmetrized drift assembly needs Dirichlet ends (Liouville weight is not periodic)"
        )
    r = growth.rate_on(grid)
    Ax = _x_operator(grid, c, symmetrized)
    Ay, d_y = _lap_1d(grid.ny, grid.hy, grid.lateral_bc)
    Ix = sp.identity(grid.nx, format="csr")
    Iy = sp.identity(grid.ny, format="csr")
    A = sp.kron(Ax, Iy, format="csr") + sp.kron(Ix, Ay, format="csr")
    diag = -r.reshape(-1)
    if symmetrized:
        diag = diag + c * c / 4.0
    A = (A + sp.diags(diag)).tocsr()
    scale = None
    if d_y is not None and symmetrized:
        # conjugate so the Neumann rows are exactly symmetric
        d = np.tile(d_y, grid.nx)
        A = (sp.diags(d) @ A @ sp.diags(1.0 / d)).tocsr()
        scale = 1.0 / d
    return SparseOperator(matrix=A, grid=grid, symmetric=symmetrized, c=c, to_field_scale=scale)


def assemble_cross_section(
    mu_fn: Callable[[Array], Array], ny: int, bc: BoundaryKind, H: float = 1.0
) -> SparseOperator:
    """1D operator -d^2/dy^2 - mu(y) on (0, H) with the given boundary rows."""
    if ny < 3:
        raise AssemblyError(f"need ny >= 3, got {ny}")
    if bc is BoundaryKind.DIRICHLET:
        h = H / (ny + 1)
        y = h * (np.arange(ny) + 1.0)
    elif bc is BoundaryKind.NEUMANN:
        h = H / (ny - 1)
        y = h * np.arange(ny)
    else:
        h = H / ny
        y = h * np.arange(ny)
    Ay, d_y = _lap_1d(ny, h, bc)
    A = (Ay + sp.diags(-np.asarray(mu_fn(y), dtype=float))).tocsr()
    scale = None
    if d_y is not None:
        A = (sp.diags(d_y) @ A @ sp.diags(1.0 / d_y)).tocsr()
        scale = 1.0 / d_y
    return SparseOperator(matrix=A, grid=None, symmetric=True, c=0.0, to_field_scale=scale)


def _gershgorin_lower(A: sp.csr_matrix) -> float:
    diag = A.diagonal()
    absA = abs(A)
    row_sums = np.asarray(absA.sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - row_sums))


def principal_eigen(op: SparseOperator, tol: float = 1e-8, max_iter: int = 200) -> EigenResult:
    """Smallest eigenvalue with positive eigenfunction via shifted inverse iteration.

    Deterministic all-ones start.  The shift starts below the Gershgorin
    lower bound and is refreshed every 5 iterations to just below the current
    Rayleigh quotient, which keeps (A - sigma I)^{-1} entrywise positive for
    these M-matrices so iterates remain strictly positive.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = op.matrix
    n = A.shape[0]
    identity = sp.identity(n, format="csr")

    def factor(shift: float):
        return spla.splu((A - shift * identity).tocsc())

    v = np.ones(n)
    v /= np.linalg.norm(v)
    sigma = _gershgorin_lower(A) - 1.0
    lu = factor(sigma)
    lam = float(v @ (A @ v))
    residual = float("inf")
    safety = 2.0 if op.symmetric else 10.0
    for it in range(1, max_iter + 1):
        w = lu.solve(v)
        if not np.all(np.isfinite(w)):
            raise ConvergenceError("inverse iteration produced a degenerate vector", residual)
        if np.min(w) <= 0.0:
            # shift crept at or above lambda_min; back off and retry the step
            sigma = sigma - max(1.0, abs(lam - sigma))
            lu = factor(sigma)
            w = lu.solve(v)
            if np.min(w) <= 0.0:
                raise ConvergenceError("inverse iteration lost positivity", residual)
        v = w / np.linalg.norm(w)
        Av = A @ v
        lam = float(v @ Av)
        residual = float(np.linalg.norm(Av - lam * v))
        if residual < tol:
            break
        if it % 5 == 0 and residual < 0.1 * max(lam - sigma, 1e-30):
            # Refresh only once the iterate tracks the eigenvalue nearest the
            # shift; from below that is lambda_min, and |RQ - lambda_min| <=
            # residual keeps the new shift strictly underneath it (entrywise
            # positive resolvent).  Refreshing from a mixed iterate would lock
            # onto an interior eigenvalue instead.
            sigma_new = lam - max(safety * residual, 1e-12 * (1.0 + abs(lam)))
            if sigma_new > sigma:
                sigma = sigma_new
                try:
                    lu = factor(sigma)
                except RuntimeError:
                    sigma -= 1e-8 * (1.0 + abs(sigma))
                    lu = factor(sigma)
    else:
        raise ConvergenceError(f"no convergence after {max_iter} iterations", residual)

    phys = op.to_field_values(v)
    if np.max(phys) < abs(np.min(phys)):
        phys = -phys
    m = float(np.max(np.abs(phys)))
    phys = phys / m
    if np.min(phys) <= 0.0:
        raise ConvergenceError("eigenfunction lost positivity", residual)
    if op.grid is not None:
        eig_fun: object = Field(op.grid, phys.reshape(op.grid.nx, op.grid.ny))
    else:
        eig_fun = phys
    return EigenResult(lambda_=lam, eigenfunction=eig_fun, iterations=it, residual=residual)


def cross_section_eigen(
    mu_fn: Callable[[Array], Array],
    ny: int,
    bc: BoundaryKind,
    tol: float = 1e-8,
    H: float = 1.0,
    max_iter: int = 200,
) -> EigenResult:
    """Principal eigenvalue of -d^2/dy^2 - mu(y) on the cross-section."""
    return principal_eigen(assemble_cross_section(mu_fn, ny, bc, H), tol=tol, max_iter=max_iter)


def drift_eigen(
    grid: Grid,
    growth: GrowthProfile,
    c: float,
    tol: float = 1e-8,
    cross_check: bool = True,
    max_iter: int = 400,
) -> EigenResult:
    """Principal eigenvalue of -(Delta + c d1 + r) via the Liouville shift.

    Returns lambda from the symmetrized assembly (which already carries
    +c^2/4); the eigenfunction is mapped back through e^{-c x1/2} and
    sup-normalized.  A direct inverse iteration on the non-symmetric fitted
    assembly must agree within 10*tol or a ConsistencyError is raised.
    """
    if c < 0:
        raise ValueError("drift speed must be >= 0")
    sym = assemble(grid, growth, c, symmetrized=True)
    res = principal_eigen(sym, tol=tol, max_iter=max_iter)
    phi_sym = res.eigenfunction.values  # type: ignore[union-attr]
    weight = np.exp(-0.5 * c * grid.x)[:, None]
    phi = phi_sym * weight
    phi = phi / np.max(np.abs(phi))
    lam_cross = None
    if cross_check:
        nonsym = assemble(grid, growth, c, symmetrized=False)
        res_dir = principal_eigen(nonsym, tol=min(tol, 1e-10), max_iter=max_iter)
        lam_cross = res_dir.lambda_
        if abs(lam_cross - res.lambda_) > 10.0 * tol:
            raise ConsistencyError(
                f"drift-shift cross-check failed: symmetrized {res.lambda_:.12e} vs "
                f"direct {lam_cross:.12e} (tolerance {10.0 * tol:.1e})"
            )
    return EigenResult(
        lambda_=res.lambda_,
        eigenfunction=Field(grid, phi),
        iterations=res.iterations,
        residual=res.residual,
        lambda_cross=lam_cross,
        c=float(c),
    )


@dataclass(frozen=True)
class TruncationResult:
    table: list[tuple[float, float]]  # (R, lambda_R)
    lambda_limit: float  # last entry, the working lambda-tilde_1
    last_gap: float
    monotone: bool


def truncation_limit(
    growth: GrowthProfile,
    c: float,
    R_list: Sequence[float],
    nodes_per_unit: float,
    ny: int,
    lateral_bc: BoundaryKind,
    H: float = 1.0,
    tol: float = 1e-8,
    monotone_tol: float = 1e-8,
) -> TruncationResult:
    """lambda_R ladder with Dirichlet ends at +-R and its extrapolated limit.

    The x1 spacing is held (approximately) fixed across R by deriving nx from
    nodes_per_unit.  A non-monotone ladder beyond monotone_tol is flagged via
    `monotone=False` (refine the grid), not raised.
    """
    Rs = [float(R) for R in R_list]
    if len(Rs) < 3 or any(b <= a for a, b in zip(Rs, Rs[1:])):
        raise ValueError("R_list must be strictly increasing with >= 3 entries")
    table = []
    for R in Rs:
        nx = max(3, int(round(2.0 * R * nodes_per_unit)) - 1)
        grid = build_grid(R, H, nx, ny, lateral_bc)
        res = drift_eigen(grid, growth, c, tol=tol)
        table.append((R, res.lambda_))
    lams = [lam for _, lam in table]
    monotone = all(b <= a + monotone_tol for a, b in zip(lams, lams[1:]))
    return TruncationResult(
        table=table,
        lambda_limit=lams[-1],
        last_gap=abs(lams[-1] - lams[-2]),
        monotone=monotone,
    )


def critical_speed(lambda0: float) -> Optional[float]:
    """c* = 2 sqrt(-lambda0) when lambda0 < 0; None means extinction for all c."""
    if not np.isfinite(lambda0):
        raise ValueError("lambda0 must be finite")
    if lambda0 >= 0:
        return None
    return 2.0 * math.sqrt(-lambda0)
