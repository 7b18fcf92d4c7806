"""Computational strip, grids, boundary tags, and sampled scalar fields."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray


class BoundaryKind(enum.Enum):
    """Boundary condition tag for an edge of the rectangle."""

    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"
    PERIODIC_Y = "periodic_y"


class EndsKind(enum.Enum):
    """Treatment of the truncated x1 ends; Dirichlet except for fully periodic boxes."""

    DIRICHLET = "dirichlet"
    PERIODIC_X = "periodic_x"


class DomainError(ValueError):
    """Invalid domain geometry or slicing request."""


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor grid on [-X, X] x [y0, y0 + H].

    Interior nodes only are stored.  Spacings follow the lateral convention:
    Dirichlet lateral uses hy = H/(ny+1) with nodes strictly inside; Neumann
    lateral uses the mirror-ghost convention hy = H/(ny-1) with nodes on the
    closed interval; periodic lateral uses hy = H/ny.  The x1 ends are
    Dirichlet (hx = 2X/(nx+1)) unless the box is periodic in x1 (hx = 2X/nx).
    Grids compare by identity so they can key operator caches.
    """

    X: float
    H: float
    nx: int
    ny: int
    lateral_bc: BoundaryKind
    ends_bc: EndsKind = EndsKind.DIRICHLET
    y0: float = 0.0
    hx: float = field(init=False)
    hy: float = field(init=False)
    x: NDArray[np.float64] = field(init=False, repr=False)
    y: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.X > 0 and self.H > 0):
            raise DomainError(f"domain lengths must be positive, got X={self.X}, H={self.H}")
        if self.nx < 3 or self.ny < 3:
            raise DomainError(f"need nx, ny >= 3, got nx={self.nx}, ny={self.ny}")
        if self.ends_bc is EndsKind.PERIODIC_X:
            hx = 2.0 * self.X / self.nx
            x = -self.X + hx * np.arange(self.nx)
        else:
            hx = 2.0 * self.X / (self.nx + 1)
            x = -self.X + hx * (np.arange(self.nx) + 1.0)
        if self.lateral_bc is BoundaryKind.DIRICHLET:
            hy = self.H / (self.ny + 1)
            y = self.y0 + hy * (np.arange(self.ny) + 1.0)
        elif self.lateral_bc is BoundaryKind.NEUMANN:
            hy = self.H / (self.ny - 1)
            y = self.y0 + hy * np.arange(self.ny)
        elif self.lateral_bc is BoundaryKind.PERIODIC_Y:
            hy = self.H / self.ny
            y = self.y0 + hy * np.arange(self.ny)
        else:  # pragma: no cover
            raise DomainError(f"unsupported lateral bc {self.lateral_bc}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "hx", hx)
        object.__setattr__(self, "hy", hy)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def mid_row(self) -> int:
        """Index of the mid-height row used for tail sampling."""
        return self.ny // 2

    def meshes(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(nx, ny) coordinate arrays with x varying along axis 0."""
        return np.meshgrid(self.x, self.y, indexing="ij")


def build_grid(
    X: float,
    H: float,
    nx: int,
    ny: int,
    lateral_bc: BoundaryKind,
    ends_bc: EndsKind = EndsKind.DIRICHLET,
    y0: float = 0.0,
) -> Grid:
    """Construct a grid, validating dimensions and node counts."""
    return Grid(
        X=float(X), H=float(H), nx=int(nx), ny=int(ny),
        lateral_bc=lateral_bc, ends_bc=ends_bc, y0=float(y0),
    )


@dataclass(frozen=True, eq=False)
class Field:
    """Scalar function sampled at the interior nodes of a grid.

    Values are stored as an (nx, ny) array and frozen after construction so
    fields can be shared across workers.
    """

    grid: Grid
    values: NDArray[np.float64]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise DomainError(
                f"field shape {vals.shape} does not match grid ({self.grid.nx}, {self.grid.ny})"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("field contains non-finite values")
        if vals is self.values and vals.flags.writeable:
            vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values: NDArray[np.float64]) -> "Field":
        return Field(self.grid, values)


def constant_field(grid: Grid, value: float) -> Field:
    return Field(grid, np.full((grid.nx, grid.ny), float(value)))


def field_from_function(grid: Grid, fn) -> Field:
    """Sample fn(x1, y) (vectorized over meshes) onto the grid."""
    X1, Y = grid.meshes()
    return Field(grid, np.asarray(fn(X1, Y), dtype=float))


def norm(f: Field, kind: str) -> float:
    """Grid norm of a field: 'sup', 'L1' (hx*hy*sum|v|) or 'L2'."""
    v = f.values
    w = f.grid.hx * f.grid.hy
    if kind == "sup":
        return float(np.max(np.abs(v)))
    if kind == "L1":
        return float(w * np.sum(np.abs(v)))
    if kind == "L2":
        return float(np.sqrt(w * np.sum(v * v)))
    raise DomainError(f"unknown norm kind {kind!r}")


def tail_slice(f: Field, side: str, window: tuple[float, float]) -> list[tuple[float, float]]:
    """Mid-height samples (x1, value) inside an x1 window on one side.

    The window [a, b] must lie inside [-X, X] and contain at least one node;
    samples come back ordered by increasing x1.
    """
    a, b = float(window[0]), float(window[1])
    g = f.grid
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    if not (a < b):
        raise DomainError(f"empty window [{a}, {b}]")
    if a < -g.X - 1e-12 or b > g.X + 1e-12:
        raise DomainError(f"window [{a}, {b}] outside grid [-{g.X}, {g.X}]")
    mask = (g.x >= a) & (g.x <= b)
    if not np.any(mask):
        raise DomainError(f"window [{a}, {b}] contains no grid nodes")
    row = f.values[:, g.mid_row]
    return [(float(xv), float(uv)) for xv, uv in zip(g.x[mask], row[mask])]


def tail_clearance(f: Field) -> float:
    """sup over the outer 10% of the x1 range divided by the global sup.

    The effective-infinity check accepts a solution when this ratio is below
    1e-6; otherwise the domain is too small for the requested run.
    """
    g = f.grid
    cut = 0.9 * g.X
    outer = np.abs(g.x) >= cut
    total = float(np.max(np.abs(f.values)))
    if total == 0.0:
        return 0.0
    if not np.any(outer):
        return float("inf")
    return float(np.max(np.abs(f.values[outer, :])) / total)


TAIL_CLEARANCE_LIMIT = 1e-6


def tail_ok(f: Field) -> bool:
    return tail_clearance(f) < TAIL_CLEARANCE_LIMIT
