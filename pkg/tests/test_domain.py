import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from frontlab.domain import (
    BoundaryKind,
    DomainError,
    Field,
    build_grid,
    constant_field,
    field_from_function,
    norm,
    tail_clearance,
    tail_slice,
)


def test_spacing_dirichlet():
    g = build_grid(1, 1, 3, 3, BoundaryKind.DIRICHLET)
    assert g.hx == pytest.approx(0.5)
    assert g.hy == pytest.approx(0.25)


def test_node_counts():
    g = build_grid(60, 1, 1200, 40, BoundaryKind.NEUMANN)
    assert g.n_nodes == 48000
    assert g.hy == pytest.approx(1 / 39)


def test_bad_dimensions_rejected():
    with pytest.raises(DomainError):
        build_grid(0, 1, 10, 10, BoundaryKind.DIRICHLET)
    with pytest.raises(DomainError):
        build_grid(1, 1, 2, 10, BoundaryKind.DIRICHLET)


def test_node_coordinates_deterministic():
    g = build_grid(2, 1, 7, 5, BoundaryKind.DIRICHLET)
    assert g.x[0] == pytest.approx(-2 + g.hx)
    assert g.x[-1] == pytest.approx(2 - g.hx)
    gn = build_grid(2, 1, 7, 5, BoundaryKind.NEUMANN)
    assert gn.y[0] == 0.0
    assert gn.y[-1] == pytest.approx(1.0)


def test_norms_zero_field():
    g = build_grid(1, 1, 5, 5, BoundaryKind.DIRICHLET)
    z = constant_field(g, 0.0)
    for kind in ("sup", "L1", "L2"):
        assert norm(z, kind) == 0.0


def test_l1_of_unit_field_is_area():
    # constant 1 on the full box [-1,1]x[0,1]: area 2 up to the boundary strip
    g = build_grid(1, 1, 199, 99, BoundaryKind.NEUMANN)
    f = constant_field(g, 1.0)
    assert norm(f, "L1") == pytest.approx(2.0, rel=2e-2)


def test_l1_exponential_vs_quadrature_oracle():
    # oracle: adaptive quadrature of e^{-|x|} over [-X, X], times H.
    # The flat-weight L1 sum carries an O(hy) bias from the Neumann boundary
    # rows, so the tolerance tracks 2*hy.
    X = 12.0
    g = build_grid(X, 1, 1201, 201, BoundaryKind.NEUMANN)
    f = field_from_function(g, lambda x, y: np.exp(-np.abs(x)))
    oracle, _ = quad(lambda x: np.exp(-abs(x)), -X, X, limit=200)
    assert norm(f, "L1") == pytest.approx(oracle, rel=2.5 * g.hy)
    assert oracle == pytest.approx(2.0, abs=1e-4)


def test_l1_refinement_second_order():
    # halving h must shrink the quadrature error by ~4x for a smooth function
    X = 3.0

    def fn(x, y):
        return np.exp(-(x**2)) * np.sin(np.pi * y)

    exact = quad(lambda x: np.exp(-(x**2)), -X, X)[0] * (2 / np.pi)
    errs = []
    for nx, ny in ((99, 19), (199, 39), (399, 79)):
        g = build_grid(X, 1, nx, ny, BoundaryKind.DIRICHLET)
        errs.append(abs(norm(field_from_function(g, fn), "L1") - exact))
    assert errs[0] / errs[1] > 3.0
    assert errs[1] / errs[2] > 3.0


@settings(max_examples=30, deadline=None)
@given(
    alpha=st.floats(-8, 8, allow_nan=False),
    seed=st.integers(0, 2**31 - 1),
)
def test_norm_homogeneity_and_triangle(alpha, seed):
    rng = np.random.default_rng(seed)
    g = build_grid(1, 1, 6, 5, BoundaryKind.DIRICHLET)
    a = Field(g, rng.normal(size=(6, 5)))
    b = Field(g, rng.normal(size=(6, 5)))
    for kind in ("sup", "L1", "L2"):
        na = norm(a, kind)
        assert norm(Field(g, alpha * a.values), kind) == pytest.approx(abs(alpha) * na, rel=1e-12, abs=1e-12)
        lhs = norm(Field(g, a.values + b.values), kind)
        assert lhs <= na + norm(b, kind) + 1e-12


def test_field_rejects_nan():
    g = build_grid(1, 1, 5, 5, BoundaryKind.DIRICHLET)
    vals = np.zeros((5, 5))
    vals[2, 2] = np.nan
    with pytest.raises(DomainError):
        Field(g, vals)


def test_field_values_frozen():
    g = build_grid(1, 1, 5, 5, BoundaryKind.DIRICHLET)
    f = constant_field(g, 1.0)
    with pytest.raises(ValueError):
        f.values[0, 0] = 2.0


def test_tail_slice_full_width():
    g = build_grid(1, 1, 11, 5, BoundaryKind.DIRICHLET)
    f = constant_field(g, 1.0)
    samples = tail_slice(f, "right", (-1, 1))
    assert len(samples) == 11
    xs = [s[0] for s in samples]
    assert xs == sorted(xs)


def test_tail_slice_monotone_exponential():
    g = build_grid(2, 1, 39, 5, BoundaryKind.DIRICHLET)
    f = field_from_function(g, lambda x, y: np.exp(-x))
    samples = tail_slice(f, "right", (1.0, 2.0))
    vals = [s[1] for s in samples]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_tail_slice_errors():
    g = build_grid(1, 1, 11, 5, BoundaryKind.DIRICHLET)
    f = constant_field(g, 1.0)
    with pytest.raises(DomainError):
        tail_slice(f, "right", (0.5, 0.5))
    with pytest.raises(DomainError):
        tail_slice(f, "right", (0.5, 3.0))


def test_tail_clearance():
    g = build_grid(10, 1, 99, 5, BoundaryKind.DIRICHLET)
    f = field_from_function(g, lambda x, y: np.exp(-2 * np.abs(x)))
    # outer 10% starts at |x| = 9: ratio ~ e^{-18}
    assert tail_clearance(f) < 1e-6
    g2 = build_grid(2, 1, 39, 5, BoundaryKind.DIRICHLET)
    f2 = field_from_function(g2, lambda x, y: np.exp(-np.abs(x)))
    assert tail_clearance(f2) > 1e-6
