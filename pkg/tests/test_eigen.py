import numpy as np
import pytest

from frontlab.domain import BoundaryKind, EndsKind, build_grid
from frontlab.eigen import (
    AssemblyError,
    ConvergenceError,
    TruncationResult,
    assemble,
    assemble_cross_section,
    critical_speed,
    cross_section_eigen,
    drift_eigen,
    principal_eigen,
    truncation_limit,
)
from frontlab.reaction import GrowthProfile, make_illustration, mu_step

ZERO = GrowthProfile(rate=lambda X1, Y: np.zeros_like(X1), sup_rate=0.0)


def smooth_profile(seed: int, bound: float = 3.0) -> GrowthProfile:
    """Deterministic pseudo-random bounded profile, unfavorable at infinity."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.5, 2.5, size=3)
    x0 = rng.uniform(-2, 2, size=3)
    w = rng.uniform(0.5, 1.5, size=3)
    ky = rng.uniform(0, 3, size=3)

    def rate(X1, Y):
        r = -bound * np.ones_like(X1)
        for ai, xi, wi, ki in zip(a, x0, w, ky):
            r = r + ai * np.exp(-((X1 - xi) ** 2) / wi) * (1 + 0.3 * np.cos(ki * Y))
        return r

    return GrowthProfile(rate=rate, sup_rate=bound + float(np.sum(a) * 1.3))


def test_cross_section_matrix_stencil():
    op = assemble_cross_section(lambda y: np.zeros_like(y), 3, BoundaryKind.DIRICHLET, H=1.0)
    A = op.matrix.toarray()
    assert A[1, 1] == pytest.approx(32.0)
    assert A[1, 0] == pytest.approx(-16.0)
    assert A[1, 2] == pytest.approx(-16.0)


def test_symmetrized_matrix_is_exactly_symmetric():
    g = build_grid(4, 1, 30, 11, BoundaryKind.NEUMANN)
    op = assemble(g, smooth_profile(1), 1.3, symmetrized=True)
    diff = (op.matrix - op.matrix.T).tocoo()
    assert diff.nnz == 0 or np.max(np.abs(diff.data)) == 0.0


def test_c_zero_assemblies_identical():
    g = build_grid(4, 1, 30, 11, BoundaryKind.DIRICHLET)
    a = assemble(g, smooth_profile(2), 0.0, symmetrized=True)
    b = assemble(g, smooth_profile(2), 0.0, symmetrized=False)
    assert abs(a.matrix - b.matrix).max() == 0.0


def test_laplacian_row_sums():
    # pure-Laplacian part: zero row sums at interior/Neumann rows, <= 0 at Dirichlet rows
    g = build_grid(4, 1, 12, 9, BoundaryKind.NEUMANN)
    op = assemble(g, ZERO, 0.0, symmetrized=False)
    sums = np.asarray(op.matrix.sum(axis=1)).ravel()
    assert np.all(sums >= -1e-9)
    interior = sums.reshape(12, 9)[1:-1, :]
    assert np.max(np.abs(interior)) < 1e-9


def test_1d_dirichlet_laplacian_exact():
    res = cross_section_eigen(lambda y: np.zeros_like(y), 199, BoundaryKind.DIRICHLET, tol=1e-9)
    h = 1.0 / 200.0
    discrete = (2.0 / h**2) * (1.0 - np.cos(np.pi * h))
    assert res.lambda_ == pytest.approx(discrete, abs=1e-10)
    assert res.lambda_ == pytest.approx(np.pi**2, abs=1e-3)


def test_neumann_constant_mode():
    res = cross_section_eigen(lambda y: -3.0 * np.ones_like(y), 25, BoundaryKind.NEUMANN, tol=1e-10)
    assert res.lambda_ == pytest.approx(3.0, abs=1e-9)
    assert np.ptp(res.eigenfunction) < 1e-9  # constant eigenfunction


def test_mu_alpha_zero_limit():
    # alpha = 0 realized as its a.e. representative mu = -1: lambda = 1 exactly
    res = cross_section_eigen(lambda y: -np.ones_like(y), 25, BoundaryKind.NEUMANN, tol=1e-10)
    assert res.lambda_ == pytest.approx(1.0, abs=1e-9)


def test_mu_dirichlet_pi_squared():
    res = cross_section_eigen(lambda y: np.zeros_like(y), 299, BoundaryKind.DIRICHLET, tol=1e-9)
    assert res.lambda_ == pytest.approx(np.pi**2, rel=1e-4)


def test_cross_section_mean_bound_and_monotonicity():
    # constant test function gives lambda_alpha <= -(2 alpha - 1); decreasing in alpha
    ny = 41  # hy = 1/40 puts every tested alpha on a node
    alphas = [0.1 + 0.025 * k for k in range(20)]  # 0.100, 0.125, ..., 0.575, node-aligned
    lams = []
    for alpha in alphas:
        res = cross_section_eigen(lambda y, a=alpha: mu_step(y, a), ny, BoundaryKind.NEUMANN)
        lams.append(res.lambda_)
        assert res.lambda_ <= -(2 * alpha - 1) + 1e-10
    assert all(b < a for a, b in zip(lams, lams[1:]))


def test_eigenfunction_positive():
    for seed in (1, 2, 3):
        g = build_grid(5, 1, 40, 9, BoundaryKind.NEUMANN)
        res = drift_eigen(g, smooth_profile(seed), 0.7)
        assert res.eigenfunction.values.min() > 0.0


def test_potential_monotonicity():
    # adding a nonnegative central bump strictly lowers lambda
    g = build_grid(5, 1, 60, 9, BoundaryKind.NEUMANN)
    base = smooth_profile(4)
    lam0 = drift_eigen(g, base, 0.0).lambda_
    rng = np.random.default_rng(0)
    for _ in range(20):
        amp = rng.uniform(0.3, 2.0)
        x0 = rng.uniform(-2.0, 2.0)
        w = rng.uniform(0.5, 1.5)

        def rate(X1, Y, amp=amp, x0=x0, w=w):
            return base.rate(X1, Y) + amp * np.exp(-((X1 - x0) ** 2) / w)

        bumped = GrowthProfile(rate=rate, sup_rate=base.sup_rate + amp)
        assert drift_eigen(g, bumped, 0.0).lambda_ < lam0 - 1e-8


def test_monotone_in_plateau_length():
    # lambda_L nonincreasing in L (illustration family)
    g = build_grid(12, 1, 160, 11, BoundaryKind.NEUMANN)
    lams = []
    for L in np.linspace(0.0, 6.0, 15):
        rx = make_illustration(0.3, L, -2.0)
        lams.append(drift_eigen(g, rx.growth, 1.0).lambda_)
    assert all(b <= a + 1e-10 for a, b in zip(lams, lams[1:]))


def test_rate_shift_moves_lambda_exactly():
    g = build_grid(5, 1, 40, 9, BoundaryKind.NEUMANN)
    base = smooth_profile(5)
    lam0 = drift_eigen(g, base, 0.8).lambda_
    for k in (-1.0, 0.5, 3.0):
        shifted = GrowthProfile(
            rate=lambda X1, Y, k=k: base.rate(X1, Y) + k, sup_rate=base.sup_rate + abs(k)
        )
        lam = drift_eigen(g, shifted, 0.8).lambda_
        assert lam == pytest.approx(lam0 - k, abs=1e-10)


def test_drift_shift_identity_matched_grids():
    for seed in (1, 2, 3, 4, 5):
        g = build_grid(6, 1, 200, 30, BoundaryKind.NEUMANN)
        prof = smooth_profile(seed)
        for c in (0.5, 1.0, 2.0):
            res = drift_eigen(g, prof, c, tol=1e-8)
            assert abs(res.lambda_ - res.lambda_cross) < 1e-6


def test_drift_c0_equals_plain_eigen():
    g = build_grid(5, 1, 40, 9, BoundaryKind.NEUMANN)
    prof = smooth_profile(6)
    a = drift_eigen(g, prof, 0.0).lambda_
    b = principal_eigen(assemble(g, prof, 0.0, symmetrized=True)).lambda_
    assert a == pytest.approx(b, abs=1e-12)


def test_constant_rate_drift_limit():
    # r = r0 constant, Neumann lateral: lambda -> -r0 + c^2/4 + (pi/2X)^2 correction
    r0, c = 1.5, 1.0
    prof = GrowthProfile(rate=lambda X1, Y: np.full_like(X1, r0), sup_rate=r0)
    prev_err = None
    for X in (10.0, 20.0, 40.0):
        nx = int(round(2 * X * 10)) - 1
        g = build_grid(X, 1, nx, 7, BoundaryKind.NEUMANN)
        lam = drift_eigen(g, prof, c).lambda_
        err = abs(lam - (-r0 + c * c / 4.0))
        analytic = (np.pi / (2 * X)) ** 2
        assert err == pytest.approx(analytic, rel=1e-2)
        if prev_err is not None:
            assert err < prev_err
        prev_err = err


def test_truncation_limit_constant_rate():
    r0, c = 1.5, 1.0
    prof = GrowthProfile(rate=lambda X1, Y: np.full_like(X1, r0), sup_rate=r0)
    res = truncation_limit(prof, c, [10.0, 20.0, 40.0], nodes_per_unit=10, ny=7,
                           lateral_bc=BoundaryKind.NEUMANN)
    assert isinstance(res, TruncationResult)
    assert res.monotone
    for R, lam in res.table:
        assert lam == pytest.approx(-r0 + c * c / 4 + (np.pi / (2 * R)) ** 2, abs=2e-3)
    assert res.last_gap < 1e-2


def test_truncation_needs_increasing_R():
    prof = ZERO
    with pytest.raises(ValueError):
        truncation_limit(prof, 0.0, [10.0, 5.0, 20.0], 5, 5, BoundaryKind.NEUMANN)


def test_critical_speed():
    assert critical_speed(-1.0) == pytest.approx(2.0)
    assert critical_speed(0.5) is None
    assert critical_speed(0.0) is None
    r0 = 2.3
    assert critical_speed(-r0) == pytest.approx(2 * np.sqrt(r0))


def test_peclet_guard_on_periodic_box():
    g = build_grid(5, 1, 12, 8, BoundaryKind.PERIODIC_Y, ends_bc=EndsKind.PERIODIC_X)
    with pytest.raises(AssemblyError):
        assemble(g, ZERO, 4.0, symmetrized=False)  # c*h/2 = 4*0.833/2 > 1


def test_symmetrized_periodic_x_refused():
    g = build_grid(5, 1, 12, 8, BoundaryKind.PERIODIC_Y, ends_bc=EndsKind.PERIODIC_X)
    with pytest.raises(AssemblyError):
        assemble(g, ZERO, 1.0, symmetrized=True)


def test_nonconvergence_raises():
    op = assemble_cross_section(lambda y: np.zeros_like(y), 49, BoundaryKind.DIRICHLET)
    with pytest.raises(ConvergenceError):
        principal_eigen(op, tol=1e-9, max_iter=1)


def test_2d_eigenvalue_splits_for_separable_potential():
    # r(x, y) = rho(x) + mu(y): the tensor assembly makes the 2D eigenvalue
    # exactly the sum of the two 1D ones; independent oracle for the whole
    # 2D path (x from a constant-in-y run, y from the cross-section solver)
    rx = make_illustration(0.3, 3.0, -2.0)
    c, ny = 1.0, 21
    grid2d = build_grid(12, 1, 199, ny, BoundaryKind.NEUMANN)
    lam_2d = drift_eigen(grid2d, rx.growth, c, tol=1e-10).lambda_

    rho_only = GrowthProfile(
        rate=lambda X1, Y: rx.growth.rate(X1, np.zeros_like(Y) + 0.1) - 1.0,  # mu(0.1) = +1
        sup_rate=rx.growth.sup_rate,
    )
    gx = build_grid(12, 1, 199, 3, BoundaryKind.NEUMANN)
    lam_x = drift_eigen(gx, rho_only, c, tol=1e-10).lambda_
    lam_y = cross_section_eigen(lambda y: mu_step(y, 0.3), ny, BoundaryKind.NEUMANN, tol=1e-10).lambda_
    assert lam_2d == pytest.approx(lam_x + lam_y, abs=1e-8)


def test_drift_eigen_periodic_lateral():
    g = build_grid(8, 1, 119, 10, BoundaryKind.PERIODIC_Y)
    prof = smooth_profile(7)
    res = drift_eigen(g, prof, 1.2, tol=1e-9)
    assert abs(res.lambda_ - res.lambda_cross) < 1e-7
    assert res.eigenfunction.values.min() > 0


def test_drift_eigenfunction_satisfies_nonsymmetric_equation():
    # the returned eigenfunction is phi_sym * e^{-c x/2}; it must solve the
    # assembled drift operator's eigenproblem directly
    g = build_grid(8, 1, 159, 11, BoundaryKind.NEUMANN)
    prof = smooth_profile(9)
    c = 1.3
    res = drift_eigen(g, prof, c, tol=1e-10)
    A = assemble(g, prof, c, symmetrized=False).matrix
    v = res.eigenfunction.values.reshape(-1)
    defect = np.linalg.norm(A @ v - res.lambda_ * v) / np.linalg.norm(v)
    assert defect < 1e-7
