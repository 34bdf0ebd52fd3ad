import dataclasses
import math
import warnings

import numpy as np
import pytest

import llgwire as lw
from llgwire.spectral import _sturm_count, apply_operator, block_matrix, dense_matrix


def _free_solution(grid, h0):
    from llgwire.stationary import _assemble

    zeros = np.zeros(grid.node_count)
    return _assemble(h0, grid, zeros, zeros)


def test_operator_assembly(sol_p01):
    op1 = lw.build_operator(sol_p01, "L1")
    op2 = lw.build_operator(sol_p01, "L2")
    dx2 = sol_p01.grid.dx**2
    assert op1.offdiag == -1.0 / dx2
    assert np.allclose(op1.diagonal, 2.0 / dx2 + op1.potential, atol=0, rtol=0)
    theta = sol_p01.theta.values[1:-1]
    expected_gap = -2.0 * 0.1 * (1.0 - np.cos(theta))
    assert np.abs((op2.potential - op1.potential) - expected_gap).max() <= 1e-15
    with pytest.raises(ValueError):
        lw.build_operator(sol_p01, "L3")


def test_potential_limits(sol_p01):
    op = lw.build_operator(sol_p01, "L1")
    floor = 1.0 + 0.1
    bound = 20.0 * math.exp(-math.sqrt(1.1) * 15.0)
    assert abs(op.potential[0] - floor) <= bound
    assert abs(op.potential[-1] - floor) <= bound


def test_free_case_matches_dirichlet_box(grid151):
    h0 = 0.1
    sol = _free_solution(grid151, h0)
    report = lw.lowest_eigenpairs(lw.build_operator(sol, "L1"), 2)
    exact = 1.0 + h0 + (math.pi / 30.0) ** 2
    assert report.eigenvalues[0] == pytest.approx(exact, rel=2.0 * 0.2**2)


def test_low_spectrum_h0_positive(grid151, sol_p01):
    tol = 5.0 * grid151.dx**2
    r1 = lw.lowest_eigenpairs(lw.build_operator(sol_p01, "L1"), 3)
    assert abs(r1.eigenvalues[0]) <= tol
    dth = sol_p01.dtheta.values
    v = r1.eigenfunctions[0].values
    align = abs(np.dot(v, dth)) / (np.linalg.norm(v) * np.linalg.norm(dth))
    assert align >= 0.999

    r2 = lw.lowest_eigenpairs(lw.build_operator(sol_p01, "L2"), 3)
    gamma2 = r2.eigenvalues[0]
    assert -0.4 <= gamma2 < 0.0
    assert abs(r2.eigenvalues[1]) <= tol
    sth = np.sin(sol_p01.theta.values)
    v2 = r2.eigenfunctions[1].values
    align2 = abs(np.dot(v2, sth)) / (np.linalg.norm(v2) * np.linalg.norm(sth))
    assert align2 >= 0.999
    # exactly one eigenvalue beyond the kernel tolerance
    assert (r2.eigenvalues < -tol).sum() == 1
    assert r2.eigenvalues[2] > tol


def test_low_spectrum_h0_negative(grid151, sol_n05):
    tol = 5.0 * grid151.dx**2
    r1 = lw.lowest_eigenpairs(lw.build_operator(sol_n05, "L1"), 3)
    gamma1 = r1.eigenvalues[0]
    assert -2.0 <= gamma1 < 0.0
    assert abs(r1.eigenvalues[1]) <= tol
    dth = sol_n05.dtheta.values
    v = r1.eigenfunctions[1].values
    align = abs(np.dot(v, dth)) / (np.linalg.norm(v) * np.linalg.norm(dth))
    assert align >= 0.999
    if abs(gamma1) > 4.0 * 0.5:
        warnings.warn(f"negative-mode magnitude {abs(gamma1):.3f} exceeds 4|h0|")

    r2 = lw.lowest_eigenpairs(lw.build_operator(sol_n05, "L2"), 3)
    assert abs(r2.eigenvalues[0]) <= tol
    assert r2.eigenvalues[1] > tol


@pytest.mark.parametrize("h0", (0.05, 0.1, 0.5, 1.0, 10.0))
def test_unstable_mode_exists_positive(grid151, h0):
    sol = lw.solve_theta(h0, grid151)
    report = lw.lowest_eigenpairs(lw.build_operator(sol, "L2"), 1)
    assert report.eigenvalues[0] < 0.0


@pytest.mark.parametrize("h0", (-0.1, -0.5, -0.9))
def test_unstable_mode_exists_negative(grid151, h0):
    sol = lw.solve_theta(h0, grid151)
    report = lw.lowest_eigenpairs(lw.build_operator(sol, "L1"), 1)
    gamma1 = report.eigenvalues[0]
    assert gamma1 < 0.0
    if abs(gamma1) > 4.0 * abs(h0):
        warnings.warn(f"h0={h0}: negative-mode magnitude exceeds 4|h0|")


def test_eigenpairs_sorted_orthonormal_residuals(sol_p01):
    op = lw.build_operator(sol_p01, "L2")
    report = lw.lowest_eigenpairs(op, 5)
    ev = report.eigenvalues
    assert np.all(np.diff(ev) >= 0.0)
    vecs = np.stack([f.values for f in report.eigenfunctions])
    gram = vecs @ vecs.T * sol_p01.grid.dx
    assert np.abs(gram - np.eye(5)).max() <= 1e-10
    for lam, f, res in zip(ev, report.eigenfunctions, report.eigen_residuals):
        v = f.values[1:-1]
        assert np.linalg.norm(apply_operator(op, v) - lam * v) <= 1e-8 * np.linalg.norm(v)
        assert res <= 1e-8
    assert report.essential_spectrum_floor == pytest.approx(1.1)


def test_k_bounds(sol_p01):
    op = lw.build_operator(sol_p01, "L1")
    with pytest.raises(ValueError):
        lw.lowest_eigenpairs(op, 0)
    with pytest.raises(ValueError):
        lw.lowest_eigenpairs(op, 9)


def test_sturm_count_monotone(sol_p01):
    op = lw.build_operator(sol_p01, "L1")
    offsq = op.offdiag**2
    rng = np.random.default_rng(11)
    sigmas = np.sort(rng.uniform(-1.0, 10.0, size=12))
    counts = [_sturm_count(op.diagonal, offsq, s) for s in sigmas]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_domain_truncation_insensitive():
    h0 = 0.1
    vals = {}
    for L in (15.0, 30.0):
        g = lw.make_grid(L, 0.2)
        sol = lw.solve_theta(h0, g)
        vals[L] = lw.lowest_eigenpairs(lw.build_operator(sol, "L2"), 2).eigenvalues
    budget = math.exp(-math.sqrt(1.1) * 15.0) + 5.0 * 0.2**2
    assert np.abs(vals[15.0] - vals[30.0]).max() <= budget


def test_eigenvalue_second_order_in_dx():
    h0 = 0.1
    lam = {}
    for dx in (0.2, 0.1, 0.05):
        g = lw.make_grid(15.0, dx)
        sol = lw.solve_theta(h0, g)
        lam[dx] = lw.lowest_eigenpairs(lw.build_operator(sol, "L2"), 1).eigenvalues[0]
    extrap = lam[0.05] + (lam[0.05] - lam[0.1]) / 3.0
    ratio = (lam[0.2] - extrap) / (lam[0.1] - extrap)
    assert 3.2 <= ratio <= 4.8


def test_kernel_residuals(grid151, sol_p01):
    op1 = lw.build_operator(sol_p01, "L1")
    op2 = lw.build_operator(sol_p01, "L2")
    sth = lw.ScalarField(grid151, np.sin(sol_p01.theta.values))
    assert lw.kernel_residual(op1, sol_p01.dtheta) <= 0.02
    assert lw.kernel_residual(op2, sth) <= 0.02
    assert lw.kernel_residual(op2, sol_p01.dtheta) >= 0.05
    with pytest.raises(ValueError):
        lw.kernel_residual(op1, lw.ScalarField(grid151, np.zeros(151)))


def test_linearized_kernel_and_rays(grid151, sol_p01):
    report = lw.linearized_spectrum(sol_p01, 1.0, 6)
    assert max(report.kernel_residuals) <= 5.0 * grid151.dx**2
    # complex eigenvalues appear in conjugate pairs
    for lam in report.eigenvalues:
        if abs(lam.imag) > 1e-10:
            assert np.any(np.abs(report.eigenvalues - lam.conjugate()) <= 1e-8)
    # the negative-real-part count is reported, never asserted
    assert isinstance(report.negative_real_count, int)
    # essential-spectrum rays: large eigenvalues cluster on Im/Re = +/- 1/alpha
    # beyond real part ~ alpha (1 + h0)
    alpha = 1.0
    full = np.linalg.eigvals(block_matrix(sol_p01, alpha))
    far = full[full.real > 3.0 * alpha * 1.1]
    assert far.size > 0
    assert np.abs(np.abs(far.imag / far.real) - 1.0 / alpha).max() <= 0.05
    assert full.real[np.abs(full.imag) > 0.2].min() >= alpha * 1.1 * 0.9


def test_linearized_unstable_eigenvalue_matches_gradient_rate(sol_p01):
    # at alpha = 2 the most negative real part doubles the alpha = 1 value
    r1 = lw.linearized_spectrum(sol_p01, 1.0, 4)
    r2 = lw.linearized_spectrum(sol_p01, 2.0, 4)
    m1 = min(r1.eigenvalues.real)
    m2 = min(r2.eigenvalues.real)
    assert m2 == pytest.approx(2.0 * m1, rel=0.02)


def test_linearized_validation(sol_p01):
    with pytest.raises(ValueError):
        lw.linearized_spectrum(sol_p01, 0.0, 4)
    big = lw.make_grid(40.0, 0.2)
    sol_big = lw.solve_theta(0.1, big)
    with pytest.raises(ValueError, match="dense"):
        lw.linearized_spectrum(sol_big, 1.0, 4)


def test_dense_matrix_symmetric(sol_p01):
    a = dense_matrix(lw.build_operator(sol_p01, "L1"))
    assert np.abs(a - a.T).max() == 0.0
