from __future__ import annotations

import numpy as np
import pytest

from bosonic_bounds.two_body_variational import (
    ConditioningError,
    HylleraasBasis,
    assemble,
    basis_indices,
    convergence_study,
    golden_section,
    intrinsic_pair_energy,
    simplex_quadrature,
    smallest_generalized_eigenpair,
    solve_two_body,
)


def test_quadrature_volume_integral():
    # int exp(-2 s) r1 r2 r12 over the triangle domain equals 1/8 exactly
    # x-degree 4 in the measure needs at least 3 Legendre points
    for order in (3, 4, 10):
        rule = simplex_quadrature(order, order, alpha=1.0)
        assert rule.integrate(np.ones_like(rule.weights)) == pytest.approx(0.125, rel=1e-13)


def test_quadrature_against_brute_force_grid():
    # midpoint grid in (s, x, y) with the same change of variables: independent of Gauss nodes
    n = 200
    s = (np.arange(4 * n) + 0.5) * (40.0 / (4 * n))
    x = (np.arange(n) + 0.5) / n
    y = -1 + (np.arange(n) + 0.5) * (2.0 / n)
    S, X, Y = np.meshgrid(s, x, y, indexing="ij", sparse=True)
    r12 = S * X
    f = np.exp(-2 * S) * S**5 * X**2 * (1 - X**2 * Y**2) / 8 * r12**2
    brute = f.sum() * (40.0 / (4 * n)) * (1.0 / n) * (2.0 / n)
    rule = simplex_quadrature(6, 6)
    gauss = rule.integrate(rule.r12**2)
    assert gauss == pytest.approx(brute, rel=1e-4)


def test_quadrature_weights_positive():
    rule = simplex_quadrature(8, 8, alpha=1.7)
    assert np.all(rule.weights > 0)
    assert np.all(rule.r12 <= rule.r1 + rule.r2 + 1e-12)
    assert np.all(rule.r12 >= np.abs(rule.r1 - rule.r2) - 1e-12)


def test_quadrature_orders_validated():
    with pytest.raises(ValueError):
        simplex_quadrature(1, 4)


def test_basis_nesting_and_size():
    for om in range(8):
        small, big = basis_indices(om), basis_indices(om + 1)
        assert big[: len(small)] == small
    assert len(basis_indices(0)) == 1
    assert all(l + 2 * m + n <= 5 for l, m, n in basis_indices(5))


def test_basis_is_symmetric_under_exchange():
    b = HylleraasBasis(1.3, 4)
    r1, r2, r12 = np.array([0.3, 1.1]), np.array([0.9, 0.2]), np.array([0.8, 1.0])
    assert np.allclose(b.evaluate(r1, r2, r12), b.evaluate(r2, r1, r12))


def test_separable_single_function():
    H, S = assemble(HylleraasBasis(1.0, 0), 1.0, 0.0)
    assert H[0, 0] / S[0, 0] == pytest.approx(-1.0, abs=1e-8)


def test_single_exponential_helium_like():
    # E(alpha) = alpha^2 - 2 Z alpha + 5/8 alpha, minimized at alpha = Z - 5/16
    sol = solve_two_body(2.0, 1.0, 0)
    assert sol.energy == pytest.approx(-((27 / 16) ** 2), abs=1e-6)
    assert sol.basis.alpha == pytest.approx(27 / 16, abs=1e-3)
    assert abs(sol.energy + 2.84766) < 1e-4


def test_generalized_eigenpair_diagonal():
    E, c = smallest_generalized_eigenpair(np.diag([1.0, 2.0]), np.eye(2))
    assert E == 1.0
    assert np.allclose(c, [1.0, 0.0])


def test_generalized_eigenpair_constructed_spectrum():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    Xinv = np.linalg.inv(X)
    lam = np.array([-1.5, 0.25, 2.0])
    H = Xinv.T @ np.diag(lam) @ Xinv
    S = Xinv.T @ Xinv
    H, S = 0.5 * (H + H.T), 0.5 * (S + S.T)
    E, c = smallest_generalized_eigenpair(H, S)
    assert E == pytest.approx(-1.5, rel=1e-12)
    assert c @ S @ c == pytest.approx(1.0)
    assert np.linalg.norm(H @ c - E * S @ c) <= 1e-10 * np.linalg.norm(H @ c)


def test_generalized_eigenpair_rejects_near_singular():
    rng = np.random.default_rng(2)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    S = Q @ np.diag([1.0, 1.0, 1.0, 1e-12]) @ Q.T
    S = 0.5 * (S + S.T)
    with pytest.raises(ConditioningError) as info:
        smallest_generalized_eigenpair(np.eye(4), S)
    assert info.value.basis_size == 4


def test_generalized_eigenpair_is_deterministic():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(5, 5))
    H = A + A.T
    S = A @ A.T + 5 * np.eye(5)
    a = smallest_generalized_eigenpair(H, S)
    b = smallest_generalized_eigenpair(H, S)
    assert a[0] == b[0] and np.array_equal(a[1], b[1])


def test_golden_section_parabola():
    x, fx = golden_section(lambda t: (t - 1.234) ** 2, 0.0, 3.0, 1e-8)
    assert x == pytest.approx(1.234, abs=1e-7)


def test_fixed_alpha_monotone_in_omega():
    energies = [solve_two_body(2.0, 1.0, om, optimize_alpha=False, alpha=1.8).energy for om in range(9)]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_helium_like_convergence():
    study = convergence_study(2.0, 1.0, [7, 8])
    sol = study.solutions[-1]
    assert sol.energy <= -2.9030
    assert study.last_change < 2e-4
    assert sol.virial_residual < 1e-3
    assert study.failure is None


def test_separable_limit_approaches_minus_z_squared():
    for Z in (1.0, 2.0):
        sol = solve_two_body(Z, 0.0, 2)
        assert sol.energy == pytest.approx(-Z * Z, rel=1e-8)


def test_attractive_pair_below_separable():
    sol = solve_two_body(1.0, -1.0, 4)
    assert sol.energy < -1.0


def test_energy_nonincreasing_as_coupling_decreases():
    basis = HylleraasBasis(1.2, 3)
    previous = np.inf
    for lam in (1.0, 0.5, 0.0, -0.5, -1.0, -2.0):
        H, S = assemble(basis, 1.0, lam)
        E, _ = smallest_generalized_eigenpair(H, S, max_condition=1e14)
        assert E <= previous + 1e-12
        previous = E


def test_quadrature_doubling_is_converged():
    for om in (2, 5, 8):
        a = solve_two_body(2.0, 1.0, om, optimize_alpha=False, alpha=1.8).energy
        o = om + 4
        b = solve_two_body(2.0, 1.0, om, optimize_alpha=False, alpha=1.8, order_s=2 * o, order_inner=2 * o).energy
        assert abs(a - b) < 1e-8


def test_intrinsic_pair_energy_exact():
    assert intrinsic_pair_energy(0).energy == pytest.approx(-0.25, abs=1e-5)
    assert intrinsic_pair_energy(2).energy == pytest.approx(-0.25, abs=1e-5)


def test_strong_attraction_slides_alpha_bracket():
    sol = solve_two_body(1.0, -2.0, 4)
    assert sol.virial_residual < 1e-3
    assert sol.energy < -2.9


def test_invalid_central_strength():
    with pytest.raises(ValueError):
        solve_two_body(0.0, 1.0, 0)
