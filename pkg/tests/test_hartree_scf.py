from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonic_bounds.core_model import SystemSpec
from bosonic_bounds.hartree_scf import (
    HartreeFunctionalCoeffs,
    RadialGrid,
    RadialOrbital,
    SCFConvergenceError,
    bisect_lowest,
    evaluate_forms,
    functional_coeffs,
    functional_value,
    hartree_energy,
    hartree_potential,
    hartree_upper_bound,
    limiting_coeffs,
    lowest_eigenpair,
    rescale,
    scf_solve,
    sturm_count,
)

GRID = RadialGrid()


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(40.0, 101)
    with pytest.raises(ValueError):
        RadialGrid(-1.0, 100)
    assert RadialGrid(40.0, 100).refined().n == 200


def test_hydrogen_forms():
    f = evaluate_forms(RadialOrbital.hydrogenic(GRID))
    assert f.kinetic == pytest.approx(1.0, rel=1e-7)
    assert f.central == pytest.approx(1.0, rel=1e-7)
    assert f.pair == pytest.approx(5 / 8, rel=1e-7)


def test_pair_form_matches_double_radial_sum():
    # brute-force 1/max(r, r') double integral on a coarse grid
    grid = RadialGrid(30.0, 1500)
    orb = RadialOrbital.from_function(grid, lambda r: (1 + r) * np.exp(-1.3 * r))
    r = grid.r
    rho = 4 * np.pi * orb.u**2
    w = np.full_like(r, grid.h)
    w[0] = w[-1] = grid.h / 2
    rm = np.maximum(r[:, None], r[None, :])
    rm[0, 0] = 1.0
    kernel = 1.0 / rm
    brute = (rho * w) @ kernel @ (rho * w)
    assert evaluate_forms(orb).pair == pytest.approx(brute, rel=1e-4)


def test_hartree_potential_outside_is_coulombic():
    orb = RadialOrbital.hydrogenic(GRID)
    phi = hartree_potential(orb)
    r = GRID.r
    far = r > 30
    assert np.allclose(phi[far], 1.0 / r[far], rtol=1e-10)
    # value at the origin is <1/r> = 1 for the 1s density
    assert phi[0] == pytest.approx(1.0, rel=1e-7)


def test_constant_orbital_has_no_interior_gradient():
    grid = RadialGrid(40.0, 2000)
    f = evaluate_forms(RadialOrbital.from_function(grid, lambda r: np.ones_like(r)))
    assert abs(f.kinetic) < 1e-10


def test_unnormalized_orbital_rejected():
    u = 2 * RadialOrbital.hydrogenic(GRID).u
    with pytest.raises(ValueError):
        evaluate_forms(RadialOrbital(GRID, u))


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.3, 4.0), a=st.floats(0.5, 2.0))
def test_scaling_law(lam, a):
    grid = RadialGrid(40.0, 4000)
    orb = RadialOrbital.from_function(grid, lambda r: (1 + 0.5 * r) * np.exp(-a * r))
    f = evaluate_forms(orb)
    g = evaluate_forms(rescale(orb, lam))
    assert g.kinetic == pytest.approx(lam**2 * f.kinetic, rel=1e-10)
    assert g.central == pytest.approx(lam * f.central, rel=1e-10)
    assert g.pair == pytest.approx(lam * f.pair, rel=1e-10)


def test_rescale_identity_and_norm():
    orb = RadialOrbital.hydrogenic(GRID)
    same = rescale(orb, 1.0)
    assert np.array_equal(same.u, orb.u) and same.grid == orb.grid
    assert rescale(orb, 2.0).norm == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        rescale(orb, 0.0)


def test_functional_coeffs_examples():
    assert functional_coeffs(SystemSpec("CoulombAtom", 2)) == HartreeFunctionalCoeffs(1.0, -4.0, 1.0)
    assert functional_coeffs(SystemSpec("NewtonFixedGrain", 3)) == HartreeFunctionalCoeffs(1.5, -3.0, -3.0)
    assert limiting_coeffs("CoulombAtom") == HartreeFunctionalCoeffs(0.5, -1.0, 0.5)
    assert limiting_coeffs("NewtonIntrinsic") == HartreeFunctionalCoeffs(0.5, 0.0, -0.5)


def test_functional_coeffs_rescaled_pair():
    c = functional_coeffs(SystemSpec("NewtonFixedGrain", 5, mass_ratio=1.0, pair_rescale=True))
    assert c.c_I == pytest.approx(-10 / 4)


def test_sturm_bisection_matches_lapack():
    rng = np.random.default_rng(4)
    diag = rng.normal(size=60)
    off = rng.normal(size=59)
    exact = np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
    assert sturm_count(diag, off, exact[0] - 1e-9) == 0
    assert sturm_count(diag, off, exact[3] + 1e-9) == 4
    assert bisect_lowest(diag, off) == pytest.approx(exact[0], abs=1e-10)
    assert lowest_eigenpair(diag, off)[0] == pytest.approx(exact[0], abs=1e-12)


def test_pure_hydrogen_scf():
    res = scf_solve(HartreeFunctionalCoeffs(0.5, -1.0, 0.0))
    assert res.energy == pytest.approx(-0.5, rel=1e-6)
    overlap = 4 * np.pi * np.sum(res.orbital.u * RadialOrbital.hydrogenic(res.orbital.grid).u) * res.orbital.grid.h
    assert overlap == pytest.approx(1.0, abs=1e-6)


def test_energy_trace_nonincreasing():
    res = scf_solve(functional_coeffs(SystemSpec("CoulombAtom", 3)))
    trace = np.array(res.energy_trace)
    assert np.all(np.diff(trace) <= 1e-9 * np.abs(trace[1:]))


@pytest.mark.parametrize(
    "coeffs",
    [
        limiting_coeffs("CoulombAtom"),
        limiting_coeffs("NewtonIntrinsic"),
        functional_coeffs(SystemSpec("NewtonFixedGrain", 4, mass_ratio=0.5)),
        functional_coeffs(SystemSpec("CoulombAtom", 20)),
    ],
)
def test_virial_at_fixed_point(coeffs):
    res = scf_solve(coeffs)
    assert res.virial_residual < 1e-4
    assert res.energy == pytest.approx(functional_value(coeffs, res.orbital), rel=1e-12)


@pytest.mark.slow
def test_grid_refinement_limits():
    for coeffs in (limiting_coeffs("CoulombAtom"), limiting_coeffs("NewtonIntrinsic")):
        a = scf_solve(coeffs, RadialGrid(40.0, 8000)).energy
        b = scf_solve(coeffs, RadialGrid(40.0, 16000)).energy
        assert abs(a - b) < 1e-6


def test_limits_in_expected_ranges():
    coulomb = scf_solve(limiting_coeffs("CoulombAtom")).energy
    assert -0.5 < coulomb < 0
    assert scf_solve(limiting_coeffs("NewtonIntrinsic")).energy < 0


def test_upper_bound_n1_is_hydrogen():
    est = hartree_upper_bound(SystemSpec("CoulombAtom", 1), RadialOrbital.hydrogenic(GRID))
    assert est.bound_kind == "upper"
    assert est.value == pytest.approx(-0.5, rel=1e-6)


def test_fixed_grain_three_bodies_negative():
    est, _ = hartree_energy(SystemSpec("NewtonFixedGrain", 3))
    assert est.value <= 0


def test_max_iter_exhaustion_reports_trace():
    with pytest.raises(SCFConvergenceError) as info:
        scf_solve(limiting_coeffs("CoulombAtom"), max_iter=2)
    assert len(info.value.energy_trace) >= 1


def test_result_unpacks():
    E, phi = scf_solve(HartreeFunctionalCoeffs(0.5, -1.0, 0.0))
    assert isinstance(phi, RadialOrbital) and E < 0
