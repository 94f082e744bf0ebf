from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonic_bounds.core_model import (
    BondWeights,
    PhasePoint,
    PhysicalConstants,
    SingularConfigurationError,
    SystemKind,
    SystemSpec,
    classical_energy,
    graph_identity_check,
    pair_terms,
    random_phase_point,
    reduce,
)

KINDS = list(SystemKind)


def test_reduce_coulomb():
    red = reduce(SystemSpec("CoulombAtom", 3))
    assert (red.kinetic_coeff, red.central_coeff, red.pair_coeff) == (0.5, 3.0, 1.0)
    assert red.pair_kinetic_coeff == 0.0


def test_reduce_fixed_grain():
    red = reduce(SystemSpec("NewtonFixedGrain", 4, mass_ratio=1.0))
    assert (red.kinetic_coeff, red.central_coeff, red.pair_coeff) == (0.5, 1.0, -1.0)


def test_reduce_intrinsic():
    red = reduce(SystemSpec("NewtonIntrinsic", 2))
    assert red.pair_kinetic_coeff == 0.25
    assert red.pair_coeff == -1.0
    assert red.central_coeff == 0.0 and red.kinetic_coeff == 0.0


def test_pair_rescale_divides_pair_coupling():
    red = reduce(SystemSpec("NewtonFixedGrain", 5, mass_ratio=0.5, pair_rescale=True))
    assert red.pair_coeff == pytest.approx(-0.5 / 4)


def test_units_round_trip():
    c = PhysicalConstants(hbar=2.0, m=3.0, e=0.5, G=7.0)
    red = reduce(SystemSpec("CoulombAtom", 2, z=2, constants=c))
    ze2 = 4 * 0.25
    assert red.to_physical(1.0) == pytest.approx(3.0 * ze2**2 / 4.0)
    assert red.length_unit == pytest.approx(4.0 / (3.0 * ze2))
    red = reduce(SystemSpec("NewtonIntrinsic", 2, constants=c))
    assert red.energy_unit == pytest.approx(49.0 * 3.0**5 / 4.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="CoulombAtom", N=0),
        dict(kind="CoulombAtom", N=2, z=0),
        dict(kind="NewtonFixedGrain", N=2, mass_ratio=0.0),
        dict(kind="NewtonIntrinsic", N=1),
        dict(kind="Nonsense", N=2),
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ValueError):
        SystemSpec(**kwargs)


def test_classical_energy_hand_values():
    red = reduce(SystemSpec("CoulombAtom", 1))
    assert classical_energy(red, PhasePoint(np.zeros(3), [1.0, 0, 0])) == -1.0

    # fixed grain, beta = 1: two central terms of -1 each and a pair term -1/2
    red = reduce(SystemSpec("NewtonFixedGrain", 2))
    x = PhasePoint(np.zeros((2, 3)), [[1.0, 0, 0], [-1.0, 0, 0]])
    assert classical_energy(red, x) == -2.5


def test_intrinsic_pair_term_hand_value():
    red = reduce(SystemSpec("NewtonIntrinsic", 2))
    x = PhasePoint([[0.5, 0, 0], [-0.5, 0, 0]], [[0, 0, 0], [1.0, 0, 0]])
    terms = pair_terms(red, x)
    assert terms == {(0, 1): pytest.approx(-0.75, abs=1e-15)}


def test_two_body_decomposition_is_termwise():
    red = reduce(SystemSpec("CoulombAtom", 2))
    x = random_phase_point(np.random.default_rng(3), 2)
    (only,) = pair_terms(red, x).values()
    assert only == pytest.approx(classical_energy(red, x), rel=1e-15)


def test_singular_configuration_raises():
    red = reduce(SystemSpec("NewtonFixedGrain", 2))
    with pytest.raises(SingularConfigurationError):
        classical_energy(red, PhasePoint(np.zeros((2, 3)), [[1.0, 0, 0], [1.0, 0, 0]]))
    red = reduce(SystemSpec("CoulombAtom", 1))
    with pytest.raises(SingularConfigurationError):
        classical_energy(red, PhasePoint(np.zeros(3), np.zeros(3)))


def test_phase_point_size_mismatch():
    red = reduce(SystemSpec("CoulombAtom", 3))
    with pytest.raises(ValueError):
        classical_energy(red, PhasePoint(np.zeros((2, 3)), np.ones((2, 3))))


def test_random_phase_point_respects_constraints():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = random_phase_point(rng, 6)
        assert np.all(np.linalg.norm(x.q, axis=1) <= 4.0)
        d = np.linalg.norm(x.q[:, None] - x.q[None], axis=-1)
        assert d[np.triu_indices(6, 1)].min() >= 1e-3


def _decomposition_error(spec: SystemSpec, x: PhasePoint) -> float:
    red = reduce(spec)
    h = classical_energy(red, x)
    total = math.fsum(pair_terms(red, x).values())
    return abs(total - h) / abs(h)


@settings(max_examples=200, deadline=None)
@given(
    kind=st.sampled_from(KINDS),
    N=st.integers(2, 10),
    seed=st.integers(0, 2**32 - 1),
    rescale=st.booleans(),
)
def test_pair_decomposition_property(kind, N, seed, rescale):
    spec = SystemSpec(kind, N, pair_rescale=rescale)
    x = random_phase_point(np.random.default_rng(seed), N)
    red = reduce(spec)
    h = classical_energy(red, x)
    terms = pair_terms(red, x)
    scale = math.fsum(abs(t) for t in terms.values())
    assert abs(math.fsum(terms.values()) - h) <= 1e-12 * scale


@pytest.mark.parametrize("kind", KINDS)
def test_pair_decomposition_relative_to_energy(kind):
    # on well-separated points |H| is not small, so the bound can be stated against it
    rng = np.random.default_rng(11)
    for N in range(2, 11):
        for _ in range(20):
            x = random_phase_point(rng, N)
            h = classical_energy(reduce(SystemSpec(kind, N)), x)
            if abs(h) > 1e-3:
                assert _decomposition_error(SystemSpec(kind, N), x) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(kind=st.sampled_from(KINDS), N=st.integers(2, 8), seed=st.integers(0, 2**32 - 1))
def test_classical_energy_permutation_invariant(kind, N, seed):
    rng = np.random.default_rng(seed)
    red = reduce(SystemSpec(kind, N))
    x = random_phase_point(rng, N)
    perm = rng.permutation(N)
    assert classical_energy(red, x.permuted(perm)) == pytest.approx(classical_energy(red, x), rel=1e-13, abs=1e-13)


def test_graph_identity_examples():
    assert graph_identity_check(BondWeights.from_function(3, lambda k, l: 1)) == (3, 3)
    lhs, rhs = graph_identity_check(BondWeights.from_function(4, lambda k, l: k + l))
    assert lhs == rhs == 30


@settings(max_examples=100, deadline=None)
@given(
    N=st.integers(3, 8),
    data=st.data(),
)
def test_graph_identity_exact_for_random_rationals(N, data):
    fr = st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6)
    w = {(k, l): data.draw(fr) for k in range(1, N + 1) for l in range(k + 1, N + 1)}
    lhs, rhs = graph_identity_check(BondWeights(N, w))
    assert isinstance(lhs, Fraction) and isinstance(rhs, Fraction)
    assert lhs == rhs


def test_graph_identity_needs_three_vertices():
    with pytest.raises(ValueError):
        graph_identity_check(BondWeights.from_function(2, lambda k, l: 1))


def test_bond_weights_must_cover_all_pairs():
    with pytest.raises(ValueError):
        BondWeights(3, {(1, 2): 1, (1, 3): 1})
