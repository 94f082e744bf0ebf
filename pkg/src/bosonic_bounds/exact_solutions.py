"""Closed-form ground-state energies and the two-body reduction."""

from __future__ import annotations

from dataclasses import dataclass

from .core_model import PhysicalConstants, SystemKind, SystemSpec, reduce


@dataclass(frozen=True)
class HydrogenicProblem:
    """H = |p|^2 / (2 mu) - gamma / |q| with hbar = 1."""

    effective_mass: float
    attraction_strength: float

    def __post_init__(self):
        if not self.effective_mass > 0 or not self.attraction_strength > 0:
            raise ValueError("effective mass and attraction strength must be positive")


def hydrogenic_energy(pb: HydrogenicProblem) -> float:
    return -0.5 * pb.effective_mass * pb.attraction_strength**2


def reduce_two_body_intrinsic() -> HydrogenicProblem:
    """Relative-coordinate problem of the intrinsic two-body star.

    With q = q1 - q2 and p = (p1 - p2)/2 the intrinsic Hamiltonian
    |p1 - p2|^2/4 - 1/|q| becomes |p|^2 - 1/|q|, i.e. reduced mass 1/2.
    """
    return HydrogenicProblem(effective_mass=0.5, attraction_strength=1.0)


def intrinsic_two_body_energy(spec: SystemSpec | None = None) -> float:
    """Exact E(2;0) in units of G^2 m^5 / hbar^2, or physical units if ``spec`` is given."""
    e = hydrogenic_energy(reduce_two_body_intrinsic())
    if spec is None:
        return e
    if spec.kind is not SystemKind.NEWTON_INTRINSIC or spec.N != 2:
        raise ValueError("exact value is known only for the intrinsic two-body star")
    return reduce(spec).to_physical(e)


def one_body_grain_energy(spec: SystemSpec) -> float:
    """E(1;M) = -G^2 M^2 m^3 / (2 hbar^2), returned in physical units."""
    if spec.kind is not SystemKind.NEWTON_FIXED_GRAIN:
        raise ValueError("one-body grain energy applies to NewtonFixedGrain")
    red = reduce(spec.with_N(1))
    return red.to_physical(hydrogenic_energy(HydrogenicProblem(1.0, red.central_coeff)))


def two_newt_seed(mass_ratio: float, constants: PhysicalConstants | None = None) -> SystemSpec:
    """Two-body grain problem with grain mass M/2 and constant 2G.

    The central coupling 2G (M/2) m = GMm is unchanged and the pair coupling
    2G m^2 doubles, so the reduced coefficients are a_C = 1, a_I = -2 m/M and
    the energy unit G^2 M^2 m^3 / hbar^2 equals that of the original system.
    """
    if not mass_ratio > 0:
        raise ValueError("mass_ratio must be positive")
    c = constants or PhysicalConstants()
    doubled = PhysicalConstants(hbar=c.hbar, m=c.m, e=c.e, G=2.0 * c.G)
    return SystemSpec(SystemKind.NEWTON_FIXED_GRAIN, N=2, mass_ratio=2.0 * mass_ratio, constants=doubled)
