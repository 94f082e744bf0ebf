"""Hamiltonian families, their dimensionless form, and classical evaluation.

Three families are supported:

* ``CoulombAtom``: N bosons of charge ze around a fixed nucleus of charge Nze.
* ``NewtonFixedGrain``: N gravitating bosons of mass m around a fixed grain of
  mass M (``mass_ratio`` is m/M).
* ``NewtonIntrinsic``: the translation-invariant star with the centre of mass
  removed, written as a sum over pairs of relative kinetic and Newton terms.

Every family is reduced to units in which all coefficients are O(1); the
classical Hamiltonian is then ``sum_k (a_K |p_k|^2 - a_C/|q_k|)
+ sum_{k<l} (b_K |p_k - p_l|^2 + a_I/|q_k - q_l|)``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np


class SystemKind(str, enum.Enum):
    COULOMB_ATOM = "CoulombAtom"
    NEWTON_FIXED_GRAIN = "NewtonFixedGrain"
    NEWTON_INTRINSIC = "NewtonIntrinsic"


class SingularConfigurationError(ValueError):
    """A 1/|q| term was evaluated at a coincident or central point."""


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants used only to convert dimensionless results back to physical units."""

    hbar: float = 1.0
    m: float = 1.0
    e: float = 1.0
    G: float = 1.0


@dataclass(frozen=True)
class SystemSpec:
    kind: SystemKind
    N: int
    z: int = 1
    mass_ratio: float = 1.0
    pair_rescale: bool = False
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        object.__setattr__(self, "kind", SystemKind(self.kind))
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.kind is SystemKind.COULOMB_ATOM and (int(self.z) != self.z or self.z < 1):
            raise ValueError(f"z must be a positive integer, got {self.z}")
        if self.kind is SystemKind.NEWTON_FIXED_GRAIN and not self.mass_ratio > 0:
            raise ValueError(f"mass_ratio must be positive, got {self.mass_ratio}")
        if self.kind is SystemKind.NEWTON_INTRINSIC and self.N < 2:
            raise ValueError("NewtonIntrinsic needs N >= 2")

    def with_N(self, N: int) -> "SystemSpec":
        return SystemSpec(self.kind, N, self.z, self.mass_ratio, self.pair_rescale, self.constants)


@dataclass(frozen=True)
class ReducedSystem:
    kind: SystemKind
    N: int
    kinetic_coeff: float
    central_coeff: float
    pair_coeff: float
    pair_kinetic_coeff: float
    energy_unit: float
    length_unit: float

    def to_physical(self, energy: float) -> float:
        return energy * self.energy_unit


@dataclass
class PhasePoint:
    """Classical momenta and positions, both of shape (N, 3)."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float).reshape(-1, 3)
        self.q = np.asarray(self.q, dtype=float).reshape(-1, 3)
        if self.p.shape != self.q.shape:
            raise ValueError("p and q must have the same number of particles")

    @property
    def N(self) -> int:
        return self.p.shape[0]

    def permuted(self, perm) -> "PhasePoint":
        perm = np.asarray(perm)
        return PhasePoint(self.p[perm], self.q[perm])


def reduce(spec: SystemSpec) -> ReducedSystem:
    c = spec.constants
    N = spec.N
    if spec.kind is SystemKind.COULOMB_ATOM:
        ze2 = spec.z**2 * c.e**2
        length = c.hbar**2 / (c.m * ze2)
        energy = c.m * ze2**2 / c.hbar**2
        a_K, a_C, a_I, b_K = 0.5, float(N), 1.0, 0.0
    elif spec.kind is SystemKind.NEWTON_FIXED_GRAIN:
        M = c.m / spec.mass_ratio
        length = c.hbar**2 / (c.G * M * c.m**2)
        energy = c.G**2 * M**2 * c.m**3 / c.hbar**2
        a_K, a_C, a_I, b_K = 0.5, 1.0, -spec.mass_ratio, 0.0
    else:
        length = c.hbar**2 / (c.G * c.m**3)
        energy = c.G**2 * c.m**5 / c.hbar**2
        a_K, a_C, a_I, b_K = 0.0, 0.0, -1.0, 1.0 / (2 * N)
    if spec.pair_rescale and N > 1:
        a_I /= N - 1
    return ReducedSystem(spec.kind, N, a_K, a_C, a_I, b_K, energy, length)


@functools.lru_cache(maxsize=64)
def _pair_indices(N: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(N, 1)


def _norms(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...i->...", v, v))


def _inverse_distances(d: np.ndarray) -> np.ndarray:
    if np.any(d == 0.0) or not np.all(np.isfinite(d)):
        raise SingularConfigurationError("coincident or central configuration")
    return 1.0 / d


def _one_body_terms(sys: ReducedSystem, x: PhasePoint) -> np.ndarray:
    kin = sys.kinetic_coeff * np.einsum("ki,ki->k", x.p, x.p)
    if sys.central_coeff == 0.0:
        return kin
    return kin - sys.central_coeff * _inverse_distances(_norms(x.q))


def _pair_terms(sys: ReducedSystem, x: PhasePoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k, l = _pair_indices(sys.N)
    dp = x.p[k] - x.p[l]
    val = sys.pair_kinetic_coeff * np.einsum("ki,ki->k", dp, dp)
    return k, l, val + sys.pair_coeff * _inverse_distances(_norms(x.q[k] - x.q[l]))


def classical_energy(sys: ReducedSystem, x: PhasePoint) -> float:
    """Classical Hamiltonian at a phase point, in dimensionless units."""
    if x.N != sys.N:
        raise ValueError(f"phase point has {x.N} particles, system has {sys.N}")
    _, _, pair = _pair_terms(sys, x)
    return math.fsum(np.concatenate([_one_body_terms(sys, x), pair]))


def pair_terms(sys: ReducedSystem, x: PhasePoint) -> dict[tuple[int, int], float]:
    """Pair summands whose total is the classical Hamiltonian.

    One-body parts are shared among the N-1 pairs each particle belongs to.
    Keys are 0-based index pairs (k, l) with k < l.
    """
    N = sys.N
    if N < 2:
        raise ValueError("pair decomposition needs N >= 2")
    if x.N != N:
        raise ValueError(f"phase point has {x.N} particles, system has {N}")
    one = _one_body_terms(sys, x)
    k, l, pair = _pair_terms(sys, x)
    u = (one[k] + one[l]) / (N - 1) + pair
    return {(int(a), int(b)): float(v) for a, b, v in zip(k, l, u)}


def random_phase_point(
    rng: np.random.Generator,
    N: int,
    radius: float = 4.0,
    min_distance: float = 1e-3,
) -> PhasePoint:
    """Uniform positions in a ball, Gaussian momenta, no near-collisions.

    Configurations with any pair (or any particle and the origin) closer than
    ``min_distance`` are redrawn.
    """
    while True:
        direction = rng.normal(size=(N, 3))
        direction /= _norms(direction)[:, None]
        q = direction * radius * rng.random(N)[:, None] ** (1.0 / 3.0)
        if np.any(_norms(q) < min_distance):
            continue
        if N > 1:
            i, j = _pair_indices(N)
            if np.any(_norms(q[i] - q[j]) < min_distance):
                continue
        return PhasePoint(rng.normal(size=(N, 3)), q)


@dataclass(frozen=True)
class BondWeights:
    """Rational weights on the bonds of a complete graph with vertices 1..N."""

    N: int
    w: dict

    def __post_init__(self):
        pairs = set(combinations(range(1, self.N + 1), 2))
        if set(self.w) != pairs:
            raise ValueError("weights must cover every unordered pair k < l")
        object.__setattr__(self, "w", {kl: Fraction(v) for kl, v in self.w.items()})

    @classmethod
    def from_function(cls, N: int, f) -> "BondWeights":
        return cls(N, {(k, l): f(k, l) for k, l in combinations(range(1, N + 1), 2)})


def graph_identity_check(b: BondWeights) -> tuple[Fraction, Fraction]:
    """Bond sum of K_N versus 1/(N-2) times the bond sums of its K_{N-1} subgraphs."""
    N = b.N
    if N < 3:
        raise ValueError("the complete-graph identity needs N >= 3")
    lhs = sum(b.w.values(), Fraction(0))
    sub = sum(
        (v for n in range(1, N + 1) for (k, l), v in b.w.items() if n not in (k, l)),
        Fraction(0),
    )
    return lhs, sub / (N - 2)
