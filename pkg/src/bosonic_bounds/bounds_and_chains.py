"""Closed-form bounds, chain factors and normalized energy sequences.

Every chain step has the form E(N) >= R(N) E(N-1) with a rational R(N).
Iterating it down to the base particle count gives the corollary lower
bounds E(N) >= E(base) P(N)/P(base). All coefficients are kept as exact
fractions; floating point only enters when a coefficient multiplies an
energy.
"""

from __future__ import annotations

from fractions import Fraction

from scipy.optimize import brentq

from .core_model import SystemKind
from .estimates import EnergyEstimate


def P_coul(N: int) -> int:
    return N * N * (N - 1)


def P_newt(N: int) -> int:
    return N * (N - 1) * (N - 2)


def base_N(kind: SystemKind | str, pair_rescale: bool = False) -> int:
    """Smallest particle count from which the chain starts."""
    kind = SystemKind(kind)
    if kind is SystemKind.NEWTON_FIXED_GRAIN and not pair_rescale:
        return 3
    return 2


def _check_rescale(kind: SystemKind, pair_rescale: bool) -> None:
    # With couplings divided by N-1 the chain needs N-independent one-body
    # terms, which only the fixed-grain family has.
    if pair_rescale and kind is not SystemKind.NEWTON_FIXED_GRAIN:
        raise ValueError("the rescaled-pair chain is available for NewtonFixedGrain only")


def polynomial(kind: SystemKind | str, N: int, pair_rescale: bool = False) -> int:
    """Normalizing polynomial P(N) of the family."""
    kind = SystemKind(kind)
    _check_rescale(kind, pair_rescale)
    if pair_rescale:
        value = N
    elif kind is SystemKind.NEWTON_FIXED_GRAIN:
        value = P_newt(N)
    else:
        value = P_coul(N)
    if value <= 0:
        raise ValueError(f"P(N) vanishes for N={N} in family {kind.value}")
    return value


def chain_factor(kind: SystemKind | str, N: int, pair_rescale: bool = False) -> Fraction:
    """R(N) in E(N) >= R(N) E(N-1)."""
    kind = SystemKind(kind)
    _check_rescale(kind, pair_rescale)
    if N <= base_N(kind, pair_rescale):
        raise ValueError(f"chain factor needs N > {base_N(kind, pair_rescale)}, got {N}")
    if pair_rescale:
        return Fraction(N, N - 1)
    if kind is SystemKind.NEWTON_FIXED_GRAIN:
        return Fraction(N, N - 3)
    return Fraction(N * N, (N - 1) * (N - 2))


def telescope(kind: SystemKind | str, N: int, pair_rescale: bool = False) -> Fraction:
    """Product of chain factors from base+1 up to N."""
    kind = SystemKind(kind)
    base = base_N(kind, pair_rescale)
    if N <= base:
        raise ValueError(f"telescoping needs N > {base}, got {N}")
    out = Fraction(1)
    for k in range(base + 1, N + 1):
        out *= chain_factor(kind, k, pair_rescale)
    return out


def corollary_coefficient(kind: SystemKind | str, N: int, pair_rescale: bool = False) -> Fraction:
    """Closed form P(N)/P(base): N^3(1-1/N)/4, N^3(1-1/N)(1-2/N)/6 or N/2."""
    kind = SystemKind(kind)
    base = base_N(kind, pair_rescale)
    if N < base:
        raise ValueError(f"corollary needs N >= {base}, got {N}")
    return Fraction(polynomial(kind, N, pair_rescale), polynomial(kind, base, pair_rescale))


def corollary_lower_bound(
    kind: SystemKind | str, N: int, seed: EnergyEstimate, pair_rescale: bool = False
) -> EnergyEstimate:
    """Lower bound on E(N) from a lower bound (or exact value) at the base count."""
    kind = SystemKind(kind)
    if seed.bound_kind not in ("exact", "lower"):
        raise ValueError(f"seed must be exact or a lower bound, got {seed.bound_kind}")
    if not seed.value < 0:
        raise ValueError("seed energy must be negative")
    base = base_N(kind, pair_rescale)
    if seed.N != base:
        raise ValueError(f"seed must refer to N={base}, got N={seed.N}")
    coeff = corollary_coefficient(kind, N, pair_rescale)
    out = seed.scaled(coeff, N=N, method="corollary")
    if out.bound_kind == "exact" and N != base:
        out = EnergyEstimate(out.value, "lower", out.method, out.system, N, out.uncertainty)
    return out


def levy_leblond_coefficient(N: int) -> Fraction:
    return Fraction(N**3, 2) * Fraction(N - 1, N) ** 2


def levy_leblond_bound(N: int, E2: EnergyEstimate) -> EnergyEstimate:
    """Older lower bound E(2) N^3 (1-1/N)^2 / 2."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if not E2.value < 0:
        raise ValueError("E2 must be negative")
    if E2.bound_kind not in ("exact", "lower"):
        raise ValueError(f"E2 must be exact or a lower bound, got {E2.bound_kind}")
    out = E2.scaled(levy_leblond_coefficient(N), N=N, method="levy-leblond")
    if out.bound_kind == "exact" and N != 2:
        out = EnergyEstimate(out.value, "lower", out.method, out.system, N, out.uncertainty)
    return out


def lieb_bound(N: int, const: float = 1.0, system: str = SystemKind.COULOMB_ATOM.value) -> EnergyEstimate:
    """-const N^3 (1 + N^(-4/3)); the constant is a user parameter."""
    if not const > 0:
        raise ValueError("const must be positive")
    if N < 1:
        raise ValueError("N must be positive")
    value = -const * N**3 * (1.0 + N ** (-4.0 / 3.0))
    return EnergyEstimate(value, "lower", "lieb", system, N)


def lieb_crossover(E2: float, const: float = 1.0, n_max: float = 1e6) -> float | None:
    """Real N >= 2 beyond which the Lieb bound exceeds the Coulomb corollary bound.

    Returns None when the Lieb bound never overtakes within [2, n_max].
    """
    if not E2 < 0 or not const > 0:
        raise ValueError("need E2 < 0 and const > 0")

    def gap(n: float) -> float:
        # (Lieb - corollary) / N^3
        return -const * (1.0 + n ** (-4.0 / 3.0)) - 0.25 * E2 * (1.0 - 1.0 / n)

    lo, hi = 2.0, n_max
    if gap(lo) > 0:
        return lo
    if gap(hi) <= 0:
        return None
    return float(brentq(gap, lo, hi, xtol=1e-12))


def hall_upper_bound(N: int, B: float = 1.0, system: str = SystemKind.COULOMB_ATOM.value) -> EnergyEstimate:
    """-B N^3 (1-1/N); B is a user parameter."""
    if not B > 0:
        raise ValueError("B must be positive")
    if N < 1:
        raise ValueError("N must be positive")
    return EnergyEstimate(-B * N**3 * (1.0 - 1.0 / N), "upper", "hall", system, N)


def normalized_sequence(
    kind: SystemKind | str, estimates, pair_rescale: bool = False
) -> list[tuple[int, float]]:
    """(N, E/P(N)) for each estimate; with ``pair_rescale`` P(N) = N."""
    kind = SystemKind(kind)
    ests = sorted(estimates, key=lambda e: e.N)
    Ns = [e.N for e in ests]
    if Ns and Ns != list(range(Ns[0], Ns[0] + len(Ns))):
        raise ValueError("estimates must cover consecutive N")
    return [(e.N, e.value / polynomial(kind, e.N, pair_rescale)) for e in ests]


def is_nondecreasing(seq: list[tuple[int, float]], rtol: float = 0.0) -> bool:
    vals = [v for _, v in seq]
    return all(b >= a - rtol * abs(a) for a, b in zip(vals, vals[1:]))
