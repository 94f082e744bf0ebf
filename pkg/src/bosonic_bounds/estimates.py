"""Energy values tagged with the direction in which they bound the truth."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

BOUND_KINDS = ("exact", "upper", "lower", "estimate")

_FLIP = {"exact": "exact", "upper": "lower", "lower": "upper", "estimate": "estimate"}


@dataclass(frozen=True)
class EnergyEstimate:
    """A dimensionless energy together with its bound character.

    ``uncertainty`` is a nonnegative numerical error estimate (0 for closed
    forms). ``system`` is the family name and ``N`` the particle count the
    value refers to.
    """

    value: float
    bound_kind: str
    method: str
    system: str
    N: int
    uncertainty: float = 0.0

    def __post_init__(self):
        if self.bound_kind not in BOUND_KINDS:
            raise ValueError(f"unknown bound kind {self.bound_kind!r}")
        if self.uncertainty < 0:
            raise ValueError("uncertainty must be nonnegative")

    def scaled(self, coeff, *, N: int | None = None, method: str | None = None) -> "EnergyEstimate":
        """Multiply by an exact coefficient, tracking the bound direction.

        A positive coefficient keeps lower/upper; a negative one swaps them.
        """
        coeff = Fraction(coeff)
        if coeff == 0:
            raise ValueError("scaling by zero destroys the bound")
        kind = self.bound_kind if coeff > 0 else _FLIP[self.bound_kind]
        factor = float(coeff)
        return replace(
            self,
            value=self.value * factor,
            bound_kind=kind,
            uncertainty=self.uncertainty * abs(factor),
            N=self.N if N is None else N,
            method=self.method if method is None else method,
        )

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "bound_kind": self.bound_kind,
            "method": self.method,
            "system": self.system,
            "N": self.N,
            "uncertainty": self.uncertainty,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyEstimate":
        return cls(
            value=float(d["value"]),
            bound_kind=d["bound_kind"],
            method=d["method"],
            system=d["system"],
            N=int(d["N"]),
            uncertainty=float(d.get("uncertainty", 0.0)),
        )


def lower_seed_from_converged(upper: EnergyEstimate, margin_factor: float = 10.0) -> EnergyEstimate:
    """Turn a converged variational (upper) value into a lower-bound seed.

    The value is lowered by ``margin_factor`` times its convergence
    uncertainty. This is how Rayleigh-Ritz results for the two-body problem
    are fed to the chain lower bounds; the conversion is explicit so that a
    raw upper bound can never slip into a lower-bound formula.
    """
    if upper.bound_kind not in ("upper", "estimate"):
        raise ValueError(f"expected an upper bound or estimate, got {upper.bound_kind}")
    margin = margin_factor * upper.uncertainty
    return replace(
        upper,
        value=upper.value - margin,
        bound_kind="lower",
        method=f"{upper.method}-minus-margin",
        uncertainty=margin,
    )
