"""Bracketing the ground-state energy of a self-gravitating boson star.

Run with ``python3 demos/chain_bounds.py``. The intrinsic two-body energy is
known exactly (-1/4 in units G^2 m^5 / hbar^2), so the chain lower bound
needs no numerical seed at all.
"""

from __future__ import annotations

from bosonic_bounds import bounds_and_chains as bc
from bosonic_bounds.core_model import SystemSpec
from bosonic_bounds.estimates import EnergyEstimate
from bosonic_bounds.hartree_scf import hartree_energy

seed = EnergyEstimate(-0.25, "exact", "exact", "NewtonIntrinsic", 2)

print("    N   older bound    chain bound    Hartree upper   normalized chain / Hartree")
for N in range(2, 9):
    upper, _ = hartree_energy(SystemSpec("NewtonIntrinsic", N))
    lower = bc.corollary_lower_bound("NewtonIntrinsic", N, seed)
    older = bc.levy_leblond_bound(N, seed)
    P = bc.P_coul(N)
    print(
        f"{N:5d}  {older.value:11.5f}  {lower.value:11.5f}  {upper.value:13.5f}"
        f"     {lower.value / P:.5f} / {upper.value / P:.5f}"
    )

# The true energy lies between the chain bound and the Hartree value. The chain
# bound divided by N^2 (N - 1) is constant, while the exact ratio can only grow
# with N; the Hartree ratio shows the same upward trend.
