"""Product-state (Hartree) energies of bosonic atoms as the particle number grows.

Run with ``python3 demos/hartree_large_n.py``.
"""

from __future__ import annotations

from bosonic_bounds.core_model import SystemSpec
from bosonic_bounds.hartree_scf import hartree_energy, limiting_coeffs, scf_solve

limit = scf_solve(limiting_coeffs("CoulombAtom"))
print(f"large-N functional minimum: {limit.energy:.8f} (virial residual {limit.virial_residual:.1e})")

# E_H(N)/N^3 approaches the limit from below. The leading correction is
# proportional to 1/N, so a two-point extrapolation in 1/N removes most of it.
print("    N     E_H(N)/N^3     gap to limit")
values = {}
for N in (2, 5, 10, 25, 50, 100):
    est, res = hartree_energy(SystemSpec("CoulombAtom", N))
    values[N] = est.value / N**3
    print(f"{N:5d}  {values[N]:.8f}   {values[N] - limit.energy:+.2e}")

extrapolated = 2 * values[100] - values[50]
print(f"1/N extrapolation from N=50,100: {extrapolated:.8f} ({extrapolated - limit.energy:+.1e} from the limit)")
