"""Spherical one-orbital Hartree functionals and their self-consistent minimization.

A product state phi^(x N) turns every Hamiltonian family into a functional of
one orbital,

    F(phi) = c_K k(phi) + c_C c(phi) + c_I i(phi),

with k = int |grad phi|^2, c = int |phi|^2 / r and
i = int int |phi(x)|^2 |phi(y)|^2 / |x - y|. Its value at any normalized phi
is a Rayleigh-Ritz upper bound on the N-body ground-state energy.

Orbitals are stored as u(r) = r phi(r) on a uniform grid, normalized so that
4 pi int u^2 dr = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import make_interp_spline
from scipy.linalg import eigh_tridiagonal

from .core_model import SystemKind, SystemSpec, reduce
from .estimates import EnergyEstimate

FOUR_PI = 4.0 * math.pi


class SCFConvergenceError(RuntimeError):
    def __init__(self, message: str, energy_trace):
        self.energy_trace = list(energy_trace)
        super().__init__(f"{message}; last energies: {self.energy_trace[-5:]}")


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid r_i = i h, i = 0..n, with h = r_max / n (n even)."""

    r_max: float = 40.0
    n: int = 8000

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.n < 10 or self.n % 2:
            raise ValueError("n must be an even integer >= 10")

    @property
    def h(self) -> float:
        return self.r_max / self.n

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.n + 1)

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.r_max, self.n * factor)


def _integrate(grid: RadialGrid, f) -> float:
    return float(simpson(f, dx=grid.h))


@dataclass
class RadialOrbital:
    grid: RadialGrid
    u: np.ndarray
    normalization: str = field(default="4 pi int u^2 dr = 1", init=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != (self.grid.n + 1,):
            raise ValueError("u must have one value per grid point")

    @property
    def norm(self) -> float:
        return FOUR_PI * _integrate(self.grid, self.u**2)

    def normalized(self) -> "RadialOrbital":
        return RadialOrbital(self.grid, self.u / math.sqrt(self.norm))

    @classmethod
    def from_function(cls, grid: RadialGrid, phi) -> "RadialOrbital":
        """Sample phi(r) on the grid (u = r phi) and normalize."""
        r = grid.r
        return cls(grid, r * phi(r)).normalized()

    @classmethod
    def hydrogenic(cls, grid: RadialGrid, a: float = 1.0) -> "RadialOrbital":
        return cls.from_function(grid, lambda r: np.exp(-a * r))


@dataclass(frozen=True)
class Forms:
    kinetic: float
    central: float
    pair: float


@dataclass(frozen=True)
class HartreeFunctionalCoeffs:
    c_K: float
    c_C: float
    c_I: float

    def __post_init__(self):
        if not self.c_K > 0:
            raise ValueError("kinetic coefficient must be positive")

    def value(self, f: Forms) -> float:
        return self.c_K * f.kinetic + self.c_C * f.central + self.c_I * f.pair

    def dilation_derivative(self, f: Forms) -> float:
        """d/dlam F(phi_lam) at lam = 1; zero at a minimizer (virial theorem)."""
        return 2.0 * self.c_K * f.kinetic + self.c_C * f.central + self.c_I * f.pair

    def scaled(self, lam: float) -> "HartreeFunctionalCoeffs":
        """Coefficients G with F(phi_lam) = lam^2 G(phi)."""
        return HartreeFunctionalCoeffs(self.c_K, self.c_C / lam, self.c_I / lam)


def functional_coeffs(spec: SystemSpec) -> HartreeFunctionalCoeffs:
    """Coefficients of the product-state functional, dimensionless units.

    For the intrinsic star the product state is taken in the full
    translation-invariant Hamiltonian, whose infimum equals the intrinsic
    ground-state energy, so the value is still an upper bound.
    """
    N = spec.N
    red = reduce(spec)
    pairs = N * (N - 1) / 2
    if spec.kind is SystemKind.NEWTON_INTRINSIC:
        return HartreeFunctionalCoeffs(0.5 * N, 0.0, pairs * red.pair_coeff)
    return HartreeFunctionalCoeffs(N * red.kinetic_coeff, -N * red.central_coeff, pairs * red.pair_coeff)


def limiting_coeffs(kind: SystemKind | str, mass_ratio: float = 1.0) -> HartreeFunctionalCoeffs:
    """Functional whose minimum is lim E_H(N)/N^3."""
    kind = SystemKind(kind)
    if kind is SystemKind.COULOMB_ATOM:
        return HartreeFunctionalCoeffs(0.5, -1.0, 0.5)
    if kind is SystemKind.NEWTON_FIXED_GRAIN:
        return HartreeFunctionalCoeffs(0.5, 0.0, -0.5 * mass_ratio)
    return HartreeFunctionalCoeffs(0.5, 0.0, -0.5)


def _spline(grid: RadialGrid, values):
    return make_interp_spline(grid.r, values, k=5)


def _cumulative(grid: RadialGrid, values) -> np.ndarray:
    anti = _spline(grid, values).antiderivative()
    out = anti(grid.r)
    return out - out[0]


def _safe_over_r(grid: RadialGrid, values) -> np.ndarray:
    r = grid.r
    out = np.zeros_like(values)
    out[1:] = values[1:] / r[1:]
    return out


def hartree_potential(orb: RadialOrbital) -> np.ndarray:
    """Phi(r) = int |phi(y)|^2 / |x - y| d^3y, via the shell theorem."""
    grid = orb.grid
    rho = FOUR_PI * orb.u**2
    inside = _cumulative(grid, rho)
    outside_cum = _cumulative(grid, _safe_over_r(grid, rho))
    phi = _safe_over_r(grid, inside) + (outside_cum[-1] - outside_cum)
    phi[0] = outside_cum[-1]
    return phi


def evaluate_forms(orb: RadialOrbital, *, norm_tol: float = 1e-8) -> Forms:
    """k, c and i of a normalized orbital by spline-based radial quadrature."""
    if abs(orb.norm - 1.0) > norm_tol:
        raise ValueError(f"orbital is not normalized (norm = {orb.norm:.12g})")
    grid = orb.grid
    u = orb.u
    du = _spline(grid, u).derivative()(grid.r)
    # r phi'(r) = u' - u/r, which keeps k exact without boundary terms
    rdphi = du - _safe_over_r(grid, u)
    rdphi[0] = 0.0
    k = FOUR_PI * _integrate(grid, rdphi**2)
    c = FOUR_PI * _integrate(grid, _safe_over_r(grid, u**2))
    i = FOUR_PI * _integrate(grid, u**2 * hartree_potential(orb))
    return Forms(k, c, i)


def functional_value(coeffs: HartreeFunctionalCoeffs, orb: RadialOrbital) -> float:
    return coeffs.value(evaluate_forms(orb))


def rescale(orb: RadialOrbital, lam: float) -> RadialOrbital:
    """phi_lam(q) = lam^(3/2) phi(lam q), stored on the grid contracted by lam."""
    if not lam > 0:
        raise ValueError("scale factor must be positive")
    grid = RadialGrid(orb.grid.r_max / lam, orb.grid.n)
    return RadialOrbital(grid, math.sqrt(lam) * orb.u)


# -- tridiagonal eigenproblem ------------------------------------------------


def sturm_count(diag, off, x: float) -> int:
    """Number of eigenvalues below x of the symmetric tridiagonal matrix."""
    count = 0
    q = 1.0
    for i, d in enumerate(diag):
        e2 = off[i - 1] ** 2 if i > 0 else 0.0
        q = d - x - (e2 / q if i > 0 else 0.0)
        if q == 0.0:
            q = -1e-300
        if q < 0:
            count += 1
    return count


def bisect_lowest(diag, off, tol: float = 1e-12) -> float:
    """Lowest eigenvalue by Sturm-sequence bisection inside the Gershgorin interval."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    radius = np.zeros_like(diag)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo, hi = float((diag - radius).min()), float((diag + radius).max())
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if sturm_count(diag, off, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def lowest_eigenpair(diag, off) -> tuple[float, np.ndarray]:
    """Lowest eigenpair by bisection and inverse iteration (LAPACK stebz/stein)."""
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0), lapack_driver="stebz")
    vec = v[:, 0]
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return float(w[0]), vec


def radial_ground_state(grid: RadialGrid, c_K: float, potential: np.ndarray) -> tuple[float, RadialOrbital]:
    """Lowest s-state of c_K (-Laplacian) + V(r) with Dirichlet ends."""
    h = grid.h
    diag = 2.0 * c_K / h**2 + potential[1:-1]
    off = np.full(grid.n - 2, -c_K / h**2)
    eig, vec = lowest_eigenpair(diag, off)
    u = np.zeros(grid.n + 1)
    u[1:-1] = vec
    return eig, RadialOrbital(grid, u).normalized()


# -- self-consistent field ---------------------------------------------------


@dataclass
class SCFResult:
    energy: float
    orbital: RadialOrbital
    forms: Forms
    coeffs: HartreeFunctionalCoeffs
    virial_residual: float
    iterations: int
    energy_trace: list
    scale: float

    def __iter__(self):
        # allows ``E_H, phi = scf_solve(...)``
        return iter((self.energy, self.orbital))


def natural_scale(coeffs: HartreeFunctionalCoeffs) -> float:
    """Optimal inverse length of the 1s trial exp(-a r) for these coefficients."""
    slope = coeffs.c_C + 0.625 * coeffs.c_I
    if slope >= 0:
        raise ValueError("functional has no bound trial of hydrogenic shape; not bounded below usefully")
    return -slope / (2.0 * coeffs.c_K)


def scf_solve(
    coeffs: HartreeFunctionalCoeffs,
    grid: RadialGrid | None = None,
    mixing: float = 0.3,
    tol: float = 1e-9,
    *,
    density_tol: float = 1e-7,
    max_iter: int = 2000,
    auto_scale: bool = True,
) -> SCFResult:
    """Minimize the Hartree functional by density-mixed self-consistent iteration.

    With ``auto_scale`` the problem is first dilated so that its hydrogenic
    trial has unit length scale, solved on ``grid``, and the orbital is mapped
    back; F(phi_lam) = lam^2 G(phi) makes this exact. The mixing factor is
    halved whenever a step would raise the energy, so the accepted energy
    trace is nonincreasing. Iteration stops once the energy changes by less
    than ``tol`` (relative once |E| > 1) and the output density differs from the input density by
    less than ``density_tol`` in L1. The reported energy is the functional
    value of the final orbital.
    """
    grid = grid or RadialGrid()
    lam = natural_scale(coeffs) if auto_scale else 1.0
    inner = coeffs.scaled(lam) if auto_scale else coeffs
    r = grid.r
    central = np.zeros_like(r)
    central[1:] = inner.c_C / r[1:]

    def mean_field(orb):
        return central + 2.0 * inner.c_I * hartree_potential(orb)

    def energy_of(orb):
        return inner.value(evaluate_forms(orb))

    current = RadialOrbital.hydrogenic(grid, 1.0)
    _, out = radial_ground_state(grid, inner.c_K, mean_field(current))
    e_out = energy_of(out)
    rho_in = current.u**2
    trace = [e_out]
    eta = mixing
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        rho_try = (1.0 - eta) * rho_in + eta * out.u**2
        trial_in = RadialOrbital(grid, np.sqrt(rho_try)).normalized()
        _, new_out = radial_ground_state(grid, inner.c_K, mean_field(trial_in))
        e_new = energy_of(new_out)
        if e_new > e_out + 0.1 * tol * max(1.0, abs(e_out)):
            eta *= 0.5
            if eta < 1e-8:
                raise SCFConvergenceError("mixing collapsed without lowering the energy", trace)
            continue
        change = e_out - e_new
        residual = FOUR_PI * _integrate(grid, np.abs(new_out.u**2 - trial_in.u**2))
        rho_in, out, e_out = trial_in.u**2, new_out, e_new
        trace.append(e_out)
        eta = min(mixing, 2.0 * eta)
        if change < tol * max(1.0, abs(e_out)) and residual < density_tol:
            converged = True
            break
    if not converged:
        raise SCFConvergenceError(f"no convergence after {max_iter} iterations", trace)

    forms = evaluate_forms(out)
    orbital = rescale(out, lam) if auto_scale else out
    scale2 = lam**2
    energy = scale2 * inner.value(forms)
    phys_forms = Forms(scale2 * forms.kinetic, lam * forms.central, lam * forms.pair)
    virial = abs(coeffs.dilation_derivative(phys_forms)) / abs(energy)
    return SCFResult(
        energy=energy,
        orbital=orbital,
        forms=phys_forms,
        coeffs=coeffs,
        virial_residual=virial,
        iterations=it,
        energy_trace=[scale2 * e for e in trace],
        scale=lam,
    )


def hartree_upper_bound(spec: SystemSpec, orb: RadialOrbital) -> EnergyEstimate:
    """Product-state energy of ``orb`` for the N-body system ``spec``."""
    value = functional_value(functional_coeffs(spec), orb)
    return EnergyEstimate(value, "upper", "hartree", spec.kind.value, spec.N)


def hartree_energy(spec: SystemSpec, grid: RadialGrid | None = None, **kwargs) -> tuple[EnergyEstimate, SCFResult]:
    """Minimized Hartree upper bound for ``spec``."""
    res = scf_solve(functional_coeffs(spec), grid, **kwargs)
    est = EnergyEstimate(res.energy, "upper", "hartree-scf", spec.kind.value, spec.N)
    return est, res
