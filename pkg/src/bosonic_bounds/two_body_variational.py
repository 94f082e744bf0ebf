"""Correlated (Hylleraas-type) variational solver for two bosons about a fixed centre.

The Hamiltonian is

    H = (|p1|^2 + |p2|^2) / (2 mu) - Z (1/r1 + 1/r2) + lam / r12

and trial functions are combinations of

    chi_lmn = exp(-alpha (r1 + r2)) (r1 + r2)^l (r1 - r2)^(2m) r12^n,   l + 2m + n <= omega,

which are symmetric under 1 <-> 2 by construction. All matrix elements are
polynomials times exp(-2 alpha s) after multiplication by the volume element,
so the product Gauss rule below integrates them exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, eigh, qr, solve_triangular
from scipy.special import roots_genlaguerre, roots_legendre


class ConditioningError(ValueError):
    """The overlap matrix is numerically singular for the requested basis."""

    def __init__(self, basis_size: int, condition: float, detail: str = ""):
        self.basis_size = basis_size
        self.condition = condition
        msg = f"overlap matrix for basis size {basis_size} is ill-conditioned (cond ~ {condition:.3g})"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes in (r1, r2, r12) and weights that already contain r1 r2 r12 exp(-2 alpha s)."""

    r1: np.ndarray
    r2: np.ndarray
    r12: np.ndarray
    weights: np.ndarray
    order_s: int
    order_inner: int
    alpha: float

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def simplex_quadrature(order_s: int, order_inner: int, alpha: float = 1.0) -> QuadratureRule:
    """Product Gauss rule on {|r1 - r2| <= r12 <= r1 + r2}.

    With s = r1 + r2, r12 = s x and r1 - r2 = s x y (x in [0, 1], y in [-1, 1])
    the measure r1 r2 r12 dr1 dr2 dr12 becomes s^5 x^2 (1 - x^2 y^2) / 8 ds dx dy.
    Generalized Gauss-Laguerre handles s^2 exp(-2 alpha s); Gauss-Legendre
    handles x and y. An integrand f is integrated exactly when f r1 r2 r12 is a
    polynomial of s-degree <= 2 order_s + 1 and x-, y-degree <= 2 order_inner - 1.
    """
    if order_s < 2 or order_inner < 2:
        raise ValueError("quadrature orders must be >= 2")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    z, wz = roots_genlaguerre(order_s, 2.0)
    s = z / (2.0 * alpha)
    ws = wz / (2.0 * alpha) ** 3
    x, wx = roots_legendre(order_inner)
    x = 0.5 * (x + 1.0)
    wx = 0.5 * wx
    y, wy = roots_legendre(order_inner)
    S, X, Y = np.meshgrid(s, x, y, indexing="ij")
    W = ws[:, None, None] * wx[None, :, None] * wy[None, None, :]
    W = W * S**3 * X**2 * (1.0 - X**2 * Y**2) / 8.0
    t = S * X * Y
    return QuadratureRule(
        r1=(0.5 * (S + t)).ravel(),
        r2=(0.5 * (S - t)).ravel(),
        r12=(S * X).ravel(),
        weights=W.ravel(),
        order_s=order_s,
        order_inner=order_inner,
        alpha=alpha,
    )


def basis_indices(omega: int) -> tuple[tuple[int, int, int], ...]:
    """Admissible (l, m, n), ordered by l + 2m + n so smaller bases are prefixes."""
    if omega < 0:
        raise ValueError("omega must be >= 0")
    idx = [
        (l, m, n)
        for l in range(omega + 1)
        for m in range(omega // 2 + 1)
        for n in range(omega + 1)
        if l + 2 * m + n <= omega
    ]
    return tuple(sorted(idx, key=lambda lmn: (lmn[0] + 2 * lmn[1] + lmn[2], lmn)))


@dataclass(frozen=True)
class HylleraasBasis:
    alpha: float
    omega: int
    indices: tuple = field(init=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "indices", basis_indices(self.omega))

    @property
    def size(self) -> int:
        return len(self.indices)

    def default_orders(self) -> tuple[int, int]:
        return self.omega + 4, self.omega + 4

    def evaluate(self, r1, r2, r12) -> np.ndarray:
        """Basis function values at points, shape (npoints, size)."""
        r1, r2, r12 = (np.asarray(a, dtype=float)[..., None] for a in (r1, r2, r12))
        l, m, n = (np.array(c) for c in zip(*self.indices))
        return np.exp(-self.alpha * (r1 + r2)) * (r1 + r2) ** l * (r1 - r2) ** (2 * m) * r12**n


@dataclass
class HylleraasSolution:
    basis: HylleraasBasis
    coeffs: np.ndarray
    energy: float
    kinetic: float
    potential: float
    virial_residual: float
    quadrature_orders: tuple[int, int]
    Z: float
    lam: float
    mass: float = 1.0


def _power(base: np.ndarray, k: np.ndarray) -> np.ndarray:
    # base**k with 0 wherever k < 0 (derivative of a constant factor)
    safe = np.where(k >= 0, k, 0)
    return np.where(k >= 0, base**safe, 0.0)


def _samples(basis: HylleraasBasis, rule: QuadratureRule):
    """Polynomial parts of chi and of its partial derivatives at the nodes.

    The common factor exp(-alpha s) is carried by the quadrature weights.
    """
    a = basis.alpha
    s = (rule.r1 + rule.r2)[:, None]
    t = (rule.r1 - rule.r2)[:, None]
    u = rule.r12[:, None]
    l, m, n = (np.array(c) for c in zip(*basis.indices))
    ps, pt, pu = _power(s, l), _power(t, 2 * m), _power(u, n)
    dps = l * _power(s, l - 1)
    dpt = 2 * m * _power(t, 2 * m - 1)
    dpu = n * _power(u, n - 1)
    f = ps * pt * pu
    common = -a * f + dps * pt * pu
    f1 = common + ps * dpt * pu
    f2 = common - ps * dpt * pu
    fu = ps * pt * dpu
    return f, f1, f2, fu


def _quadratic_forms(samples, rule: QuadratureRule, Z: float, lam: float, mass: float):
    f, f1, f2, fu = samples
    w = rule.weights
    r1, r2, u = rule.r1, rule.r2, rule.r12
    c1 = (r1**2 - r2**2 + u**2) / (2.0 * r1 * u)
    c2 = (r2**2 - r1**2 + u**2) / (2.0 * r2 * u)

    def form(a, b, weight):
        return (a * weight[:, None]).T @ b

    S = form(f, f, w)
    grad = (
        form(f1, f1, w)
        + form(f2, f2, w)
        + 2.0 * form(fu, fu, w)
        + form(f1, fu, w * c1)
        + form(fu, f1, w * c1)
        + form(f2, fu, w * c2)
        + form(fu, f2, w * c2)
    )
    T = grad / (2.0 * mass)
    V = form(f, f, w * (-Z / r1 - Z / r2 + lam / u))
    sym = lambda A: 0.5 * (A + A.T)
    return sym(T), sym(V), sym(S)


def _rule_for(basis: HylleraasBasis, order_s: int | None, order_inner: int | None) -> QuadratureRule:
    ds, di = basis.default_orders()
    return simplex_quadrature(order_s or ds, order_inner or di, basis.alpha)


def assemble(
    basis: HylleraasBasis,
    Z: float,
    lam: float,
    *,
    mass: float = 1.0,
    order_s: int | None = None,
    order_inner: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian and overlap matrices in the chi basis.

    The kinetic part uses the first-derivative form in (r1, r2, r12), so both
    matrices are symmetric.
    """
    if not Z > 0:
        raise ValueError("central strength Z must be positive")
    rule = _rule_for(basis, order_s, order_inner)
    T, V, S = _quadratic_forms(_samples(basis, rule), rule, Z, lam, mass)
    if not (np.all(np.isfinite(T)) and np.all(np.isfinite(S))):
        raise FloatingPointError(f"quadrature overflow/underflow at alpha={basis.alpha}")
    return T + V, S


def smallest_generalized_eigenpair(H, S, *, max_condition: float = 1e10, residual_tol: float = 1e-10):
    """Lowest eigenpair of H c = E S c with c normalized so that c^T S c = 1.

    S is equilibrated to unit diagonal before its condition number is checked;
    a failed Cholesky factorization or a condition number above
    ``max_condition`` raises :class:`ConditioningError`.
    """
    H = np.asarray(H, dtype=float)
    S = np.asarray(S, dtype=float)
    n = H.shape[0]
    if H.shape != (n, n) or S.shape != (n, n):
        raise ValueError("H and S must be square matrices of equal size")
    scale = max(np.abs(H).max(), np.abs(S).max(), 1.0)
    if np.abs(H - H.T).max() > 1e-12 * scale or np.abs(S - S.T).max() > 1e-12 * scale:
        raise ValueError("H and S must be symmetric")
    diag = np.diag(S)
    if np.any(diag <= 0):
        raise ConditioningError(n, math.inf, "nonpositive diagonal")
    d = 1.0 / np.sqrt(diag)
    Se = S * np.outer(d, d)
    He = H * np.outer(d, d)
    try:
        L = cholesky(Se, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(n, math.inf, "Cholesky factorization failed") from exc
    cond = np.linalg.cond(L) ** 2
    if not cond <= max_condition:
        raise ConditioningError(n, cond)
    C = solve_triangular(L, solve_triangular(L, He, lower=True).T, lower=True)
    C = 0.5 * (C + C.T)
    vals, vecs = eigh(C, subset_by_index=[0, 0])
    c = d * solve_triangular(L, vecs[:, 0], lower=True, trans="T")
    c /= math.sqrt(c @ S @ c)
    if c[np.argmax(np.abs(c))] < 0:
        c = -c
    E = float(c @ H @ c)
    Hc = H @ c
    res = np.linalg.norm(Hc - E * (S @ c))
    if res > residual_tol * max(np.linalg.norm(Hc), 1e-300):
        # one step of inverse iteration on the shifted pencil
        shift = E - 1e-8 * max(abs(E), 1.0)
        c = np.linalg.solve(H - shift * S, S @ c)
        c /= math.sqrt(c @ S @ c)
        if c[np.argmax(np.abs(c))] < 0:
            c = -c
        E = float(c @ H @ c)
    return E, c


def _orthonormal_forms(basis, rule, Z, lam, mass, max_condition):
    """T, V, S in an orthonormalized basis spanning the same space as chi.

    The weighted sample matrix is QR-factorized instead of forming S, so
    rounding errors grow with sqrt(cond(S)) rather than cond(S).
    """
    f, f1, f2, fu = _samples(basis, rule)
    A = f * np.sqrt(rule.weights)[:, None]
    colnorm = np.linalg.norm(A, axis=0)
    if np.any(colnorm == 0) or not np.all(np.isfinite(colnorm)):
        raise FloatingPointError(f"quadrature underflow at alpha={basis.alpha}")
    R = qr(A / colnorm, mode="r")[0][: basis.size]
    cond = np.linalg.cond(R) ** 2
    if not cond <= max_condition:
        raise ConditioningError(basis.size, cond, f"omega={basis.omega}, alpha={basis.alpha:.6g}")
    transform = solve_triangular(R, np.eye(basis.size)) / colnorm[:, None]
    g = tuple(a @ transform for a in (f, f1, f2, fu))
    T, V, S = _quadratic_forms(g, rule, Z, lam, mass)
    return T, V, S, transform


def _energy_at(basis, Z, lam, mass, order_s, order_inner, max_condition):
    rule = _rule_for(basis, order_s, order_inner)
    T, V, S, transform = _orthonormal_forms(basis, rule, Z, lam, mass, max_condition)
    E, cq = smallest_generalized_eigenpair(T + V, S)
    t = float(cq @ T @ cq)
    v = float(cq @ V @ cq)
    return E, t, v, transform @ cq, (rule.order_s, rule.order_inner)


def golden_section(f, a: float, b: float, tol: float = 1e-4):
    """Minimize a unimodal function on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def solve_two_body(
    Z: float,
    lam: float,
    omega: int,
    *,
    optimize_alpha: bool = True,
    alpha: float | None = None,
    mass: float = 1.0,
    order_s: int | None = None,
    order_inner: int | None = None,
    alpha_tol: float = 1e-4,
    max_condition: float = 1e18,
) -> HylleraasSolution:
    """Rayleigh-Ritz ground state in the basis of size set by ``omega``.

    With ``optimize_alpha`` the exponent is found by golden-section search on
    [0.5, 2.5] times the separable optimum mu Z; otherwise ``alpha`` is used
    (default mu Z).
    """
    if not Z > 0:
        raise ValueError("central strength Z must be positive")
    if not mass > 0:
        raise ValueError("mass must be positive")

    def run(a):
        return _energy_at(HylleraasBasis(a, omega), Z, lam, mass, order_s, order_inner, max_condition)

    if optimize_alpha:
        cache = {}

        def energy(a):
            cache[a] = run(a)
            return cache[a][0]

        lo, hi = 0.5 * mass * Z, 2.5 * mass * Z
        for _ in range(8):
            best, _ = golden_section(energy, lo, hi, alpha_tol)
            # optimum pinned at an edge: slide the bracket and search again
            if best > hi - 5 * alpha_tol:
                lo, hi = 0.5 * (lo + hi), 2.0 * hi
            elif best < lo + 5 * alpha_tol and lo > 1e-3 * mass * Z:
                lo, hi = 0.5 * lo, 0.5 * (lo + hi)
            else:
                break
        result = cache[best]
    else:
        best = mass * Z if alpha is None else alpha
        result = run(best)
    E, t, v, coeffs, orders = result
    return HylleraasSolution(
        basis=HylleraasBasis(best, omega),
        coeffs=coeffs,
        energy=E,
        kinetic=t,
        potential=v,
        virial_residual=abs(2.0 * t + v) / abs(E),
        quadrature_orders=orders,
        Z=Z,
        lam=lam,
        mass=mass,
    )


@dataclass
class ConvergenceStudy:
    solutions: list
    largest_usable_omega: int
    failure: str | None = None

    @property
    def energies(self) -> list[float]:
        return [s.energy for s in self.solutions]

    @property
    def last_change(self) -> float:
        e = self.energies
        return abs(e[-1] - e[-2]) if len(e) > 1 else math.inf


def convergence_study(Z: float, lam: float, omegas, **kwargs) -> ConvergenceStudy:
    """Solve for each omega in turn, stopping at the first conditioning failure."""
    sols = []
    failure = None
    for om in omegas:
        try:
            sols.append(solve_two_body(Z, lam, om, **kwargs))
        except ConditioningError as exc:
            failure = str(exc)
            break
    if not sols:
        raise ConditioningError(0, math.inf, failure or "no usable basis")
    return ConvergenceStudy(sols, sols[-1].basis.omega, failure)


def intrinsic_pair_energy(omega: int = 0, **kwargs) -> HylleraasSolution:
    """E(2;0) of the intrinsic two-body star via the reduced-mass problem.

    The relative motion is hydrogenic with reduced mass 1/2 and unit strength.
    Two independent copies of it (lam = 0) form a two-body problem the solver
    accepts; the returned energy is that of a single copy.
    """
    sol = solve_two_body(1.0, 0.0, omega, mass=0.5, **kwargs)
    sol.energy *= 0.5
    sol.kinetic *= 0.5
    sol.potential *= 0.5
    return sol
