"""Configuration-driven runs that tabulate bounds and check invariants.

A run is fully determined by its :class:`RunConfig`. It produces a
:class:`BoundsReport` with one row per computed energy, one entry per checked
assertion and a provenance block. The only wall-clock content is the
provenance timestamp, which report comparison ignores.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import tempfile
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import bounds_and_chains as bc
from .core_model import (
    BondWeights,
    SystemKind,
    SystemSpec,
    classical_energy,
    graph_identity_check,
    pair_terms,
    random_phase_point,
    reduce,
)
from .estimates import EnergyEstimate, lower_seed_from_converged
from .exact_solutions import HydrogenicProblem, hydrogenic_energy, intrinsic_two_body_energy
from .hartree_scf import (
    HartreeFunctionalCoeffs,
    RadialGrid,
    RadialOrbital,
    evaluate_forms,
    hartree_energy,
    limiting_coeffs,
    rescale,
    scf_solve,
)
from .two_body_variational import convergence_study, intrinsic_pair_energy

CSV_COLUMNS = ("system", "N", "method", "bound_kind", "value", "normalized")

STAGES = ("identities", "exact", "two_body", "hartree", "bounds")

HYLLERAAS_VIRIAL_TOL = 1e-3
HYLLERAAS_STABILITY_TOL = 2e-4
HARTREE_VIRIAL_TOL = 1e-4
PAIR_DECOMPOSITION_TOL = 1e-12
SCALING_TOL = 1e-10


@dataclass
class RunConfig:
    system: str = SystemKind.COULOMB_ATOM.value
    N_min: int = 2
    N_max: int = 6
    z: int = 1
    mass_ratio: float = 1.0
    pair_rescale: bool = False
    omega: int = 8
    alpha_policy: str = "optimize"
    alpha: float | None = None
    grid_r_max: float = 40.0
    grid_n: int = 8000
    scf_tol: float = 1e-9
    scf_mixing: float = 0.3
    seed_policy: str = "in-repo"
    seed_margin: float = 10.0
    lieb_const: float = 1.0
    hall_B: float = 1.0
    identity_points: int = 1000
    identity_N_max: int = 10
    graph_N_max: int = 8
    rng_seed: int = 20240601
    out_dir: str = "."

    def __post_init__(self):
        self.system = SystemKind(self.system).value
        if self.N_max < self.N_min:
            raise ValueError(f"empty N range {self.N_min}..{self.N_max}")
        if self.N_min < 1:
            raise ValueError("N_min must be positive")
        if self.system == SystemKind.NEWTON_INTRINSIC.value and self.N_min < 2:
            raise ValueError("NewtonIntrinsic needs N_min >= 2")
        if self.pair_rescale and self.system != SystemKind.NEWTON_FIXED_GRAIN.value:
            raise ValueError("pair_rescale is supported for NewtonFixedGrain only")
        for name in ("grid_r_max", "scf_tol", "scf_mixing", "seed_margin", "lieb_const", "hall_B", "mass_ratio"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.omega < 1:
            raise ValueError("omega must be at least 1 (the stability check compares two orders)")
        if self.alpha_policy not in ("optimize", "fixed"):
            raise ValueError("alpha_policy must be 'optimize' or 'fixed'")
        if self.alpha_policy == "fixed" and not (self.alpha and self.alpha > 0):
            raise ValueError("fixed alpha_policy needs a positive alpha")
        if self.seed_policy not in ("in-repo", "none"):
            raise ValueError("seed_policy must be 'in-repo' or 'none'")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in an unsigned 64-bit integer")

    @property
    def kind(self) -> SystemKind:
        return SystemKind(self.system)

    @property
    def Ns(self) -> range:
        return range(self.N_min, self.N_max + 1)

    def spec(self, N: int) -> SystemSpec:
        return SystemSpec(self.kind, N, self.z, self.mass_ratio, self.pair_rescale)

    def grid(self) -> RadialGrid:
        return RadialGrid(self.grid_r_max, self.grid_n)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Row:
    system: str
    N: int | None
    method: str
    bound_kind: str
    value: float
    normalized: float | None = None


@dataclass
class Assertion:
    name: str
    status: str  # pass | fail | error
    residual: float | None = None
    threshold: float | None = None
    detail: str = ""


@dataclass
class BoundsReport:
    rows: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(a.status == "pass" for a in self.assertions)

    def as_dict(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "assertions": [asdict(a) for a in self.assertions],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundsReport":
        return cls(
            rows=[Row(**r) for r in d["rows"]],
            assertions=[Assertion(**a) for a in d["assertions"]],
            provenance=d["provenance"],
        )

    def comparable(self) -> dict:
        d = self.as_dict()
        d["provenance"] = {k: v for k, v in d["provenance"].items() if k != "timestamp"}
        return d

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoundsReport):
            return NotImplemented
        return self.comparable() == other.comparable()


class _Recorder:
    """Collects rows and assertions; module errors become failed assertions."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.report = BoundsReport()

    def row(self, est: EnergyEstimate, normalized: bool = True) -> None:
        norm = None
        if normalized:
            try:
                norm = est.value / bc.polynomial(self.cfg.kind, est.N, self.cfg.pair_rescale)
            except ValueError:
                norm = None
        self.report.rows.append(Row(est.system, est.N, est.method, est.bound_kind, est.value, norm))

    def check(self, name: str, residual: float, threshold: float, detail: str = "") -> bool:
        ok = bool(residual <= threshold)
        self.report.assertions.append(Assertion(name, "pass" if ok else "fail", float(residual), threshold, detail))
        return ok

    def error(self, name: str, exc: BaseException) -> None:
        self.report.assertions.append(Assertion(name, "error", None, None, f"{type(exc).__name__}: {exc}"))


# -- identity suite ------------------------------------------------------------


def pair_decomposition_residual(spec: SystemSpec, rng: np.random.Generator, points: int) -> float:
    """Worst relative mismatch between the pair sum and the Hamiltonian.

    The mismatch is measured against the sum of absolute pair summands, which
    stays meaningful when positive and negative terms nearly cancel.
    """
    sys = reduce(spec)
    worst = 0.0
    for _ in range(points):
        x = random_phase_point(rng, spec.N)
        terms = pair_terms(sys, x)
        total = math.fsum(terms.values())
        scale = max(math.fsum(abs(t) for t in terms.values()), 1e-300)
        worst = max(worst, abs(total - classical_energy(sys, x)) / scale)
    return worst


def random_bond_weights(rng: np.random.Generator, N: int) -> BondWeights:
    return BondWeights.from_function(
        N, lambda k, l: Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 100)))
    )


def scaling_law_residual(lams=(0.5, 2.0, 3.7), grid: RadialGrid | None = None) -> float:
    """Worst relative error of (k, c, i) -> (lam^2 k, lam c, lam i) under dilation."""
    grid = grid or RadialGrid(40.0, 4000)
    orb = RadialOrbital.from_function(grid, lambda r: (1.0 + 0.3 * r) * np.exp(-0.8 * r))
    f = evaluate_forms(orb)
    worst = 0.0
    for lam in lams:
        g = evaluate_forms(rescale(orb, lam))
        for got, want in ((g.kinetic, lam**2 * f.kinetic), (g.central, lam * f.central), (g.pair, lam * f.pair)):
            worst = max(worst, abs(got - want) / abs(want))
    return worst


def _identities(rec: _Recorder, rng: np.random.Generator) -> None:
    cfg = rec.cfg
    for N in range(2, cfg.identity_N_max + 1):
        name = f"pair-decomposition[{cfg.system},N={N}]"
        try:
            res = pair_decomposition_residual(cfg.spec(N), rng, cfg.identity_points)
            rec.check(name, res, PAIR_DECOMPOSITION_TOL, f"{cfg.identity_points} random phase points")
        except Exception as exc:  # noqa: BLE001 - reported, run continues
            rec.error(name, exc)
    for N in range(3, cfg.graph_N_max + 1):
        name = f"complete-graph-bond-identity[N={N}]"
        try:
            lhs, rhs = graph_identity_check(random_bond_weights(rng, N))
            rec.check(name, float(abs(lhs - rhs)), 0.0, "exact rational equality")
        except Exception as exc:  # noqa: BLE001
            rec.error(name, exc)
    try:
        rec.check("dilation-scaling-law[k,c,i]", scaling_law_residual(), SCALING_TOL)
    except Exception as exc:  # noqa: BLE001
        rec.error("dilation-scaling-law[k,c,i]", exc)


# -- exact values and two-body solves ----------------------------------------


def _exact(rec: _Recorder) -> None:
    cfg = rec.cfg
    e = hydrogenic_energy(HydrogenicProblem(1.0, 1.0))
    rec.check("hydrogenic-exact[mu=gamma=1]", abs(e + 0.5) / 0.5, 1e-6)
    if cfg.kind is SystemKind.NEWTON_INTRINSIC:
        rec.row(EnergyEstimate(intrinsic_two_body_energy(), "exact", "exact", cfg.system, 2))
    if cfg.kind is SystemKind.NEWTON_FIXED_GRAIN and cfg.N_min <= 1:
        rec.row(EnergyEstimate(-0.5, "exact", "exact", cfg.system, 1), normalized=False)


def _hylleraas_kwargs(cfg: RunConfig) -> dict:
    if cfg.alpha_policy == "fixed":
        return {"optimize_alpha": False, "alpha": cfg.alpha}
    return {}


def _two_body_problem(cfg: RunConfig) -> tuple[float, float, int]:
    """(Z, lam, N_seed) of the Hylleraas problem that seeds the chain.

    For the fixed grain without rescaling the seed is E(3;M) >= 3 E_2Newt(2;M/2),
    a two-body problem with the same central and twice the pair coupling.
    """
    if cfg.kind is SystemKind.NEWTON_FIXED_GRAIN and not cfg.pair_rescale:
        return 1.0, -2.0 * cfg.mass_ratio, 3
    red = reduce(cfg.spec(2))
    return red.central_coeff, red.pair_coeff, 2


def _two_body(rec: _Recorder, state: dict) -> None:
    cfg = rec.cfg
    kw = _hylleraas_kwargs(cfg)
    if cfg.kind is SystemKind.NEWTON_INTRINSIC:
        sol = intrinsic_pair_energy(cfg.omega, **kw)
        est = EnergyEstimate(sol.energy, "upper", "hylleraas", cfg.system, 2)
        rec.row(est)
        rec.check("intrinsic-two-body-hylleraas-vs-exact", abs(sol.energy + 0.25), 1e-5)
        state["E2_upper"] = est
        state["seed"] = EnergyEstimate(-0.25, "exact", "exact", cfg.system, 2)
        return

    Z, lam, n_seed = _two_body_problem(cfg)
    study = convergence_study(Z, lam, [cfg.omega - 1, cfg.omega], **kw)
    if study.failure:
        rec.report.assertions.append(Assertion("hylleraas-conditioning", "fail", None, None, study.failure))
    sol = study.solutions[-1]
    change = study.last_change
    rec.check(f"hylleraas-virial[Omega={sol.basis.omega}]", sol.virial_residual, HYLLERAAS_VIRIAL_TOL)
    rec.check(f"hylleraas-omega-stability[Omega={sol.basis.omega}]", change, HYLLERAAS_STABILITY_TOL)
    upper = EnergyEstimate(sol.energy, "upper", "hylleraas", cfg.system, 2, change)
    if n_seed == 2:
        rec.row(upper)
        state["E2_upper"] = upper
        state["seed"] = lower_seed_from_converged(upper, cfg.seed_margin)
    else:
        state["seed"] = lower_seed_from_converged(upper, cfg.seed_margin).scaled(
            Fraction(3), N=3, method="three-times-2newt-hylleraas-minus-margin"
        )
        # the plain two-body fixed-grain energy is still solved for ordering checks
        red = reduce(cfg.spec(2))
        plain = convergence_study(red.central_coeff, red.pair_coeff, [cfg.omega], **kw).solutions[-1]
        e2 = EnergyEstimate(plain.energy, "upper", "hylleraas", cfg.system, 2)
        rec.row(e2)
        state["E2_upper"] = e2
    if cfg.seed_policy == "in-repo":
        rec.row(state["seed"])


# -- Hartree sweep -------------------------------------------------------------


def _hartree(rec: _Recorder, state: dict) -> None:
    cfg = rec.cfg
    state["hartree"] = {}
    for N in cfg.Ns:
        name = f"hartree-virial[N={N}]"
        try:
            est, res = hartree_energy(cfg.spec(N), cfg.grid(), mixing=cfg.scf_mixing, tol=cfg.scf_tol)
        except Exception as exc:  # noqa: BLE001
            rec.error(name, exc)
            continue
        rec.row(est)
        rec.check(name, res.virial_residual, HARTREE_VIRIAL_TOL, "relative dilation derivative")
        state["hartree"][N] = est


# -- bounds and cross-module ordering ---------------------------------------


def _ordering(rec: _Recorder, name: str, lower: EnergyEstimate, upper: EnergyEstimate) -> None:
    rec.check(name, lower.value - upper.value, 0.0, f"{lower.method} <= {upper.method}")


def _bounds(rec: _Recorder, state: dict) -> None:
    cfg = rec.cfg
    kind = cfg.kind
    base = bc.base_N(kind, cfg.pair_rescale)
    for N in range(base + 1, cfg.N_max + 1):
        name = f"telescoped-chain-equals-polynomial-ratio[N={N}]"
        tel = bc.telescope(kind, N, cfg.pair_rescale)
        ratio = Fraction(bc.polynomial(kind, N, cfg.pair_rescale), bc.polynomial(kind, base, cfg.pair_rescale))
        rec.check(name, float(abs(tel - ratio)), 0.0, f"{tel} vs {ratio}")

    hartree = state.get("hartree", {})
    E2_upper = state.get("E2_upper")
    if E2_upper is not None and 2 in hartree:
        _ordering(rec, "hylleraas-two-body-le-hartree[N=2]", E2_upper, hartree[2])

    seed = state.get("seed")
    if seed is None or cfg.seed_policy == "none":
        return
    at_base = bc.corollary_lower_bound(kind, base, seed, cfg.pair_rescale)
    rec.check("corollary-at-base-equals-seed", abs(at_base.value - seed.value), 0.0)
    corollary = {}
    for N in cfg.Ns:
        if N <= base:
            continue
        low = bc.corollary_lower_bound(kind, N, seed, cfg.pair_rescale)
        corollary[N] = low
        rec.row(low)
        if N in hartree:
            _ordering(rec, f"corollary-lower-le-hartree-upper[N={N}]", low, hartree[N])

    if kind in (SystemKind.COULOMB_ATOM, SystemKind.NEWTON_INTRINSIC) and seed.N == 2:
        for N in cfg.Ns:
            if N < 2:
                continue
            ll = bc.levy_leblond_bound(N, seed)
            rec.row(ll)
            if N >= 3:
                _ordering(rec, f"levy-leblond-le-corollary[N={N}]", ll, corollary[N])

    if kind is SystemKind.COULOMB_ATOM:
        for N in cfg.Ns:
            rec.row(bc.lieb_bound(N, cfg.lieb_const, cfg.system))
            rec.row(bc.hall_upper_bound(N, cfg.hall_B, cfg.system))


def _provenance(cfg: RunConfig) -> dict:
    return {
        "config": asdict(cfg),
        "rng_seed": cfg.rng_seed,
        "versions": {
            "bosonic_bounds": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def run(config: RunConfig, stages=STAGES) -> BoundsReport:
    """Execute the requested stages in a fixed order and assemble the report."""
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages: {sorted(unknown)}")
    rec = _Recorder(config)
    rng = np.random.default_rng(config.rng_seed)
    state: dict = {}
    steps = {
        "identities": lambda: _identities(rec, rng),
        "exact": lambda: _exact(rec),
        "two_body": lambda: _two_body(rec, state),
        "hartree": lambda: _hartree(rec, state),
        "bounds": lambda: _bounds(rec, state),
    }
    for stage in STAGES:
        if stage not in stages:
            continue
        try:
            steps[stage]()
        except Exception as exc:  # noqa: BLE001 - a failed stage must not abort the run
            rec.error(f"stage:{stage}", exc)
    rec.report.provenance = _provenance(config)
    return rec.report


def limits_report(config: RunConfig) -> BoundsReport:
    """Minima of the large-N limiting Hartree functionals."""
    rec = _Recorder(config)
    grid = config.grid()
    cases = [
        (SystemKind.COULOMB_ATOM.value, limiting_coeffs(SystemKind.COULOMB_ATOM)),
        (SystemKind.NEWTON_FIXED_GRAIN.value, limiting_coeffs(SystemKind.NEWTON_FIXED_GRAIN, config.mass_ratio)),
        (SystemKind.NEWTON_INTRINSIC.value, limiting_coeffs(SystemKind.NEWTON_INTRINSIC)),
    ]
    for system, coeffs in cases:
        name = f"limit-virial[{system}]"
        try:
            res = scf_solve(coeffs, grid, config.scf_mixing, config.scf_tol)
        except Exception as exc:  # noqa: BLE001
            rec.error(name, exc)
            continue
        rec.report.rows.append(Row(system, None, "hartree-limit", "upper", res.energy, res.energy))
        rec.check(name, res.virial_residual, HARTREE_VIRIAL_TOL)
    rec.report.provenance = _provenance(config)
    return rec.report


# -- output ----------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def to_csv(report: BoundsReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def to_json(report: BoundsReport) -> str:
    return json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> BoundsReport:
    return BoundsReport.from_dict(json.loads(text))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: BoundsReport, fmt: str, out_dir, stem: str = "report") -> Path:
    """Write the report as ``<out_dir>/<stem>.csv`` or ``.json``; returns the path."""
    if fmt == "csv":
        text = to_csv(report)
    elif fmt == "json":
        text = to_json(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(out_dir) / f"{stem}.{fmt}"
    _atomic_write(path, text)
    return path
