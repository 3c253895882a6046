"""Desk-scale acceptance checks, shared by ``fracspec report`` and the tests.

Each ``criterion_*`` function returns a :class:`Criterion` holding
individual checks. Every check records the measured worst-case ``value``
and the ``bound`` it must stay under (or above, for ``kind="ge"``).
Nothing here depends on wall-clock time, so reports are reproducible.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _oracles
from .analysis import compactness_report, diamagnetic_check, lp_interpolation_check, tail_mass_check
from .eigensolve import eigh_hermitian, eigh_symmetric
from .extension import dtn_limit, extension_energy, k_constant, mode_profile, spectral_energy
from .operators import (
    BackendSpec,
    GroundFunction,
    build_backend,
    grushin_dimensions,
    magnetic_assembly,
    magnetic_spectrum,
    synthesize,
)
from .specfun import bessel_k

S_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)
LAMBDA_GRID = (0.5, 1.0, 4.0, 25.0)

ENERGY_BACKENDS = {
    "interval_analytic": BackendSpec("interval_analytic", length=math.pi, modes=30),
    "interval_fd": BackendSpec("interval_fd", length=math.pi, grid=200),
    "oscillator_analytic": BackendSpec("oscillator_analytic", modes=20),
    "box2d_fd": BackendSpec("box2d_fd", length=1.0, grid=20),
    "grushin_fd": BackendSpec("grushin_fd", length=1.0, grid=16, gamma=1.0),
    "potential_fd": BackendSpec("potential_fd", length=6.0, grid=400, potential="one_plus_x4"),
}


@dataclass
class Check:
    name: str
    value: float
    bound: float
    kind: str = "le"

    @property
    def passed(self):
        if self.kind == "eq":
            return self.value == self.bound
        if self.kind == "ge":
            return self.value >= self.bound
        return self.value <= self.bound

    def as_dict(self):
        return {"name": self.name, "pass": bool(self.passed), "value": self.value, "bound": self.bound}


@dataclass
class Criterion:
    number: int
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, value, bound, kind="le"):
        self.checks.append(Check(name, float(value), float(bound), kind))

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        worst = ", ".join(f"{c.name}={c.value:.3g}/{c.bound:.3g}" for c in self.checks if not c.passed)
        return f"[{status}] criterion {self.number}: {self.title}" + (f" ({worst})" if worst else "")


def _rel(a, b):
    return abs(a - b) / abs(b)


def random_coefficients(rng, modes, active=20):
    c = np.zeros(modes)
    k = min(active, modes)
    c[:k] = rng.standard_normal(k)
    return c


def criterion_1(seed=7, backends=None):
    crit = Criterion(1, "energy identity")
    rng = np.random.default_rng(seed)
    for name, spec in (backends or ENERGY_BACKENDS).items():
        sp = build_backend(spec)
        worst = 0.0
        for s in S_GRID:
            f = GroundFunction(coefficients=random_coefficients(rng, sp.modes))
            lhs = extension_energy(sp, s, f)
            rhs = spectral_energy(sp, s, f)
            worst = max(worst, _rel(lhs, rhs))
        crit.add(f"{name}.rel_err", worst, 1e-6)
    return crit


def criterion_2():
    crit = Criterion(2, "DtN constant")
    worst = 0.0
    for s in S_GRID:
        order = k_constant(s)
        for lam in LAMBDA_GRID:
            got = dtn_limit(mode_profile(lam, order, 1.0))
            worst = max(worst, _rel(got, order.ks * lam**s))
    crit.add("dtn.rel_err", worst, 1e-5)
    crit.add("K(1/2).abs_err", abs(k_constant(0.5).ks - 1.0), 1e-12)
    return crit


def _ortho_recon(dec, m):
    q = dec.eigenvectors
    ortho = np.max(np.abs(q.conj().T @ q - np.eye(q.shape[1])))
    recon = np.max(np.abs(dec.reconstruct() - m))
    return ortho, recon


def criterion_3(seed=7):
    crit = Criterion(3, "eigensolver contract")
    rng = np.random.default_rng(seed)
    o_w = r_w = 0.0
    for n in (5, 50, 400):
        a = rng.standard_normal((n, n))
        a = a + a.T
        o, r = _ortho_recon(eigh_symmetric(a), a)
        o_w, r_w = max(o_w, o), max(r_w, r)
    crit.add("symmetric.orthonormality", o_w, 1e-10)
    crit.add("symmetric.reconstruction", r_w, 1e-10)
    o_w = r_w = 0.0
    for n in (6, 50, 200):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = a + a.conj().T
        o, r = _ortho_recon(eigh_hermitian(a), a)
        o_w, r_w = max(o_w, o), max(r_w, r)
    crit.add("hermitian.orthonormality", o_w, 1e-10)
    crit.add("hermitian.reconstruction", r_w, 1e-10)

    n = 200
    sp = build_backend(BackendSpec("interval_fd", length=math.pi, grid=n))
    h = math.pi / (n + 1)
    k = np.arange(1, n + 1)
    exact = 2.0 / h**2 * (1.0 - np.cos(k * h))
    crit.add("interval_fd.rel_err", np.max(np.abs(sp.eigenvalues - exact) / exact), 1e-9)

    coarse = build_backend(BackendSpec("interval_fd", length=math.pi, grid=50, modes=3))
    fine = build_backend(BackendSpec("interval_fd", length=math.pi, grid=101, modes=3))
    target = np.array([1.0, 4.0, 9.0])
    ratio = np.abs(coarse.eigenvalues - target) / np.abs(fine.eigenvalues - target)
    crit.add("richardson.ratio_min", ratio.min(), 3.8, "ge")
    crit.add("richardson.ratio_max", ratio.max(), 4.2)
    return crit


def criterion_4(seed=7):
    crit = Criterion(4, "compactness law")
    cases = (
        ("interval_analytic", BackendSpec("interval_analytic", length=math.pi, modes=50), 0.5),
        ("oscillator_analytic", BackendSpec("oscillator_analytic", modes=20), 0.25),
    )
    for name, spec, s in cases:
        sp = build_backend(spec)
        rep = compactness_report(sp, s, seed=seed)
        attain = max(abs(e.modulus - e.bound) for e in rep.entries)
        excess = max(e.mc_max - e.bound for e in rep.entries)
        crit.add(f"{name}.witness_attains", attain, 1e-12)
        crit.add(f"{name}.mc_excess", excess, 1e-12)
        crit.add(f"{name}.non_increasing", float(rep.non_increasing()), 1.0, "eq")
        if name == "interval_analytic":
            last = rep.entries[-1]
            formula = float(((last.rank + 1) ** 2) ** (-s / 2))
            crit.add(f"{name}.final_modulus_err", abs(last.modulus - formula), 1e-12)
    return crit


def criterion_5():
    crit = Criterion(5, "special functions")
    x = np.logspace(-3, math.log10(30.0), 200)
    closed = np.sqrt(math.pi / (2.0 * x)) * np.exp(-x)
    crit.add("K_1/2.rel_err", np.max(np.abs(bessel_k(0.5, x) / closed - 1.0)), 1e-12)
    worst = 0.0
    for nu, ref in _oracles.BESSEL_K.items():
        got = bessel_k(nu, np.array(_oracles.BESSEL_X))
        worst = max(worst, float(np.max(np.abs(got / np.array(ref) - 1.0))))
    crit.add("K_nu.oracle_rel_err", worst, 1e-8)
    return crit


def criterion_6(seed=7, samples=100):
    crit = Criterion(6, "harmonic oscillator")
    sp = build_backend(BackendSpec("oscillator_fd", length=12.0, grid=2000, modes=20))
    levels = 2.0 * np.arange(5) + 1.0
    crit.add("levels.rel_err", np.max(np.abs(sp.eigenvalues[:5] - levels) / levels), 5e-3)
    rng = np.random.default_rng(seed)
    margin = math.inf
    for _ in range(samples):
        f = synthesize(rng.standard_normal(10), sp)
        radius = rng.uniform(0.5, 8.0)
        tail, bound = tail_mass_check(sp, f, radius)
        margin = min(margin, bound - tail)
    crit.add("tail_mass.min_margin", margin, 0.0, "ge")
    for q in (3.0, 4.0, 6.0):
        margin = math.inf
        for _ in range(samples):
            f = synthesize(rng.standard_normal(10), sp)
            lhs, rhs = lp_interpolation_check(f, q, sp)
            margin = min(margin, rhs - lhs)
        crit.add(f"lp_q{q:g}.min_margin", margin, 0.0, "ge")
    return crit


def criterion_7(seed=7, samples=1000, grid=12):
    crit = Criterion(7, "diamagnetic inequality")
    spec = BackendSpec("magnetic_fd", length=1.0, grid=grid, flux=0.0)
    asm = magnetic_assembly(spec)
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(samples):
        u = rng.standard_normal(asm.size) + 1j * rng.standard_normal(asm.size)
        phases = rng.uniform(-math.pi, math.pi, asm.theta.shape[0])
        q0, qa = diamagnetic_check(asm.with_phases(phases), u)
        worst = max(worst, q0 - qa)
    crit.add("q0_minus_qA.max", worst, 1e-12)
    base = build_backend(BackendSpec("box2d_fd", length=1.0, grid=grid))
    zero = magnetic_spectrum(spec)
    crit.add("flux0.spectrum_err", np.max(np.abs(zero.eigenvalues - base.eigenvalues)), 1e-10)
    lam0 = zero.eigenvalues[0]
    for flux in (0.1, 0.3, 0.5):
        sp = magnetic_spectrum(BackendSpec("magnetic_fd", length=1.0, grid=grid, flux=flux))
        crit.add(f"flux{flux:g}.lambda1_gain", sp.eigenvalues[0] - lam0, -1e-12, "ge")
    return crit


def criterion_8(grid=16):
    crit = Criterion(8, "Grushin operator")
    g0 = build_backend(BackendSpec("grushin_fd", length=1.0, grid=grid, gamma=0.0))
    box = build_backend(BackendSpec("box2d_fd", length=1.0, grid=grid))
    crit.add("gamma0.spectrum_err", np.max(np.abs(g0.eigenvalues - box.eigenvalues)), 1e-10)
    mismatches = 0
    for g in (0.0, 0.5, 1.0, 2.0):
        sp = build_backend(BackendSpec("grushin_fd", length=1.0, grid=6, gamma=g))
        dim = 1 + (1 + g) * 1
        crit_exp = math.inf if dim == 2 else 2 * dim / (dim - 2)
        mismatches += sp.meta["N_gamma"] != dim
        mismatches += sp.meta["critical_exponent"] != crit_exp
        mismatches += grushin_dimensions(g) != (dim, crit_exp)
    crit.add("dimension_mismatches", mismatches, 0, "eq")
    return crit


def run_all(seed=7):
    """Criteria 1-8. Criterion 9 (report determinism) is checked by
    comparing two reports and lives in the test suite."""
    return [
        criterion_1(seed),
        criterion_2(),
        criterion_3(seed),
        criterion_4(seed),
        criterion_5(),
        criterion_6(seed),
        criterion_7(seed),
        criterion_8(),
    ]
