import math

import numpy as np
import pytest

from fracspec.analysis import (
    compactness_report,
    diamagnetic_check,
    fractional_apply,
    interpolation_norm,
    lp_interpolation_check,
    tail_mass_check,
    truncation_modulus,
    weighted_norm,
)
from fracspec.errors import DomainError, ValidationError
from fracspec.extension import k_constant
from fracspec.operators import BackendSpec, GroundFunction, build_backend, magnetic_assembly, synthesize
from fracspec.specfun import erfc

BACKENDS = [
    BackendSpec("interval_analytic", length=math.pi, modes=12),
    BackendSpec("interval_fd", length=1.0, grid=30),
    BackendSpec("oscillator_analytic", modes=10),
    BackendSpec("box2d_fd", length=1.0, grid=6),
    BackendSpec("grushin_fd", length=1.0, grid=6, gamma=1.0),
    BackendSpec("magnetic_fd", length=1.0, grid=5, flux=0.3),
]


def denman_beavers_sqrt(a, iters=60):
    y, z = a.copy(), np.eye(a.shape[0])
    for _ in range(iters):
        y, z = 0.5 * (y + np.linalg.inv(z)), 0.5 * (z + np.linalg.inv(y))
    return y


def mm_file(tmp_path, a):
    n = a.shape[0]
    entries = [f"{i + 1} {j + 1} {float(a[i, j])!r}" for i in range(n) for j in range(i + 1)]
    path = tmp_path / "m.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    f"{n} {n} {len(entries)}\n" + "\n".join(entries) + "\n")
    return str(path)


def test_fractional_first_mode(interval_pi):
    f = GroundFunction(values=interval_pi.eigenvectors[:, 0])
    g = fractional_apply(interval_pi, 0.37, f)
    assert np.allclose(g.values, f.values, atol=1e-12)


@pytest.mark.parametrize("s,t", [(0.2, 0.3), (0.5, 0.45), (0.05, 0.9)])
def test_fractional_semigroup(interval_pi, rng, s, t):
    f = synthesize(rng.standard_normal(20), interval_pi)
    twice = fractional_apply(interval_pi, t, fractional_apply(interval_pi, s, f))
    once = fractional_apply(interval_pi, s + t, f)
    assert np.max(np.abs(twice.values - once.values)) <= 1e-10 * np.max(np.abs(once.values))


def test_fractional_matches_denman_beavers(tmp_path, rng):
    a = np.array([[4.0, -1.0, 0.5], [-1.0, 3.0, -0.7], [0.5, -0.7, 2.0]])
    sp = build_backend(BackendSpec("matrix_file", path=mm_file(tmp_path, a)))
    root = denman_beavers_sqrt(a)
    for _ in range(3):
        v = rng.standard_normal(3)
        g = fractional_apply(sp, k_constant(0.5), GroundFunction(values=v))
        assert np.allclose(g.values, root @ v, atol=1e-8)


def test_fractional_scaling(interval_pi, rng):
    f = synthesize(rng.standard_normal(10), interval_pi)
    g1 = fractional_apply(interval_pi, 0.6, GroundFunction(values=3.5 * f.values)).values
    g2 = 3.5 * fractional_apply(interval_pi, 0.6, f).values
    assert np.max(np.abs(g1 - g2)) <= 1e-12 * np.max(np.abs(g2))


def test_interpolation_norm_two_modes():
    sp = build_backend(BackendSpec("interval_analytic", length=math.pi, modes=2))
    f = GroundFunction(coefficients=np.array([1.0, 1.0]))
    assert interpolation_norm(sp, 0.5, f) == pytest.approx(math.sqrt(3), rel=1e-14)


@pytest.mark.parametrize("spec", BACKENDS, ids=lambda s: s.kind)
def test_interpolation_norm_sigma_zero(spec, rng):
    sp = build_backend(spec)
    f = synthesize(rng.standard_normal(sp.modes), sp)
    assert interpolation_norm(sp, 0.0, f) == pytest.approx(weighted_norm(sp, f), rel=1e-10)


@pytest.mark.parametrize("spec", BACKENDS, ids=lambda s: s.kind)
def test_interpolation_lower_bound_and_embedding(spec, rng):
    sp = build_backend(spec)
    lam1 = sp.eigenvalues[0]
    for _ in range(100):
        f = synthesize(rng.standard_normal(sp.modes), sp)
        s = rng.uniform(0.05, 0.95)
        norm = interpolation_norm(sp, s, f)
        ynorm = weighted_norm(sp, f)
        assert norm**2 >= lam1**s * ynorm**2 * (1 - 1e-12)
        assert ynorm <= lam1 ** (-s / 2) * norm * (1 + 1e-12)


def test_interpolation_norm_sigma_range(interval_pi):
    with pytest.raises(ValidationError):
        interpolation_norm(interval_pi, 2.5, GroundFunction(coefficients=[1.0]))


def test_truncation_three_modes():
    sp = build_backend(BackendSpec("interval_analytic", length=math.pi, modes=3))
    e = truncation_modulus(sp, 0.5, 2)
    assert e.bound == pytest.approx(3 ** -0.5, rel=1e-15)
    assert e.modulus == pytest.approx(0.5773502692, abs=1e-10)
    assert e.witness[2] == pytest.approx(3 ** -0.5)


def test_truncation_rank_zero(interval_pi):
    e = truncation_modulus(interval_pi, 0.3, 0)
    assert e.modulus == pytest.approx(interval_pi.eigenvalues[0] ** -0.15, abs=1e-12)


def test_compactness_sequence(interval_pi):
    rep = compactness_report(interval_pi, 0.5, seed=3)
    n = np.arange(interval_pi.modes)
    assert np.allclose(rep.moduli, (n + 1) ** -0.5, atol=1e-12)
    assert rep.non_increasing()
    assert all(b < a for a, b in zip(rep.moduli, rep.moduli[1:]))
    for e in rep.entries:
        assert e.mc_max <= e.bound + 1e-12
        assert e.energy_modulus == pytest.approx(e.modulus / math.sqrt(k_constant(0.5).ks))


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
def test_compactness_law_interval(s, interval_pi):
    rep = compactness_report(interval_pi, s, samples=50)
    n = np.arange(interval_pi.modes)
    assert np.allclose(rep.moduli, (n + 1.0) ** -s, atol=1e-12)


def test_compactness_reproducible(interval_pi):
    a = compactness_report(interval_pi, 0.4, seed=11)
    b = compactness_report(interval_pi, 0.4, seed=11)
    assert [e.mc_max for e in a.entries] == [e.mc_max for e in b.entries]


def test_truncation_rank_range(interval_pi):
    with pytest.raises(DomainError):
        truncation_modulus(interval_pi, 0.5, interval_pi.modes)
    with pytest.raises(DomainError):
        truncation_modulus(interval_pi, 0.5, -1)


def test_tail_ground_state(oscillator_fd):
    f = synthesize([1.0], oscillator_fd)
    tail, bound = tail_mass_check(oscillator_fd, f, 2.0)
    assert tail == pytest.approx(erfc(2.0), rel=1e-3)
    assert bound == pytest.approx(0.25, rel=1e-4)
    assert tail <= bound


def test_tail_vanishes_at_edge(oscillator_fd):
    f = synthesize([1.0, 0.5, -0.3], oscillator_fd)
    assert tail_mass_check(oscillator_fd, f, 11.99)[0] < 1e-50
    assert tail_mass_check(oscillator_fd, f, 8.0)[0] < 1e-25


def test_tail_random(oscillator_fd, rng):
    for _ in range(100):
        f = synthesize(rng.standard_normal(10), oscillator_fd)
        tail, bound = tail_mass_check(oscillator_fd, f, rng.uniform(0.3, 10.0))
        assert tail <= bound


def test_tail_analytic_backend(oscillator_analytic, rng):
    for _ in range(20):
        f = synthesize(rng.standard_normal(10), oscillator_analytic)
        tail, bound = tail_mass_check(oscillator_analytic, f, rng.uniform(0.5, 3.0))
        assert tail <= bound


def test_tail_errors(oscillator_fd, interval_pi):
    f = synthesize([1.0], oscillator_fd)
    with pytest.raises(DomainError):
        tail_mass_check(oscillator_fd, f, 13.0)
    with pytest.raises(ValidationError):
        tail_mass_check(interval_pi, synthesize([1.0], interval_pi), 1.0)


def test_lp_constant_equality():
    sp = build_backend(BackendSpec("interval_fd", length=1.0, grid=20))
    f = np.full(sp.size, 1.7)
    for q in (3, 4, 6):
        lhs, rhs = lp_interpolation_check(f, q, sp)
        assert lhs == pytest.approx(rhs, rel=1e-13)


def test_lp_degenerate_exponent(oscillator_fd, rng):
    f = synthesize(rng.standard_normal(5), oscillator_fd)
    lhs, rhs = lp_interpolation_check(f, 2.0, oscillator_fd)
    assert lhs == pytest.approx(rhs, rel=1e-13)
    assert lhs == pytest.approx(weighted_norm(oscillator_fd, f), rel=1e-13)


@pytest.mark.parametrize("q", [3.0, 4.0, 6.0])
def test_lp_random(oscillator_fd, rng, q):
    for _ in range(100):
        f = synthesize(rng.standard_normal(10), oscillator_fd)
        lhs, rhs = lp_interpolation_check(f, q, oscillator_fd)
        assert lhs <= rhs * (1 + 1e-12)


def test_lp_invalid_q(oscillator_fd):
    with pytest.raises(ValidationError):
        lp_interpolation_check(np.ones(oscillator_fd.size), 1.5, oscillator_fd)


def asm12():
    return magnetic_assembly(BackendSpec("magnetic_fd", length=1.0, grid=12, flux=0.0))


def test_diamagnetic_equality_case(rng):
    asm = asm12()
    u = rng.uniform(0.1, 2.0, asm.size)
    q0, qa = diamagnetic_check(asm, u)
    assert q0 == pytest.approx(qa, rel=1e-14)


@pytest.mark.parametrize("node", [0, 5, 13, 143])
def test_diamagnetic_single_node(node):
    asm = magnetic_assembly(BackendSpec("magnetic_fd", length=1.0, grid=12, flux=0.8))
    u = np.zeros(asm.size, dtype=complex)
    u[node] = 2.0 - 1.0j
    degree = np.sum(asm.edges == node)
    q0, qa = diamagnetic_check(asm, u)
    assert q0 == pytest.approx(degree * 5.0) and qa == pytest.approx(degree * 5.0)


def test_diamagnetic_random(rng):
    asm = asm12()
    for _ in range(1000):
        u = rng.standard_normal(asm.size) + 1j * rng.standard_normal(asm.size)
        q0, qa = diamagnetic_check(asm.with_phases(rng.uniform(-np.pi, np.pi, asm.theta.size)), u)
        assert q0 <= qa + 1e-12


def test_diamagnetic_matches_quadratic_form(rng):
    asm = magnetic_assembly(BackendSpec("magnetic_fd", length=1.0, grid=5, flux=0.6))
    u = rng.standard_normal(asm.size) + 1j * rng.standard_normal(asm.size)
    _, qa = diamagnetic_check(asm, u)
    form = np.real(np.vdot(u, asm.matrix() @ u)) * asm.h**2
    boundary = np.sum((4 - np.bincount(asm.edges.ravel(), minlength=asm.size)) * np.abs(u) ** 2)
    assert form == pytest.approx(qa + boundary, rel=1e-12)


def test_diamagnetic_dimension_mismatch():
    with pytest.raises(ValidationError):
        diamagnetic_check(asm12(), np.ones(3))
