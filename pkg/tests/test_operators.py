import math

import numpy as np
import pytest

from fracspec.errors import ValidationError
from fracspec.operators import (
    BackendSpec,
    GroundFunction,
    build_backend,
    magnetic_assembly,
    magnetic_spectrum,
    oscillator_spectrum,
    project,
    synthesize,
)

ALL_SPECS = [
    BackendSpec("interval_analytic", length=math.pi, modes=12),
    BackendSpec("interval_fd", length=2.0, grid=40),
    BackendSpec("box2d_fd", length=1.0, grid=8),
    BackendSpec("oscillator_analytic", modes=15),
    BackendSpec("oscillator_fd", length=9.0, grid=300, modes=15),
    BackendSpec("potential_fd", length=5.0, grid=120, potential="b_const_plus_x2"),
    BackendSpec("potential_fd", length=4.0, grid=120, potential="one_plus_x4"),
    BackendSpec("grushin_fd", length=1.0, grid=7, gamma=0.5),
    BackendSpec("magnetic_fd", length=1.0, grid=6, flux=0.2),
]


def write_mm(path, header, size, entries):
    lines = [header, "% comment", size] + entries
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.kind)
def test_spectrum_invariants(spec):
    sp = build_backend(spec)
    assert sp.eigenvalues[0] > 0
    assert np.all(np.diff(sp.eigenvalues) >= 0)
    assert np.all(sp.weights > 0)
    assert np.max(np.abs(sp.gram() - np.eye(sp.modes))) <= 1e-10


def test_interval_analytic_dirichlet():
    sp = build_backend(BackendSpec("interval_analytic", length=math.pi, modes=3))
    assert np.allclose(sp.eigenvalues, [1, 4, 9], atol=1e-14)
    x = sp.nodes
    for k in range(3):
        assert np.allclose(sp.eigenvectors[:, k], math.sqrt(2 / math.pi) * np.sin((k + 1) * x), atol=1e-14)


def test_interval_fd_exact_discrete_spectrum():
    n = 60
    sp = build_backend(BackendSpec("interval_fd", length=math.pi, grid=n))
    h = math.pi / (n + 1)
    k = np.arange(1, n + 1)
    assert np.allclose(sp.eigenvalues, 2 / h**2 * (1 - np.cos(k * h)), rtol=1e-11)


def test_interval_fd_second_order():
    lam = []
    for n in (40, 81, 163):
        lam.append(build_backend(BackendSpec("interval_fd", length=math.pi, grid=n, modes=3)).eigenvalues)
    target = np.array([1.0, 4.0, 9.0])
    e = [np.abs(x - target) for x in lam]
    for a, b in zip(e, e[1:]):
        assert np.all((a / b >= 3.8) & (a / b <= 4.2))


def test_grushin_gamma_zero_is_box():
    g = build_backend(BackendSpec("grushin_fd", length=1.0, grid=10, gamma=0.0))
    b = build_backend(BackendSpec("box2d_fd", length=1.0, grid=10))
    assert np.max(np.abs(g.eigenvalues - b.eigenvalues)) <= 1e-10


@pytest.mark.parametrize("grid", [5, 6])
def test_grushin_nodes_avoid_axis(grid):
    sp = build_backend(BackendSpec("grushin_fd", length=1.0, grid=grid, gamma=1.0))
    assert np.min(np.abs(sp.nodes[:, 0])) > 0


@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 2.0])
def test_grushin_dimension_metadata(gamma):
    sp = build_backend(BackendSpec("grushin_fd", length=1.0, grid=4, gamma=gamma))
    dim = 1 + (1 + gamma)
    assert sp.meta["N_gamma"] == dim
    assert sp.meta["critical_exponent"] == (math.inf if dim == 2 else 2 * dim / (dim - 2))


def test_grushin_degeneracy_lowers_spectrum():
    # weight (1+g)^2 |x|^{2g} < 1 near the axis softens the y-stiffness there
    a = build_backend(BackendSpec("grushin_fd", length=1.0, grid=10, gamma=2.0))
    b = build_backend(BackendSpec("box2d_fd", length=1.0, grid=10))
    assert a.eigenvalues[0] < b.eigenvalues[0]


def test_oscillator_analytic_levels():
    sp = oscillator_spectrum(BackendSpec("oscillator_analytic", modes=3))
    assert np.allclose(sp.eigenvalues, [1, 3, 5])
    centre = np.argmin(np.abs(sp.nodes))
    assert sp.nodes[centre] == pytest.approx(0.0, abs=1e-14)
    assert sp.eigenvectors[centre, 0] == pytest.approx(math.pi**-0.25, rel=1e-14)


def test_oscillator_fd_levels(oscillator_fd):
    assert np.all(np.abs(oscillator_fd.eigenvalues[:5] / np.array([1, 3, 5, 7, 9]) - 1) < 5e-3)


def test_oscillator_fd_converges():
    errs = []
    for n in (250, 500, 1000):
        sp = build_backend(BackendSpec("oscillator_fd", length=10.0, grid=n, modes=5))
        errs.append(np.max(np.abs(sp.eigenvalues - [1, 3, 5, 7, 9])))
    assert errs[0] > errs[1] > errs[2]


def test_oscillator_fd_matches_hermite_functions(oscillator_fd):
    # eigenvector sign is fixed by the largest entry; psi_0 is positive
    x = oscillator_fd.nodes
    psi0 = math.pi**-0.25 * np.exp(-0.5 * x * x)
    assert np.max(np.abs(oscillator_fd.eigenvectors[:, 0] - psi0)) < 1e-4


def test_oscillator_limits():
    with pytest.raises(ValidationError):
        build_backend(BackendSpec("oscillator_analytic", modes=61))
    with pytest.raises(ValidationError):
        build_backend(BackendSpec("oscillator_fd", length=5.0, grid=100))
    with pytest.raises(ValidationError):
        oscillator_spectrum(BackendSpec("interval_fd", length=1.0, grid=4))


def test_magnetic_zero_flux_is_box():
    m = magnetic_spectrum(BackendSpec("magnetic_fd", length=1.0, grid=9, flux=0.0))
    b = build_backend(BackendSpec("box2d_fd", length=1.0, grid=9))
    assert np.max(np.abs(m.eigenvalues - b.eigenvalues)) <= 1e-10


def test_magnetic_gauge_invariance(rng):
    spec = BackendSpec("magnetic_fd", length=1.0, grid=7, flux=0.4)
    chi = rng.uniform(-3, 3, 49)
    a = magnetic_spectrum(spec)
    b = magnetic_spectrum(spec, gauge=chi)
    assert np.max(np.abs(a.eigenvalues - b.eigenvalues)) <= 1e-10


def test_pure_gauge_field_has_zero_flux_spectrum(rng):
    spec = BackendSpec("magnetic_fd", length=1.0, grid=7, flux=0.0)
    a = magnetic_spectrum(spec, gauge=rng.uniform(-3, 3, 49))
    b = build_backend(BackendSpec("box2d_fd", length=1.0, grid=7))
    assert np.max(np.abs(a.eigenvalues - b.eigenvalues)) <= 1e-10


@pytest.mark.parametrize("flux", [0.1, 0.3, 0.5, 1.3])
def test_diamagnetic_ground_state(flux):
    lam0 = magnetic_spectrum(BackendSpec("magnetic_fd", length=1.0, grid=8, flux=0.0)).eigenvalues[0]
    lam = magnetic_spectrum(BackendSpec("magnetic_fd", length=1.0, grid=8, flux=flux)).eigenvalues[0]
    assert lam >= lam0 - 1e-12


def test_magnetic_plaquette_flux():
    asm = magnetic_assembly(BackendSpec("magnetic_fd", length=1.0, grid=4, flux=0.7))
    m = asm.matrix()
    n = 4
    idx = np.arange(n * n).reshape(n, n)
    # hop phases around the plaquette (0,0)->(1,0)->(1,1)->(0,1)->(0,0)
    path = [idx[0, 0], idx[1, 0], idx[1, 1], idx[0, 1], idx[0, 0]]
    total = sum(np.angle(-m[a, b]) for a, b in zip(path, path[1:]))
    assert math.remainder(total, 2 * math.pi) == pytest.approx(0.7, abs=1e-12)


@pytest.mark.parametrize("potential", ["b_const_plus_x2", "one_plus_x4"])
def test_potential_lower_bound(potential):
    sp = build_backend(BackendSpec("potential_fd", length=5.0, grid=200, potential=potential))
    assert sp.eigenvalues[0] >= sp.meta["potential_min"]
    assert sp.meta["potential_min"] >= 1.0


def test_potential_b_const_plus_x2_is_shifted_oscillator():
    sp = build_backend(BackendSpec("potential_fd", length=10.0, grid=1500, potential="b_const_plus_x2", modes=4))
    assert np.allclose(sp.eigenvalues, [2, 4, 6, 8], rtol=2e-4)


def test_potential_custom_table(tmp_path):
    path = tmp_path / "v.csv"
    x = np.linspace(-5, 5, 201)
    path.write_text("# x,V\n" + "\n".join(f"{a},{1 + a**4}" for a in x))
    custom = build_backend(BackendSpec("potential_fd", length=4.0, grid=150, potential="custom_table", path=str(path)))
    exact = build_backend(BackendSpec("potential_fd", length=4.0, grid=150, potential="one_plus_x4"))
    assert np.allclose(custom.eigenvalues[:5], exact.eigenvalues[:5], rtol=1e-3)


def test_custom_table_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n0,3\n")
    with pytest.raises(ValidationError):
        build_backend(BackendSpec("potential_fd", length=1.0, grid=10, potential="custom_table", path=str(bad)))
    with pytest.raises(ValidationError):
        BackendSpec("potential_fd", length=1.0, grid=10, potential="custom_table")


def test_matrix_file_real(tmp_path):
    p = write_mm(tmp_path / "a.mtx", "%%MatrixMarket matrix coordinate real symmetric", "2 2 3",
                 ["1 1 2", "2 1 -1", "2 2 2"])
    sp = build_backend(BackendSpec("matrix_file", path=p))
    assert np.allclose(sp.eigenvalues, [1, 3], atol=1e-14)


def test_matrix_file_hermitian(tmp_path):
    p = write_mm(tmp_path / "h.mtx", "%%MatrixMarket matrix coordinate complex hermitian", "2 2 3",
                 ["1 1 3 0", "2 1 0 -1", "2 2 3 0"])
    sp = build_backend(BackendSpec("matrix_file", path=p))
    assert sp.is_complex
    assert np.allclose(sp.eigenvalues, [2, 4], atol=1e-14)


@pytest.mark.parametrize("header,size,entries", [
    ("%%MatrixMarket matrix array real general", "2 2", ["1", "2", "3", "4"]),
    ("%%MatrixMarket matrix coordinate real symmetric", "2 3 1", ["1 1 1"]),
    ("%%MatrixMarket matrix coordinate real symmetric", "2 2 2", ["1 1 1"]),
    ("%%MatrixMarket matrix coordinate real symmetric", "2 2 1", ["3 1 1"]),
    ("not a header", "2 2 1", ["1 1 1"]),
])
def test_matrix_file_errors(tmp_path, header, size, entries):
    p = write_mm(tmp_path / "x.mtx", header, size, entries)
    with pytest.raises(ValidationError):
        build_backend(BackendSpec("matrix_file", path=p))


def test_matrix_file_not_positive(tmp_path):
    p = write_mm(tmp_path / "n.mtx", "%%MatrixMarket matrix coordinate real symmetric", "2 2 2",
                 ["1 1 -1", "2 2 1"])
    with pytest.raises(ValidationError, match="not positive"):
        build_backend(BackendSpec("matrix_file", path=p))


@pytest.mark.parametrize("kwargs", [
    dict(kind="interval_fd", length=1.0),
    dict(kind="interval_fd", length=1.0, grid=10, gamma=1.0),
    dict(kind="interval_analytic", length=-1.0, modes=3),
    dict(kind="box2d_fd", length=1.0, grid=1),
    dict(kind="grushin_fd", length=1.0, grid=4, gamma=-1.0),
    dict(kind="potential_fd", length=1.0, grid=4, potential="sextic"),
    dict(kind="unknown"),
    dict(kind="magnetic_fd", length=1.0, grid=4, flux=float("nan")),
])
def test_backend_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        BackendSpec(**kwargs)


def test_project_basis_vector(interval_pi):
    f = GroundFunction(values=interval_pi.eigenvectors[:, 1])
    c = project(f, interval_pi).coefficients
    expected = np.zeros(interval_pi.modes)
    expected[1] = 1.0
    assert np.allclose(c, expected, atol=1e-12)


def test_project_zero(interval_pi):
    assert np.all(project(np.zeros(interval_pi.size), interval_pi).coefficients == 0)


def test_roundtrip(interval_pi, rng):
    c = np.zeros(interval_pi.modes)
    c[:10] = rng.standard_normal(10)
    f = synthesize(c, interval_pi)
    back = synthesize(project(f, interval_pi).coefficients, interval_pi)
    assert np.max(np.abs(back.values - f.values)) <= 1e-10


def test_project_dimension_mismatch(interval_pi):
    with pytest.raises(ValidationError):
        project(np.zeros(interval_pi.size + 1), interval_pi)


def test_synthesize_first_mode():
    sp = build_backend(BackendSpec("interval_analytic", length=math.pi, modes=4))
    v = synthesize([1.0], sp).values
    assert np.allclose(v, math.sqrt(2 / math.pi) * np.sin(sp.nodes), atol=1e-14)
    assert np.all(synthesize(np.zeros(4), sp).values == 0)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.kind)
def test_parseval(spec, rng):
    sp = build_backend(spec)
    c = rng.standard_normal(sp.modes)
    if sp.is_complex:
        c = c + 1j * rng.standard_normal(sp.modes)
    v = synthesize(c, sp).values
    assert np.sum(sp.weights * np.abs(v) ** 2) == pytest.approx(np.sum(np.abs(c) ** 2), rel=1e-10)


def test_synthesize_linear(interval_pi, rng):
    a, b = rng.standard_normal(5), rng.standard_normal(5)
    lhs = synthesize(2 * a - 3 * b, interval_pi).values
    rhs = 2 * synthesize(a, interval_pi).values - 3 * synthesize(b, interval_pi).values
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_synthesize_too_many(interval_pi):
    with pytest.raises(ValidationError):
        synthesize(np.ones(interval_pi.modes + 1), interval_pi)


def test_spectrum_is_immutable(interval_pi):
    with pytest.raises(ValueError):
        interval_pi.eigenvalues[0] = 3.0
