"""Operator backends producing discrete spectra.

Every backend returns a :class:`Spectrum`: ascending positive eigenvalues,
eigenvectors sampled at nodes and orthonormal under the weighted inner
product ``sum_i w_i conj(phi_j(i)) phi_k(i)``, plus the weights themselves.
Finite-difference kinds use second-order central differences with
homogeneous Dirichlet data on uniform grids, so the trapezoid weights are
the constant cell volume.
"""

import csv
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .eigensolve import eigh_hermitian, eigh_symmetric, eigh_tridiagonal
from .errors import ValidationError

__all__ = [
    "KINDS",
    "POTENTIALS",
    "BackendSpec",
    "Spectrum",
    "GroundFunction",
    "MagneticAssembly",
    "build_backend",
    "oscillator_spectrum",
    "magnetic_spectrum",
    "magnetic_assembly",
    "assembly_spectrum",
    "read_matrix_market",
    "grushin_dimensions",
    "project",
    "synthesize",
]

KINDS = (
    "interval_analytic",
    "interval_fd",
    "box2d_fd",
    "oscillator_analytic",
    "oscillator_fd",
    "potential_fd",
    "grushin_fd",
    "magnetic_fd",
    "matrix_file",
)
POTENTIALS = ("b_const_plus_x2", "one_plus_x4", "custom_table")

# kind -> (required, optional) parameter names
_PARAMS = {
    "interval_analytic": ({"length", "modes"}, {"grid"}),
    "interval_fd": ({"length", "grid"}, {"modes"}),
    "box2d_fd": ({"length", "grid"}, {"modes"}),
    "oscillator_analytic": ({"modes"}, {"grid"}),
    "oscillator_fd": ({"length", "grid"}, {"modes"}),
    "potential_fd": ({"length", "grid", "potential"}, {"modes", "path"}),
    "grushin_fd": ({"length", "grid", "gamma"}, {"modes"}),
    "magnetic_fd": ({"length", "grid", "flux"}, {"modes"}),
    "matrix_file": ({"path"}, set()),
}

OSCILLATOR_MAX_MODES = 60
_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class BackendSpec:
    """Parameters selecting one operator backend.

    Only the fields relevant to ``kind`` may be set; the rest stay ``None``.
    ``length`` is the interval/box side for bounded kinds and the half-width
    ``L`` of the truncation window ``[-L, L]`` for the confining kinds.
    """

    kind: str
    length: float = None
    grid: int = None
    modes: int = None
    gamma: float = None
    potential: str = None
    flux: float = None
    path: str = None

    def __post_init__(self):
        if self.kind not in _PARAMS:
            raise ValidationError(f"unknown backend kind {self.kind!r}")
        required, optional = _PARAMS[self.kind]
        given = {f.name for f in fields(self) if f.name != "kind" and getattr(self, f.name) is not None}
        missing = required - given
        if missing:
            raise ValidationError(f"{self.kind} requires {sorted(missing)}")
        extra = given - required - optional
        if extra:
            raise ValidationError(f"{self.kind} does not accept {sorted(extra)}")
        if self.length is not None and not self.length > 0:
            raise ValidationError(f"length must be > 0, got {self.length}")
        if self.grid is not None and (int(self.grid) != self.grid or self.grid < 2):
            raise ValidationError(f"grid must be an integer >= 2, got {self.grid}")
        if self.modes is not None and (int(self.modes) != self.modes or self.modes < 1):
            raise ValidationError(f"modes must be an integer >= 1, got {self.modes}")
        if self.gamma is not None and not self.gamma >= 0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        if self.potential is not None:
            if self.potential not in POTENTIALS:
                raise ValidationError(f"unknown potential {self.potential!r}")
            if (self.potential == "custom_table") != (self.path is not None):
                raise ValidationError("custom_table potential needs path, and only it")
        if self.flux is not None and not math.isfinite(self.flux):
            raise ValidationError("flux must be finite")

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


@dataclass(frozen=True)
class Spectrum:
    """Discrete eigen-system standing in for an operator and its eigenbasis.

    ``eigenvectors[:, k]`` samples the k-th eigenfunction at ``nodes``.
    ``meta`` carries backend-derived quantities (grid spacing, Grushin
    dimensions, potential minimum).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    weights: np.ndarray
    nodes: np.ndarray
    backend: BackendSpec
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.eigenvalues, self.eigenvectors, self.weights, self.nodes):
            arr.setflags(write=False)

    @property
    def modes(self):
        return self.eigenvalues.shape[0]

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.eigenvectors)

    def gram(self):
        phi = self.eigenvectors
        return phi.conj().T @ (self.weights[:, None] * phi)

    def check(self):
        """Raise ValidationError unless the Spectrum invariants hold."""
        lam = self.eigenvalues
        if lam.shape[0] < 1:
            raise ValidationError("spectrum is empty")
        if np.any(np.diff(lam) < 0):
            raise ValidationError("eigenvalues not ascending")
        if not lam[0] > 0:
            raise ValidationError(f"operator is not positive: lambda_1 = {lam[0]:.6g}")
        if np.any(self.weights <= 0):
            raise ValidationError("weights must be positive")
        err = np.max(np.abs(self.gram() - np.eye(self.modes)))
        if err > _ORTHO_TOL:
            raise ValidationError(f"eigenvectors not weighted-orthonormal (error {err:.3g})")
        return self


@dataclass(frozen=True)
class GroundFunction:
    """A function on the base domain: nodal values, eigen-coefficients, or both."""

    values: np.ndarray = None
    coefficients: np.ndarray = None

    def __post_init__(self):
        if self.values is None and self.coefficients is None:
            raise ValidationError("GroundFunction needs values or coefficients")


def _spectrum(evals, vecs, weight, nodes, spec, **meta):
    weights = np.full(vecs.shape[0], float(weight))
    phi = vecs / math.sqrt(weight)
    return Spectrum(np.asarray(evals, dtype=float), phi, weights, nodes, spec, meta).check()


def _second_difference(n, h):
    return np.full(n, 2.0 / h**2), np.full(n - 1, -1.0 / h**2)


def _dense_1d(n, h):
    d, e = _second_difference(n, h)
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def _truncate(dec, modes):
    if modes is None:
        return dec.eigenvalues, dec.eigenvectors
    return dec.eigenvalues[:modes], dec.eigenvectors[:, :modes]


def _tridiagonal_backend(spec, nodes, potential):
    n = spec.grid
    h = nodes[1] - nodes[0]
    d, e = _second_difference(n, h)
    dec = eigh_tridiagonal(d + potential, e, select=spec.modes)
    return dec, h


def _interval_analytic(spec):
    length, modes = spec.length, spec.modes
    m = spec.grid if spec.grid is not None else max(4 * modes, 64)
    if m < modes:
        raise ValidationError(f"grid ({m}) must be >= modes ({modes})")
    h = length / (m + 1)
    x = h * np.arange(1, m + 1)
    k = np.arange(1, modes + 1)
    evals = (k * math.pi / length) ** 2
    phi = math.sqrt(2.0 / length) * np.sin(np.outer(x, k) * math.pi / length)
    # trapezoid weights on an interior grid make the sampled sines exactly orthonormal
    return Spectrum(evals, phi, np.full(m, h), x, spec, {"h": h}).check()


def _interval_fd(spec):
    n = spec.grid
    h = spec.length / (n + 1)
    x = h * np.arange(1, n + 1)
    dec, _ = _tridiagonal_backend(spec, x, np.zeros(n))
    return _spectrum(dec.eigenvalues, dec.eigenvectors, h, x, spec, h=h)


def _grid_2d(xs, ys):
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _box2d_fd(spec):
    n = spec.grid
    h = spec.length / (n + 1)
    t = _dense_1d(n, h)
    eye = np.eye(n)
    a = np.kron(t, eye) + np.kron(eye, t)
    xs = h * np.arange(1, n + 1)
    evals, vecs = _truncate(eigh_symmetric(a), spec.modes)
    return _spectrum(evals, vecs, h * h, _grid_2d(xs, xs), spec, h=h)


def grushin_dimensions(gamma, m=1, n=1):
    """Homogeneous dimension ``m + (1+gamma) n`` and critical exponent
    ``2N/(N-2)`` (infinite when ``N <= 2``)."""
    dim = m + (1.0 + gamma) * n
    crit = 2.0 * dim / (dim - 2.0) if dim > 2.0 else math.inf
    return dim, crit


def _grushin_fd(spec):
    n = spec.grid
    h = spec.length / (n + 1)
    xs = -0.5 * spec.length + h * np.arange(1, n + 1)
    if n % 2 == 1:
        # odd grids would put a node on the degenerate line x = 0
        xs = xs - 0.5 * h
    ys = h * np.arange(1, n + 1)
    g = spec.gamma
    coef = (1.0 + g) ** 2 * np.abs(xs) ** (2.0 * g)
    t = _dense_1d(n, h)
    a = np.kron(t, np.eye(n)) + np.kron(np.diag(coef), t)
    evals, vecs = _truncate(eigh_symmetric(a), spec.modes)
    dim, crit = grushin_dimensions(g)
    return _spectrum(
        evals, vecs, h * h, _grid_2d(xs, ys), spec, h=h, m=1, n=1, N_gamma=dim, critical_exponent=crit
    )


def _hermite_functions(x, modes):
    """Normalized Hermite functions psi_0..psi_{modes-1} sampled at x."""
    psi = np.empty((x.shape[0], modes))
    psi[:, 0] = math.pi**-0.25 * np.exp(-0.5 * x * x)
    if modes > 1:
        psi[:, 1] = math.sqrt(2.0) * x * psi[:, 0]
    for k in range(1, modes - 1):
        psi[:, k + 1] = math.sqrt(2.0 / (k + 1)) * x * psi[:, k] - math.sqrt(k / (k + 1.0)) * psi[:, k - 1]
    return psi


def _oscillator_analytic(spec):
    modes = spec.modes
    if modes > OSCILLATOR_MAX_MODES:
        raise ValidationError(f"oscillator_analytic supports at most {OSCILLATOR_MAX_MODES} modes")
    m = spec.grid if spec.grid is not None else modes
    if m < modes:
        raise ValidationError(f"grid ({m}) must be >= modes ({modes})")
    x, w = np.polynomial.hermite.hermgauss(m)
    weights = w * np.exp(x * x)
    evals = 2.0 * np.arange(modes) + 1.0
    return Spectrum(evals, _hermite_functions(x, modes), weights, x, spec, {}).check()


def _oscillator_fd(spec):
    L = spec.length
    if math.exp(-0.5 * L * L) >= 1e-12:
        raise ValidationError(f"oscillator_fd needs exp(-L^2/2) < 1e-12, got L = {L}")
    n = spec.grid
    h = 2.0 * L / (n + 1)
    x = -L + h * np.arange(1, n + 1)
    dec, _ = _tridiagonal_backend(spec, x, x * x)
    return _spectrum(dec.eigenvalues, dec.eigenvectors, h, x, spec, h=h, potential_min=float(np.min(x * x)))


def _read_potential_table(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        data = np.array([[float(v) for v in r[:2]] for r in rows])
    except (OSError, ValueError, IndexError) as exc:
        raise ValidationError(f"cannot read potential table {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] < 2 or np.any(np.diff(data[:, 0]) <= 0):
        raise ValidationError("potential table needs >= 2 rows with increasing x")
    return data[:, 0], data[:, 1]


def _potential_values(spec, x):
    if spec.potential == "b_const_plus_x2":
        return 1.0 + x * x
    if spec.potential == "one_plus_x4":
        return 1.0 + x**4
    tx, tv = _read_potential_table(spec.path)
    return np.interp(x, tx, tv)


def _potential_fd(spec):
    n = spec.grid
    L = spec.length
    h = 2.0 * L / (n + 1)
    x = -L + h * np.arange(1, n + 1)
    v = _potential_values(spec, x)
    dec, _ = _tridiagonal_backend(spec, x, v)
    return _spectrum(dec.eigenvalues, dec.eigenvectors, h, x, spec, h=h, potential_min=float(np.min(v)))


@dataclass(frozen=True)
class MagneticAssembly:
    """Peierls discretization of ``(-i grad - A)^2`` on an ``n x n`` grid.

    ``edges[e] = (a, b)`` lists each interior nearest-neighbour pair once and
    ``theta[e]`` the phase of the hop ``a -> b``; the reverse hop carries
    ``-theta[e]``. Boundary edges to the Dirichlet ghost layer are implicit
    in the diagonal ``4 / h^2``.
    """

    grid: int
    h: float
    nodes: np.ndarray
    edges: np.ndarray
    theta: np.ndarray

    @property
    def size(self):
        return self.grid * self.grid

    def matrix(self):
        n2 = self.size
        a = np.zeros((n2, n2), dtype=complex)
        a[np.diag_indices(n2)] = 4.0
        i, j = self.edges[:, 0], self.edges[:, 1]
        hop = np.exp(1j * self.theta)
        a[i, j] = -hop
        a[j, i] = -np.conj(hop)
        return a / self.h**2

    def with_phases(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.theta.shape:
            raise ValidationError(f"expected {self.theta.shape[0]} edge phases, got {theta.shape}")
        return MagneticAssembly(self.grid, self.h, self.nodes, self.edges, theta)


def _grid_edges(n):
    idx = np.arange(n * n).reshape(n, n)
    xe = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    ye = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    return np.vstack([xe, ye]), xe.shape[0]


def magnetic_assembly(spec, gauge=None):
    """Assemble the Peierls form for a ``magnetic_fd`` spec.

    Uses the Landau gauge: hops in the x direction at row ``j`` carry phase
    ``-flux * j`` so every plaquette encloses ``flux``. An optional nodal
    ``gauge`` field ``chi`` adds the pure-gauge term ``chi_b - chi_a``.
    """
    if spec.kind != "magnetic_fd":
        raise ValidationError(f"magnetic assembly needs kind magnetic_fd, got {spec.kind}")
    n = spec.grid
    h = spec.length / (n + 1)
    xs = h * np.arange(1, n + 1)
    edges, nx = _grid_edges(n)
    theta = np.zeros(edges.shape[0])
    row = edges[:nx, 0] % n
    theta[:nx] = -spec.flux * row
    if gauge is not None:
        chi = np.asarray(gauge, dtype=float).ravel()
        if chi.shape[0] != n * n:
            raise ValidationError(f"gauge field needs {n * n} values, got {chi.shape[0]}")
        theta = theta + chi[edges[:, 1]] - chi[edges[:, 0]]
    return MagneticAssembly(n, h, _grid_2d(xs, xs), edges, theta)


def assembly_spectrum(asm, spec=None, modes=None):
    dec = eigh_hermitian(asm.matrix())
    evals, vecs = _truncate(dec, modes)
    return _spectrum(evals, vecs, asm.h**2, asm.nodes, spec, h=asm.h)


def magnetic_spectrum(spec, gauge=None):
    """Spectrum of the discrete magnetic Laplacian for a ``magnetic_fd`` spec."""
    return assembly_spectrum(magnetic_assembly(spec, gauge), spec, spec.modes)


def read_matrix_market(path):
    """Read a MatrixMarket ``coordinate`` file, real symmetric or complex
    hermitian, into a dense array (both triangles filled)."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read matrix file {path}: {exc}") from exc
    if not lines:
        raise ValidationError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket" or header[1].lower() != "matrix":
        raise ValidationError(f"{path}: not a MatrixMarket header: {lines[0]!r}")
    fmt, field_, sym = (t.lower() for t in header[2:])
    if fmt != "coordinate" or (field_, sym) not in {("real", "symmetric"), ("complex", "hermitian")}:
        raise ValidationError(f"{path}: unsupported MatrixMarket type {' '.join(header[2:])}")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    try:
        rows, cols, nnz = (int(t) for t in body[0].split())
    except (IndexError, ValueError) as exc:
        raise ValidationError(f"{path}: bad size line") from exc
    if rows != cols or rows < 1:
        raise ValidationError(f"{path}: matrix must be square, got {rows}x{cols}")
    if len(body) - 1 != nnz:
        raise ValidationError(f"{path}: expected {nnz} entries, found {len(body) - 1}")
    dtype = complex if field_ == "complex" else float
    a = np.zeros((rows, rows), dtype=dtype)
    for ln in body[1:]:
        tok = ln.split()
        try:
            i, j = int(tok[0]) - 1, int(tok[1]) - 1
            v = complex(float(tok[2]), float(tok[3])) if dtype is complex else float(tok[2])
        except (IndexError, ValueError) as exc:
            raise ValidationError(f"{path}: bad entry line {ln!r}") from exc
        if not (0 <= i < rows and 0 <= j < rows):
            raise ValidationError(f"{path}: index out of range in {ln!r}")
        a[i, j] = v
        a[j, i] = np.conj(v)
    return a


def _matrix_file(spec):
    a = read_matrix_market(spec.path)
    dec = eigh_hermitian(a) if np.iscomplexobj(a) else eigh_symmetric(a)
    n = a.shape[0]
    return _spectrum(dec.eigenvalues, dec.eigenvectors, 1.0, np.arange(n, dtype=float), spec)


_BUILDERS = {
    "interval_analytic": _interval_analytic,
    "interval_fd": _interval_fd,
    "box2d_fd": _box2d_fd,
    "oscillator_analytic": _oscillator_analytic,
    "oscillator_fd": _oscillator_fd,
    "potential_fd": _potential_fd,
    "grushin_fd": _grushin_fd,
    "magnetic_fd": magnetic_spectrum,
    "matrix_file": _matrix_file,
}


def build_backend(spec):
    """Build the :class:`Spectrum` for ``spec``.

    Raises
    ------
    ValidationError
        Inconsistent parameters, unreadable files, or a non-positive operator.
    ConvergenceError
        Propagated from the eigensolver.
    """
    if not isinstance(spec, BackendSpec):
        raise ValidationError("build_backend expects a BackendSpec")
    return _BUILDERS[spec.kind](spec)


def oscillator_spectrum(spec):
    """Harmonic oscillator ``-d^2/dx^2 + x^2`` spectrum (analytic or fd)."""
    if spec.kind not in ("oscillator_analytic", "oscillator_fd"):
        raise ValidationError(f"not an oscillator kind: {spec.kind}")
    return build_backend(spec)


def _values(f):
    if isinstance(f, GroundFunction):
        if f.values is None:
            raise ValidationError("function has no nodal values")
        return np.asarray(f.values)
    return np.asarray(f)


def coefficients_of(f, sp):
    """Eigen-coefficients of ``f``, projecting nodal values if needed."""
    if isinstance(f, GroundFunction) and f.coefficients is not None:
        c = np.asarray(f.coefficients)
        if c.shape[0] > sp.modes:
            raise ValidationError(f"{c.shape[0]} coefficients exceed {sp.modes} modes")
        if c.shape[0] < sp.modes:
            c = np.concatenate([c, np.zeros(sp.modes - c.shape[0], dtype=c.dtype)])
        return c
    return project(f, sp).coefficients


def project(f, sp):
    """Weighted projection ``c_k = sum_i w_i conj(phi_k(i)) f(i)``."""
    v = _values(f)
    if v.ndim != 1 or v.shape[0] != sp.size:
        raise ValidationError(f"function has {v.shape} values, spectrum has {sp.size} nodes")
    c = sp.eigenvectors.conj().T @ (sp.weights * v)
    return GroundFunction(values=v, coefficients=c)


def synthesize(c, sp):
    """Nodal values ``sum_k c_k phi_k`` from at most ``sp.modes`` coefficients."""
    c = np.asarray(c.coefficients if isinstance(c, GroundFunction) else c)
    if c.ndim != 1 or c.shape[0] > sp.modes:
        raise ValidationError(f"got {c.shape} coefficients for {sp.modes} modes")
    return GroundFunction(values=sp.eigenvectors[:, : c.shape[0]] @ c, coefficients=c)
