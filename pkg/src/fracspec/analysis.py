"""Fractional powers, interpolation norms and compactness diagnostics."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .extension import FracOrder, _as_order
from .operators import GroundFunction, MagneticAssembly, coefficients_of, project, synthesize

__all__ = [
    "CompactnessEntry",
    "CompactnessReport",
    "fractional_apply",
    "interpolation_norm",
    "weighted_norm",
    "truncation_modulus",
    "compactness_report",
    "tail_mass_check",
    "lp_interpolation_check",
    "diamagnetic_check",
]

MC_SAMPLES = 200


def fractional_apply(sp, order, f):
    """Apply ``A^s`` spectrally: ``c_k -> lam_k^s c_k``, then synthesize.

    ``order`` may be a FracOrder or any real exponent (negative powers and
    ``s >= 1`` are allowed here; only the extension needs ``0 < s < 1``).
    """
    s = order.s if isinstance(order, FracOrder) else float(order)
    c = coefficients_of(f, sp)
    return synthesize(sp.eigenvalues**s * c, sp)


def weighted_norm(sp, values):
    v = np.asarray(values.values if isinstance(values, GroundFunction) else values)
    return float(np.sqrt(np.sum(sp.weights * np.abs(v) ** 2)))


def interpolation_norm(sp, sigma, f):
    """``(sum_k lam_k^sigma |c_k|^2)^{1/2}`` for ``0 <= sigma <= 2``."""
    sigma = float(sigma)
    if not 0.0 <= sigma <= 2.0:
        raise ValidationError(f"sigma must lie in [0, 2], got {sigma}")
    c = coefficients_of(f, sp)
    return float(np.sqrt(np.sum(sp.eigenvalues**sigma * np.abs(c) ** 2)))


@dataclass(frozen=True)
class CompactnessEntry:
    """Truncation modulus of the embedding at one rank.

    ``modulus`` is the measured Y-norm of the tail of the extremal witness,
    ``bound`` the analytic value ``lam_{n+1}^{-s/2}`` and ``mc_max`` the
    largest tail seen over random unit vectors. ``energy_modulus`` rescales
    to the cylinder-energy normalization (divide by ``sqrt(K(s))``).
    """

    rank: int
    modulus: float
    bound: float
    witness: np.ndarray
    mc_max: float
    energy_modulus: float


@dataclass
class CompactnessReport:
    s: float
    seed: int
    samples: int
    entries: list = field(default_factory=list)

    @property
    def ranks(self):
        return [e.rank for e in self.entries]

    @property
    def moduli(self):
        return [e.modulus for e in self.entries]

    @property
    def bound(self):
        return [e.bound for e in self.entries]

    @property
    def witnesses(self):
        return [e.witness for e in self.entries]

    @property
    def energy_moduli(self):
        return [e.energy_modulus for e in self.entries]

    def non_increasing(self):
        m = self.moduli
        return all(b <= a for a, b in zip(m, m[1:]))


def _tail_norm(sp, coeffs, rank):
    """Y-norm of ``f - P_rank f`` measured on nodal values."""
    f = synthesize(coeffs, sp)
    c = project(f, sp).coefficients
    head = synthesize(c[:rank], sp).values if rank > 0 else 0.0
    return weighted_norm(sp, f.values - head)


def truncation_modulus(sp, order, rank, samples=MC_SAMPLES, seed=0):
    """Operator norm of ``(I - P_rank)`` on the unit sphere of the
    ``sigma = s`` interpolation norm.

    Raises
    ------
    DomainError
        Unless ``0 <= rank < sp.modes``.
    """
    order = _as_order(order)
    rank = int(rank)
    if not 0 <= rank < sp.modes:
        raise DomainError(f"rank must satisfy 0 <= rank < {sp.modes}, got {rank}")
    s = order.s
    lam = sp.eigenvalues
    bound = float(lam[rank] ** (-0.5 * s))
    witness = np.zeros(sp.modes)
    witness[rank] = bound
    modulus = _tail_norm(sp, witness, rank)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), rank]))
    g = rng.standard_normal((samples, sp.modes))
    g /= np.sqrt(np.sum(lam**s * g * g, axis=1))[:, None]
    mc = np.sqrt(np.sum(g[:, rank:] ** 2, axis=1))
    return CompactnessEntry(
        rank=rank,
        modulus=modulus,
        bound=bound,
        witness=witness,
        mc_max=float(np.max(mc)) if samples else 0.0,
        energy_modulus=modulus / np.sqrt(order.ks),
    )


def compactness_report(sp, order, ranks=None, samples=MC_SAMPLES, seed=0):
    order = _as_order(order)
    ranks = range(sp.modes) if ranks is None else ranks
    rep = CompactnessReport(order.s, int(seed), samples)
    rep.entries.extend(truncation_modulus(sp, order, n, samples, seed) for n in ranks)
    return rep


def _cells_1d(x):
    """Control-volume edges around sorted 1-D nodes (midpoints, mirrored ends)."""
    mid = 0.5 * (x[1:] + x[:-1])
    lo = np.concatenate([[x[0] - (mid[0] - x[0])], mid])
    hi = np.concatenate([mid, [x[-1] + (x[-1] - mid[-1])]])
    return lo, hi


def _energy_1d(sp, f):
    """``sum w (|f'|^2 + x^2 f^2)``; forward differences with Dirichlet ghost
    zeros on fd grids, the spectral sum on the analytic basis."""
    x = sp.nodes
    if sp.backend is not None and sp.backend.kind == "oscillator_fd":
        h = sp.meta["h"]
        v = np.concatenate([[0.0], f, [0.0]])
        grad = np.diff(v) / h
        return float(h * np.sum(np.abs(grad) ** 2) + h * np.sum(x * x * np.abs(f) ** 2))
    c = project(f, sp).coefficients
    return float(np.sum(sp.eigenvalues * np.abs(c) ** 2))


def tail_mass_check(sp, f, radius):
    """Mass outside ``|x| > R`` versus the confinement bound ``E(f) / R^2``.

    Each node contributes the fraction of its control cell lying beyond
    ``R``. Returns ``(tail, bound)``; the discrete inequality ``tail <=
    bound`` is the property under test.
    """
    if sp.backend is None or sp.backend.kind not in ("oscillator_analytic", "oscillator_fd"):
        raise ValidationError("tail_mass_check needs an oscillator spectrum")
    v = np.asarray(f.values if isinstance(f, GroundFunction) else f)
    if v.shape != (sp.size,):
        raise ValidationError(f"function has shape {v.shape}, expected ({sp.size},)")
    x = sp.nodes
    lo, hi = _cells_1d(x)
    radius = float(radius)
    if not 0 < radius <= hi[-1] or radius > -lo[0]:
        raise DomainError(f"radius {radius} outside the truncated domain (edge {hi[-1]:.6g})")
    length = hi - lo
    outside = np.clip(hi - np.maximum(lo, radius), 0.0, None) + np.clip(np.minimum(hi, -radius) - lo, 0.0, None)
    frac = outside / length
    tail = float(np.sum(frac * sp.weights * np.abs(v) ** 2))
    return tail, _energy_1d(sp, v) / radius**2


def lp_interpolation_check(f, q, sp):
    """Hoelder interpolation ``||f||_q <= ||f||_2^{1-t} ||f||_{2*}^t``.

    ``2*`` is ``inf`` (max norm) for node dimension <= 2 and ``2d/(d-2)``
    otherwise; ``t`` solves ``1/q = (1-t)/2 + t/2*``. Returns ``(lhs, rhs)``.
    """
    q = float(q)
    dim = 1 if sp.nodes.ndim == 1 else sp.nodes.shape[1]
    crit = np.inf if dim <= 2 else 2.0 * dim / (dim - 2.0)
    if not 2.0 <= q < crit:
        raise ValidationError(f"q must satisfy 2 <= q < {crit}, got {q}")
    v = np.abs(np.asarray(f.values if isinstance(f, GroundFunction) else f))
    if v.shape != (sp.size,):
        raise ValidationError(f"function has shape {v.shape}, expected ({sp.size},)")
    w = sp.weights
    if np.isinf(crit):
        t = 1.0 - 2.0 / q
        top = float(np.max(v))
    else:
        t = (0.5 - 1.0 / q) / (0.5 - 1.0 / crit)
        top = float(np.sum(w * v**crit) ** (1.0 / crit))
    lhs = float(np.sum(w * v**q) ** (1.0 / q))
    l2 = float(np.sqrt(np.sum(w * v * v)))
    rhs = l2 ** (1.0 - t) * top**t
    return lhs, rhs


def diamagnetic_check(m, u):
    """Edge sums ``q0 = sum (|u_a| - |u_b|)^2`` and
    ``qA = sum |u_a - e^{i theta_ab} u_b|^2`` over interior edges."""
    if not isinstance(m, MagneticAssembly):
        raise ValidationError("diamagnetic_check needs a MagneticAssembly")
    u = np.asarray(u.values if isinstance(u, GroundFunction) else u, dtype=complex)
    if u.shape != (m.size,):
        raise ValidationError(f"u has shape {u.shape}, expected ({m.size},)")
    a, b = m.edges[:, 0], m.edges[:, 1]
    qa = float(np.sum(np.abs(u[a] - np.exp(1j * m.theta) * u[b]) ** 2))
    q0 = float(np.sum((np.abs(u[a]) - np.abs(u[b])) ** 2))
    return q0, qa
