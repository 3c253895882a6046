r"""Mode-by-mode extension to the half-cylinder.

Each eigen-coefficient ``c`` of the trace evolves in ``t > 0`` as the
decaying solution of

.. math::
    \alpha'' + \frac{1-2s}{t}\alpha' - \lambda\alpha = 0, \qquad \alpha(0) = c,

namely :math:`\alpha(t) = c\,\frac{2^{1-s}}{\Gamma(s)} z^s K_s(z)` with
:math:`z = \sqrt{\lambda}\,t`. The weighted Dirichlet energy of the
extension is computed twice: by quadrature in ``t`` and by the closed
spectral sum :math:`K(s)\sum_k \lambda_k^s c_k^2`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ExtrapolationError, ValidationError
from .operators import GroundFunction, coefficients_of, synthesize
from .specfun import bessel_k_scaled, gamma

__all__ = [
    "FracOrder",
    "ModeProfile",
    "HalfLineQuadrature",
    "k_constant",
    "mode_profile",
    "dtn_limit",
    "half_line_quadrature",
    "default_quadrature",
    "extension_energy",
    "energy_tail",
    "spectral_energy",
    "evaluate_extension",
]

# -log(1e-14) rounded up
_DECAY_WIDTH = 33.0
_TAIL_FRACTION = 1e-12


@dataclass(frozen=True)
class FracOrder:
    """Fractional exponent ``s`` in (0, 1) and the energy constant ``K(s)``."""

    s: float
    ks: float = field(init=False)

    def __post_init__(self):
        s = float(self.s)
        if not 0.0 < s < 1.0:
            raise DomainError(f"fractional order must satisfy 0 < s < 1, got {self.s!r}")
        object.__setattr__(self, "s", s)
        ks = -2.0 * s * gamma(-s) / (4.0**s * gamma(s))
        object.__setattr__(self, "ks", ks)


def k_constant(s):
    """``K(s) = -2 s Gamma(-s) / (4^s Gamma(s))``, wrapped in a FracOrder."""
    return FracOrder(s)


def _as_order(order):
    return order if isinstance(order, FracOrder) else FracOrder(order)


@dataclass(frozen=True)
class ModeProfile:
    """Decaying solution of the mode equation with ``alpha(0) = c0``."""

    lam: float
    order: FracOrder
    c0: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"mode eigenvalue must be > 0, got {self.lam!r}")

    @property
    def _prefactor(self):
        s = self.order.s
        return 2.0 ** (1.0 - s) / gamma(s)

    def value(self, t):
        """``alpha(t)``; exact ``c0`` at ``t = 0``."""
        return self.c0 * _shape(self.lam, self.order.s, t)

    def derivative(self, t):
        """``alpha'(t)`` for ``t > 0``."""
        return self.c0 * _shape_derivative(self.lam, self.order.s, t)

    __call__ = value


_TINY = 1e-250


def _shape(lam, s, t):
    """Unit-amplitude profile ``2^{1-s}/Gamma(s) z^s K_s(z)``, broadcasting."""
    t = np.asarray(t, dtype=float)
    z = np.sqrt(lam) * t
    # below _TINY the correction (z/2)^{2s} is far beneath rounding
    big = z > _TINY
    zs = np.where(big, z, 1.0)
    out = 2.0 ** (1.0 - s) / gamma(s) * zs**s * np.exp(-zs) * bessel_k_scaled(s, zs)
    out = np.where(big, out, 1.0)
    return float(out) if out.ndim == 0 else out


def _shape_derivative(lam, s, t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("profile derivative needs t > 0")
    z = np.sqrt(lam) * t
    big = z > _TINY
    zs = np.where(big, z, 1.0)
    tt = np.where(big, 1.0, t)
    out = -(2.0 ** (1.0 - s) / gamma(s)) * np.power(lam, 0.5 * (1.0 + s)) * t**s
    out = out * np.exp(-zs) * bessel_k_scaled(1.0 - s, zs)
    # leading term K_{1-s}(z) ~ Gamma(1-s)/2 (z/2)^{s-1} for tiny z
    small = -(4.0 ** (1.0 - s) * gamma(1.0 - s) / (2.0 * gamma(s))) * lam**s * tt ** (2.0 * s - 1.0)
    out = np.where(big, out, small)
    return float(out) if out.ndim == 0 else out


def mode_profile(lam, order, c0=1.0):
    """Closed-form extension profile for one eigenmode."""
    return ModeProfile(float(lam), _as_order(order), c0)


def _richardson(ts, vals, exponents):
    """Successive estimates of ``lim_{t->0} F(t)`` assuming
    ``F(t) = L + sum_j a_j t^{e_j}``; estimate ``j`` uses the ``j+1``
    smallest ``t`` values and eliminates the first ``j`` exponents."""
    order = np.argsort(ts)
    ts = np.asarray(ts, dtype=float)[order]
    vals = np.asarray(vals, dtype=float)[order]
    estimates = [vals[0]]
    for j in range(1, len(ts)):
        a = np.ones((j + 1, j + 1))
        for col, e in enumerate(exponents[:j], start=1):
            a[:, col] = ts[: j + 1] ** e
        sol = np.linalg.solve(a, vals[: j + 1])
        estimates.append(sol[0])
    return estimates


def dtn_limit(p, rtol=1e-6):
    """Extrapolated ``-lim_{t->0} t^{1-2s} alpha'(t)``.

    Samples at ``t = 10^{-m} / sqrt(lam)`` for ``m = 2..5`` and removes
    the correction powers ``t^{2-2s}``, ``t^2`` and ``t^{4-2s}``.

    Raises
    ------
    ExtrapolationError
        If the last two Richardson estimates differ by more than ``rtol``
        relative.
    """
    if p.c0 == 0:
        return 0.0
    s = p.order.s
    ts = 10.0 ** -np.arange(2, 6) / math.sqrt(p.lam)
    vals = -(ts ** (1.0 - 2.0 * s)) * p.derivative(ts)
    est = _richardson(ts, vals, [2.0 - 2.0 * s, 2.0, 4.0 - 2.0 * s])
    last, prev = est[-1], est[-2]
    if abs(last - prev) > rtol * abs(last):
        raise ExtrapolationError(
            f"DtN extrapolation not converged: estimates {prev!r} and {last!r}"
        )
    return float(last)


@dataclass(frozen=True)
class HalfLineQuadrature:
    """Nodes and weights for ``int_0^tmax g(t) t^w dt``.

    The panel layout (``s``, ``per_panel``, ``tmin``, ``ratio``) is kept so
    the rule for the companion exponent ``-w`` can be rebuilt on the same
    panels.
    """

    nodes: np.ndarray
    weights: np.ndarray
    weight_exponent: float
    tmax: float
    s: float
    per_panel: int
    tmin: float
    ratio: float

    def integrate(self, values):
        """Apply the rule to samples ``g(nodes)`` (last axis)."""
        return np.asarray(values) @ self.weights

    def companion(self):
        """Same panels, weight exponent negated (``1-2s`` <-> ``2s-1``)."""
        return half_line_quadrature(
            self.s, -self.weight_exponent, self.tmax, self.per_panel, tmin=self.tmin, ratio=self.ratio
        )

    def __len__(self):
        return self.nodes.shape[0]


def half_line_quadrature(order, weight_exponent, tmax, n, tmin=None, ratio=0.5):
    """Composite Gauss-Legendre rule for the weight ``t^w``.

    ``w`` must be ``1 - 2s`` or ``2s - 1``. With ``tau = t^{w+1}`` the
    weighted measure becomes ``dtau / (w+1)``, so the singular weight is
    integrated exactly. Panels are geometric in ``t`` (edges
    ``tmax * ratio^j`` down to ``tmin``) plus one panel ``[0, tmin]``; each
    carries ``n`` Gauss points.
    """
    order = _as_order(order)
    s = order.s
    w = float(weight_exponent)
    if not (math.isclose(w, 1.0 - 2.0 * s, abs_tol=1e-12) or math.isclose(w, 2.0 * s - 1.0, abs_tol=1e-12)):
        raise ValidationError(f"weight exponent must be 1-2s or 2s-1 for s={s}, got {w}")
    n = int(n)
    if n < 8:
        raise ValidationError(f"need at least 8 nodes per panel, got {n}")
    if not tmax > 0:
        raise ValidationError(f"tmax must be > 0, got {tmax}")
    if tmin is None:
        tmin = 1e-12 * tmax
    if not 0 < tmin < tmax or not 0 < ratio < 1:
        raise ValidationError("need 0 < tmin < tmax and 0 < ratio < 1")
    npanel = int(math.ceil(math.log(tmin / tmax) / math.log(ratio)))
    edges_t = tmax * ratio ** np.arange(npanel, -1, -1, dtype=float)
    edges = np.concatenate([[0.0], edges_t ** (w + 1.0)])
    x, gw = np.polynomial.legendre.leggauss(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    tau = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * gw[None, :]).ravel() / (w + 1.0)
    nodes = tau ** (1.0 / (w + 1.0))
    return HalfLineQuadrature(nodes, wts, w, float(tmax), s, n, float(tmin), float(ratio))


def default_quadrature(eigenvalues, order, n=16):
    """Quadrature resolving every scale ``1/sqrt(lam)`` in ``eigenvalues``."""
    order = _as_order(order)
    lam = np.asarray(eigenvalues, dtype=float)
    lo, hi = float(np.min(lam)), float(np.max(lam))
    tmax = _DECAY_WIDTH / math.sqrt(lo)
    tmin = 1e-10 / math.sqrt(hi)
    return half_line_quadrature(order, 1.0 - 2.0 * order.s, tmax, n, tmin=tmin)


def _active(sp, f):
    c = coefficients_of(f, sp)
    idx = np.nonzero(c)[0]
    return c, idx


def energy_tail(lam, order, c0, tmax):
    """Exact energy beyond ``tmax``: ``-alpha alpha' t^{1-2s}`` at ``tmax``."""
    order = _as_order(order)
    p = mode_profile(lam, order, c0)
    return float(-p.value(tmax) * p.derivative(tmax) * tmax ** (1.0 - 2.0 * order.s))


def extension_energy(sp, order, f, quad=None):
    r"""Weighted cylinder energy :math:`\int_0^\infty \sum_k [\lambda_k
    \alpha_k^2 + \alpha_k'^2] t^{1-2s} dt` by quadrature.

    The potential part is integrated against ``t^{1-2s}``. The kinetic part
    is rewritten as ``(t^{1-2s} alpha')^2 t^{2s-1}``, whose first factor
    stays bounded at 0, and integrated with the companion rule. Only modes
    with nonzero coefficients are evaluated. ``quad`` defaults to
    :func:`default_quadrature` over those modes. The energy missing beyond
    ``quad.tmax`` must stay below 1e-12 of the total, otherwise
    ValidationError is raised.
    """
    order = _as_order(order)
    c, idx = _active(sp, f)
    if idx.size == 0:
        return 0.0
    lam = sp.eigenvalues[idx]
    if quad is None:
        quad = default_quadrature(lam, order)
    s = order.s
    if not math.isclose(quad.s, s, abs_tol=1e-12):
        raise ValidationError(f"quadrature built for s={quad.s}, energy requested for s={s}")
    if math.isclose(quad.weight_exponent, 2.0 * s - 1.0, abs_tol=1e-12) and s != 0.5:
        quad = quad.companion()
    flux_quad = quad.companion()
    amp = np.abs(c[idx]) ** 2
    col = lam[:, None]
    a = _shape(col, s, quad.nodes[None, :])
    flux = flux_quad.nodes ** (1.0 - 2.0 * s) * _shape_derivative(col, s, flux_quad.nodes[None, :])
    total = float(amp @ (quad.integrate(col * a * a) + flux_quad.integrate(flux * flux)))
    tail = sum(energy_tail(lk, order, 1.0, quad.tmax) * ak for lk, ak in zip(lam, amp))
    if tail > _TAIL_FRACTION * total:
        raise ValidationError(
            f"tmax={quad.tmax:g} truncates {tail / total:.2e} of the energy; increase tmax"
        )
    return total


def spectral_energy(sp, order, f):
    """``K(s) * sum_k lam_k^s |c_k|^2``."""
    order = _as_order(order)
    c = coefficients_of(f, sp)
    return float(order.ks * np.sum(sp.eigenvalues**order.s * np.abs(c) ** 2))


def evaluate_extension(sp, order, f, t):
    """Extension ``u(., t) = sum_k alpha_k(t) phi_k`` as a GroundFunction."""
    order = _as_order(order)
    t = float(t)
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    c = coefficients_of(f, sp)
    if t == 0.0:
        return synthesize(c, sp)
    return synthesize(c * _shape(sp.eigenvalues, order.s, t), sp)
