"""Spectral fractional powers and their half-cylinder extensions."""

from .analysis import (
    compactness_report,
    diamagnetic_check,
    fractional_apply,
    interpolation_norm,
    lp_interpolation_check,
    tail_mass_check,
    truncation_modulus,
)
from .eigensolve import EigenDecomposition, eigh_hermitian, eigh_symmetric, eigh_tridiagonal
from .errors import (
    ConvergenceError,
    DomainError,
    ExtrapolationError,
    FracSpecError,
    NumericalError,
    PoleError,
    ValidationError,
)
from .extension import (
    FracOrder,
    HalfLineQuadrature,
    ModeProfile,
    default_quadrature,
    dtn_limit,
    evaluate_extension,
    extension_energy,
    half_line_quadrature,
    k_constant,
    mode_profile,
    spectral_energy,
)
from .operators import (
    BackendSpec,
    GroundFunction,
    MagneticAssembly,
    Spectrum,
    build_backend,
    magnetic_assembly,
    magnetic_spectrum,
    oscillator_spectrum,
    project,
    synthesize,
)
from .specfun import bessel_k, erfc, gamma, ln_gamma

__version__ = "0.1.0"
