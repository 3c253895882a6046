r"""Real special functions used by the extension formulas.

Gamma and the complementary error function sit on top of the C library
(`math.lgamma`, `math.erfc`). The modified Bessel function of the second
kind is evaluated with Temme's series for :math:`x \le 2` and Steed's
continued fraction for :math:`x > 2`; both regimes return the pair
:math:`K_\mu, K_{\mu+1}` for :math:`|\mu| \le 1/2`, which is all that is
needed for orders in :math:`(0, 1)`.
"""

import math

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "ln_gamma",
    "gamma",
    "bessel_k",
    "bessel_k_scaled",
    "bessel_k_flagged",
    "erfc",
]

_EPS = 1e-16
_MAXIT = 10000
# exp(-x) underflows to zero in double precision beyond this point
_UNDERFLOW_X = 745.0

# Taylor coefficients of 1/Gamma(z) about z = 0, indices 1..30
_RGAMMA = (
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
    1.7144063219273374334e-20,
)


def ln_gamma(x):
    """Natural logarithm of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def gamma(x):
    """Gamma function on the real line, excluding the poles 0, -1, -2, ...

    Negative arguments are shifted into ``(0, 1]`` with the recurrence
    ``Gamma(x) = Gamma(x + n) / (x (x+1) ... (x+n-1))`` so the sign comes
    out of the product explicitly.
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x!r}")
    if x > 0.0:
        if x > 171.6:
            return math.inf
        return math.exp(ln_gamma(x))
    # x is not an integer, so x + ceil(-x) lands in (0, 1)
    n = int(math.ceil(-x))
    shifted = x + n
    denom = 1.0
    for k in range(n):
        denom *= x + k
    return math.exp(ln_gamma(shifted)) / denom


def erfc(x):
    """Complementary error function."""
    return math.erfc(float(x))


def _gam12(mu):
    """Temme's auxiliary gamma combinations for ``|mu| <= 1/2``.

    Returns ``gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)`` where
    ``gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)`` and
    ``gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2``. Both are summed from
    the Taylor series of 1/Gamma so there is no cancellation at mu = 0.
    """
    gam1 = 0.0
    gam2 = 0.0
    pw = 1.0
    # 1/Gamma(1+mu) = sum_{k>=1} c_k mu^(k-1)
    for k, c in enumerate(_RGAMMA, start=1):
        if k % 2 == 1:
            gam2 += c * pw
        else:
            gam1 -= c * pw
            pw *= mu * mu
    gampl = gam2 - mu * gam1
    gammi = gam2 + mu * gam1
    return gam1, gam2, gampl, gammi


def _temme_series(mu, x):
    """Unscaled ``K_mu(x), K_{mu+1}(x)`` for ``x <= 2``."""
    gam1, gam2, gampl, gammi = _gam12(mu)
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -np.log(x2)
    e = mu * d
    fact2 = np.where(np.abs(e) < _EPS, 1.0, np.sinh(e) / np.where(e == 0.0, 1.0, e))
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i - mu * mu)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total += delta
        delta1 = c * (p - i * ff)
        total1 += delta1
        if np.all(np.abs(delta) < np.abs(total) * _EPS):
            break
    # K_{mu+1} overflows to inf for subnormal x, which is the right answer
    with np.errstate(over="ignore"):
        return total, total1 * 2.0 / x


def _steed_cf(mu, x):
    """Exponentially scaled ``K_mu(x), K_{mu+1}(x)`` for ``x > 2``."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25 - mu * mu
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, _MAXIT):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < np.abs(s) * _EPS):
            break
    h = a1 * h
    kmu = np.sqrt(math.pi / (2.0 * x)) / s
    kmu1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, kmu1


def _k_pair_scaled(mu, x):
    """``e^x K_mu(x)`` and ``e^x K_{mu+1}(x)`` for ``|mu| <= 1/2``, array ``x``."""
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x <= 2.0
    if np.any(small):
        xs = x[small]
        a, b = _temme_series(mu, xs)
        ex = np.exp(xs)
        k0[small] = a * ex
        k1[small] = b * ex
    if np.any(~small):
        a, b = _steed_cf(mu, x[~small])
        k0[~small] = a
        k1[~small] = b
    return k0, k1


def _k_scaled_any(nu, x):
    """``e^x K_nu(x)`` for any real ``|nu| < 2``; used for recurrence checks."""
    nu = abs(float(nu))
    if nu >= 2.0:
        raise DomainError(f"internal Bessel evaluation limited to |nu| < 2, got {nu!r}")
    nl = int(nu + 0.5)
    mu = nu - nl
    k0, k1 = _k_pair_scaled(mu, x)
    for k in range(1, nl):
        k0, k1 = k1, k0 + 2.0 * (mu + k) / x * k1
    return k1 if nl >= 1 else k0


def _prepare(nu, x):
    nu = float(nu)
    if not 0.0 < nu < 1.0:
        raise DomainError(f"bessel_k order must lie in (0, 1), got {nu!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("bessel_k requires x > 0")
    return nu, np.atleast_1d(arr), arr.ndim == 0


def bessel_k_scaled(nu, x):
    r"""Exponentially scaled Bessel function :math:`e^x K_\nu(x)`.

    Parameters
    ----------
    nu : float
        Order, ``0 < nu < 1``.
    x : float or array_like
        Positive argument(s).

    Returns
    -------
    float or ndarray
        Same shape as ``x``.
    """
    nu, arr, scalar = _prepare(nu, x)
    out = _k_scaled_any(nu, arr)
    return float(out[0]) if scalar else out


def bessel_k_flagged(nu, x):
    """Return ``(K_nu(x), underflow)`` where ``underflow`` marks zeros forced
    by exp(-x) leaving double range."""
    nu, arr, scalar = _prepare(nu, x)
    under = arr > _UNDERFLOW_X
    safe = np.where(under, 1.0, arr)
    vals = _k_scaled_any(nu, safe) * np.exp(-safe)
    vals = np.where(under, 0.0, vals)
    if scalar:
        return float(vals[0]), bool(under[0])
    return vals, under


def bessel_k(nu, x):
    """Modified Bessel function of the second kind ``K_nu(x)``, ``0 < nu < 1``.

    Arguments past the exp underflow threshold return 0.0; use
    :func:`bessel_k_flagged` to see which ones.
    """
    return bessel_k_flagged(nu, x)[0]
