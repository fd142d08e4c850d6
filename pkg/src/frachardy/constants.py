"""Gamma function and the closed-form constants of the Hardy problem.

All constants are pure functions of ``(N, s, alpha)``.  :class:`Params`
bundles the problem parameters with validation and derived exponents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np

from .errors import CalibrationError, DomainError

# Lanczos approximation, g = 7, nine terms (about 15 significant digits).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _lanczos(x):
    # valid for x >= 0.5
    z = x - 1.0
    acc = np.full_like(z, _LANCZOS_COEF[0])
    for k, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc = acc + c / (z + k)
    tt = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * tt ** (z + 0.5) * np.exp(-tt) * acc


def gamma_fn(x):
    """Gamma function for real scalars or arrays.

    Uses the Lanczos series for ``x >= 1/2`` and the reflection formula
    below.  Raises :class:`DomainError` at non-positive integers.
    """
    arr = np.asarray(x, dtype=float)
    if np.any((arr <= 0) & (arr == np.round(arr))):
        raise DomainError(f"Gamma has a pole at non-positive integer {x!r}")
    small = arr < 0.5
    out = np.empty_like(arr)
    big = ~small
    if np.any(big):
        out[big] = _lanczos(arr[big])
    if np.any(small):
        xs = arr[small]
        # sin(pi x) from the exact reduced argument x - n, keeps relative
        # accuracy next to the poles
        n = np.round(xs)
        sin = np.where(n % 2 == 0, 1.0, -1.0) * np.sin(math.pi * (xs - n))
        out[small] = math.pi / (sin * _lanczos(1.0 - xs))
    if out.ndim == 0:
        return float(out)
    return out


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / gamma_fn(N / 2.0)


def _check_ns(N, s):
    if int(N) != N or N < 1:
        raise DomainError(f"dimension N must be a positive integer, got {N!r}")
    if not 0.0 < s < 1.0:
        raise DomainError(f"order s must lie in (0, 1), got {s!r}")


def _check_hardy(N, s):
    _check_ns(N, s)
    if N <= 2 * s:
        raise DomainError(f"Hardy potential needs N > 2s (N={N}, s={s})")


def gamma0(N: int, s: float) -> float:
    """Optimal constant of the fractional Hardy inequality."""
    _check_hardy(N, s)
    return 2.0 ** (2 * s) * (gamma_fn((N + 2 * s) / 4.0) / gamma_fn((N - 2 * s) / 4.0)) ** 2


def gamma_alpha(N: int, s: float, alpha: float) -> float:
    """Hardy coefficient attached to the ground state |x|^((2s-N)/2 + alpha).

    Even in ``alpha``; equals :func:`gamma0` at 0 and vanishes at
    ``|alpha| = (N-2s)/2`` (returned by continuity rather than evaluated).
    """
    _check_hardy(N, s)
    edge = (N - 2 * s) / 2.0
    a = abs(alpha)
    if a > edge:
        raise DomainError(f"|alpha| must not exceed (N-2s)/2 = {edge}, got {alpha}")
    if a == edge:
        return 0.0
    num = gamma_fn((N + 2 * s + 2 * a) / 4.0) * gamma_fn((N + 2 * s - 2 * a) / 4.0)
    den = gamma_fn((N - 2 * s - 2 * a) / 4.0) * gamma_fn((N - 2 * s + 2 * a) / 4.0)
    return 2.0 ** (2 * s) * num / den


def m_alpha(N: int, s: float, alpha: float) -> float:
    """Fourier coefficient of the ground state: F(theta_alpha) = m_alpha rho^(-N/2-s-alpha).

    Defined for alpha in (-N/2 - s, (N-2s)/2); ``m_alpha(a) * m_alpha(-a)`` is
    the Hardy coefficient :func:`gamma_alpha`.
    """
    _check_hardy(N, s)
    lo, hi = -N / 2.0 - s, (N - 2 * s) / 2.0
    if not lo < alpha <= hi:
        raise DomainError(f"alpha must lie in ({lo}, {hi}], got {alpha}")
    if alpha == hi:
        # 1/Gamma(0) = 0
        return 0.0
    return 2.0 ** (s + alpha) * gamma_fn((N + 2 * s + 2 * alpha) / 4.0) / gamma_fn(
        (N - 2 * s - 2 * alpha) / 4.0
    )


def kappa_s(s: float) -> float:
    """Dirichlet-to-Neumann constant of the weighted extension."""
    if not 0.0 < s < 1.0:
        raise DomainError(f"order s must lie in (0, 1), got {s!r}")
    return gamma_fn(1.0 - s) / (2.0 ** (2 * s - 1) * gamma_fn(s))


def poisson_mass(N: int, s: float, t: float = 1.0) -> float:
    """Integral over R^N of t^{2s} (|x|^2 + t^2)^{-(N+2s)/2}, by quadrature."""
    from scipy.integrate import quad

    _check_ns(N, s)
    k = (N + 2 * s) / 2.0

    # substitute r = t * tan(phi) so the integrand is bounded on [0, pi/2]
    def radial(phi):
        c, sn = math.cos(phi), math.sin(phi)
        return sn ** (N - 1) * c ** (2 * k - N - 1)

    val, err = quad(radial, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-13, limit=200)
    # t^{2s} * t^{N-1} * t * t^{-2k} = 1 : independent of t
    scale = t ** (2 * s) * t ** N * t ** (-2 * k)
    return sphere_area(N) * val * scale


@lru_cache(maxsize=64)
def kernel_constants(N: int, s: float, tol: float = 1e-6) -> tuple[float, float]:
    """Calibrated normalisations ``(c_sN, p_Ns)``.

    ``p_Ns`` makes the Poisson kernel a probability density for every t.
    ``c_sN`` is chosen so the principal-value integral reproduces the
    Fourier-multiplier operator on the Gaussian ``exp(-|x|^2/2)`` at
    ``|x| = 1``; agreement is then re-checked at ``|x| = 1/2`` and ``2`` and
    a :class:`CalibrationError` is raised if either exceeds ``tol``.
    """
    from .fraclap import RadialProfile, frac_lap_radial, frac_lap_singular

    _check_ns(N, s)
    p_ns = 1.0 / poisson_mass(N, s, 1.0)

    # interior nodes of the log grid are far more accurate than the origin
    # extrapolation, so the probe points avoid r = 0
    gauss = RadialProfile.from_function(
        lambda r: np.exp(-0.5 * r * r), N=N, r_min=1e-3, r_max=12.0, n=1024
    )
    spectral = frac_lap_radial(gauss, s)

    def f(y):
        return np.exp(-0.5 * np.sum(y * y, axis=-1))

    def probe(r, c):
        x = np.zeros(N)
        x[0] = r
        return frac_lap_singular(f, x, s, c_sn=c)[0]

    c_sn = spectral.at(1.0) / probe(1.0, 1.0)
    for r in (0.5, 2.0):
        raw, ref = probe(r, c_sn), spectral.at(r)
        if abs(raw - ref) > tol * abs(ref):
            raise CalibrationError(
                f"singular and spectral backends disagree at |x|={r}: {raw} vs {ref}"
            )
    return float(c_sn), float(p_ns)


@dataclass(frozen=True)
class Params:
    """Problem parameters ``(N, s, alpha, p, q)``.

    ``alpha`` may sit exactly at the endpoint (N-2s)/2, where the Hardy
    coefficient is zero.
    """

    N: int = 3
    s: float = 0.5
    alpha: float = 0.0
    p: float = 2.0
    q: float = 1.5

    def __post_init__(self):
        _check_ns(self.N, self.s)
        if self.N <= 2 * self.s:
            raise DomainError(f"N > 2s required (N={self.N}, s={self.s})")
        if not 0.0 <= self.alpha <= self.alpha_max:
            raise DomainError(
                f"alpha must lie in [0, {self.alpha_max}], got {self.alpha}"
            )
        if not self.p > 1.0:
            raise DomainError(f"p must exceed 1, got {self.p}")
        if not 1.0 < self.q < 2.0:
            raise DomainError(f"q must lie in (1, 2), got {self.q}")

    @property
    def a(self) -> float:
        return 1.0 - 2.0 * self.s

    @property
    def tau(self) -> float:
        return (1.0 + 2.0 * self.s) / 2.0 - 1.0 / self.q

    @property
    def alpha_max(self) -> float:
        return (self.N - 2.0 * self.s) / 2.0

    @property
    def p_crit(self) -> float:
        """Critical exponent (N+2s-2alpha)/(N-2s-2alpha); infinite at the endpoint."""
        den = self.N - 2 * self.s - 2 * self.alpha
        if den <= 0:
            return math.inf
        return (self.N + 2 * self.s - 2 * self.alpha) / den

    @property
    def p_sobolev(self) -> float:
        return (self.N + 2 * self.s) / (self.N - 2 * self.s)

    @property
    def ground_exponent(self) -> float:
        return (2 * self.s - self.N) / 2.0 + self.alpha

    def require_remainder(self):
        if not self.tau > 0 or not self.q > 2.0 / (1.0 + 2.0 * self.s):
            raise DomainError(
                f"q must exceed max(1, 2/(1+2s)) = {max(1.0, 2 / (1 + 2 * self.s))}"
            )

    def constants(self) -> "PaperConstants":
        c_sn, p_ns = kernel_constants(self.N, self.s)
        ga = gamma_alpha(self.N, self.s, self.alpha)
        return PaperConstants(
            gamma0=gamma0(self.N, self.s),
            gamma_alpha=ga,
            m_alpha=m_alpha(self.N, self.s, self.alpha),
            kappa_s=kappa_s(self.s),
            c_sN=c_sn,
            p_Ns=p_ns,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PaperConstants:
    gamma0: float
    gamma_alpha: float
    m_alpha: float
    kappa_s: float
    c_sN: float
    p_Ns: float

    def to_dict(self) -> dict:
        return asdict(self)
