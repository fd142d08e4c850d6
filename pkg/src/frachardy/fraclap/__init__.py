"""(-Delta)^s through three independent backends.

* radial: Mellin multiplier on log grids (:func:`frac_lap_radial`), with an
  oscillatory-quadrature Hankel transform as a second radial route;
* periodic box: FFT multiplier (:func:`frac_lap_fft`);
* pointwise: principal-value singular integral (:func:`frac_lap_singular`).
"""
from __future__ import annotations

import numpy as np

from ..constants import m_alpha
from .fft import apply_symbol, frac_lap_fft, wavenumber_norm
from .hankel import hankel_transform
from .mellin import apply_multiplier, multiplier
from .profiles import GridField, LogGridFunction, RadialProfile, SpectralProfile, log_grid
from .quadrature import radial_integral
from .singular import frac_lap_singular

__all__ = [
    "GridField",
    "LogGridFunction",
    "RadialProfile",
    "SpectralProfile",
    "apply_symbol",
    "frac_lap_fft",
    "frac_lap_radial",
    "frac_lap_singular",
    "ground_state",
    "ground_state_spectrum",
    "hankel_forward",
    "hankel_inverse",
    "log_grid",
    "multiplier",
    "radial_integral",
    "seminorm_sq",
    "wavenumber_norm",
]


def _spectral_decay(u: LogGridFunction):
    # an r^a0 singularity at the origin produces a rho^(-N-a0) tail
    a0 = u.origin_exponent
    return None if a0 == 0.0 else -u.N - a0


def hankel_forward(u: RadialProfile, rho=None, tol=1e-7) -> SpectralProfile:
    """Radial Fourier transform of ``u`` on the frequency nodes ``rho``.

    Defaults to the reciprocal grid of ``u``.  The result carries a tail
    model derived from the origin behaviour of ``u``.
    """
    if rho is None:
        rho = np.sort(1.0 / u.nodes)
    vals, _ = hankel_transform(u, rho, tol=tol)
    return SpectralProfile(rho, vals, u.N, _spectral_decay(u))


def hankel_inverse(F: SpectralProfile, r=None, tol=1e-7) -> RadialProfile:
    """Inverse of :func:`hankel_forward` (the transform is an involution)."""
    if r is None:
        r = np.sort(1.0 / F.nodes)
    vals, _ = hankel_transform(F, r, tol=tol)
    return RadialProfile(r, vals, F.N, _spectral_decay(F))


def _output_decay(u, s):
    if u.decay_exponent is None:
        return -u.N - 2 * s
    return max(u.decay_exponent - 2 * s, -u.N - 2 * s)


def frac_lap_radial(u: RadialProfile, s: float, method="mellin", rho=None) -> RadialProfile:
    """(-Delta)^s of a radial profile, on the same nodes.

    ``method="mellin"`` (default) applies the composed Hankel / rho^{2s} /
    Hankel operator as a Mellin multiplier.  ``method="hankel"`` performs
    the two transforms by quadrature on the frequency nodes ``rho``; it is
    far slower and intended for cross-checks on rapidly decaying data.
    """
    if not 0.0 < s < 1.0:
        from ..errors import DomainError

        raise DomainError(f"order s must lie in (0, 1), got {s}")
    if method == "mellin":
        vals = apply_multiplier(u, s)
    elif method == "hankel":
        F = hankel_forward(u, rho)
        G = SpectralProfile(F.nodes, F.values * F.nodes ** (2 * s), u.N,
                            None if F.decay_exponent is None else F.decay_exponent + 2 * s)
        vals, _ = hankel_transform(G, u.nodes)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RadialProfile(u.nodes.copy(), vals, u.N, _output_decay(u, s))


def seminorm_sq(u: RadialProfile, s: float) -> float:
    """Integral of |zeta|^{2s} |u^|^2, computed as the integral of u (-Delta)^s u."""
    lu = frac_lap_radial(u, s)
    return radial_integral(u, lambda r, v: v * lu.values)


def ground_state(N, s, alpha, **grid) -> RadialProfile:
    """theta_alpha(r) = r^((2s-N)/2 + alpha) on a log grid, with its tail model."""
    return RadialProfile.power((2 * s - N) / 2.0 + alpha, N, **grid)


def ground_state_spectrum(N, s, alpha, rho) -> SpectralProfile:
    """Closed-form transform m_alpha rho^(-N/2 - s - alpha)."""
    rho = np.asarray(rho, dtype=float)
    e = -N / 2.0 - s - alpha
    return SpectralProfile(rho, m_alpha(N, s, alpha) * rho**e, N, e)
