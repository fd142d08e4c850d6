"""Radial Fourier (Hankel) transform by oscillatory quadrature.

    F(rho) = rho^{1-N/2} int_0^inf J_{N/2-1}(r rho) u(r) r^{N/2} dr

The integral is split into three parts: below the first node the origin
model is integrated term by term with the Bessel series; between the
nodes Gauss-Legendre panels no longer than half an oscillation are used;
above the last node the power-law tail is integrated along the contour
x + iy on which the Hankel function decays, which also assigns the
Abel-regularised value to tails that grow (distributional transforms of
homogeneous functions).
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, hankel1e, jv, roots_laguerre

from ..errors import QuadratureError

_GL_HI = np.polynomial.legendre.leggauss(12)
_GL_LO = np.polynomial.legendre.leggauss(8)
_LAG = roots_laguerre(60)
_GL_SEG = np.polynomial.legendre.leggauss(40)
# switch from series / real-axis quadrature to the complex contour here
_X_SWITCH = 8.0


def _bessel_power_head(kappa, nu, X):
    """int_0^X t^kappa J_nu(t) dt for an array of X >= 0."""
    X = np.asarray(X, dtype=float)
    out = np.zeros_like(X)
    small = X <= 4.0
    if np.any(small):
        xs = X[small]
        acc = np.zeros_like(xs)
        for k in range(60):
            e = 2 * k + nu + kappa + 1
            logc = -(2 * k + nu) * math.log(2.0) - gammaln(k + 1) - gammaln(k + nu + 1)
            term = (-1) ** k * np.exp(logc) * xs**e / e
            acc += term
            if np.all(np.abs(term) < 1e-17 * np.maximum(np.abs(acc), 1e-300)):
                break
        out[small] = acc
    for i in np.flatnonzero(~small):
        val, _ = quad(
            lambda t: jv(nu, t) / t**nu if t > 0 else 0.5**nu / math.gamma(nu + 1),
            0.0,
            X[i],
            weight="alg",
            wvar=(kappa + nu, 0.0),
            limit=400,
            epsabs=0.0,
            epsrel=1e-12,
        )
        out[i] = val
    return out


def _bessel_power_tail(kappa, nu, X):
    """int_X^inf t^kappa J_nu(t) dt (Abel-regularised) for an array of X > 0."""
    X = np.asarray(X, dtype=float)
    out = np.zeros_like(X)
    start = np.maximum(X, _X_SWITCH)
    # real-axis segment [X, X_SWITCH] for small X
    seg = X < _X_SWITCH
    if np.any(seg):
        nodes, weights = _GL_SEG
        a, b = X[seg, None], start[seg, None]
        t = 0.5 * (b - a) * nodes[None, :] + 0.5 * (b + a)
        out[seg] = 0.5 * (b[:, 0] - a[:, 0]) * np.sum(weights * t**kappa * jv(nu, t), axis=1)
    y, w = _LAG
    z = start[:, None] + 1j * y[None, :]
    f = z**kappa * hankel1e(nu, z)
    contour = 1j * np.exp(1j * start) * np.sum(w * f, axis=1)
    return out + contour.real


def _origin_part(profile, y, kappa_shift, nu):
    """int_0^{x0} f(x) x^{N/2} J_nu(x y) dx with the origin model of ``profile``."""
    x0 = profile.nodes[0]
    X = x0 * y
    a0 = profile.origin_exponent
    if a0 == 0.0:
        r0, r1 = profile.nodes[0], profile.nodes[1]
        v0, v1 = profile.values[0], profile.values[1]
        u2 = (v1 - v0) / (r1 * r1 - r0 * r0)
        A = v0 - u2 * r0 * r0
        k0 = kappa_shift
        k2 = kappa_shift + 2
        return A * y ** (-k0 - 1) * _bessel_power_head(k0, nu, X) + u2 * y ** (
            -k2 - 1
        ) * _bessel_power_head(k2, nu, X)
    k = a0 + kappa_shift
    return profile.values[0] * x0 ** (-a0) * y ** (-k - 1) * _bessel_power_head(k, nu, X)


def _tail_part(profile, y, kappa_shift, nu):
    if profile.decay_exponent is None:
        return np.zeros_like(y)
    x1 = profile.nodes[-1]
    a = profile.decay_exponent
    k = a + kappa_shift
    return profile.values[-1] * x1 ** (-a) * y ** (-k - 1) * _bessel_power_tail(k, nu, x1 * y)


def _middle_part(profile, yv, nu, half):
    x = profile.nodes
    lengths = np.diff(x)
    m = np.maximum(1, np.ceil(lengths * yv / math.pi)).astype(int)
    a = np.repeat(x[:-1], m)
    h = np.repeat(lengths / m, m)
    offs = np.concatenate([np.arange(k) for k in m])
    a = a + offs * h

    def rule(nodes, weights):
        t = a[:, None] + 0.5 * h[:, None] * (nodes[None, :] + 1.0)
        vals = profile(t.ravel()).reshape(t.shape) * t**half * jv(nu, t * yv)
        contrib = 0.5 * h[:, None] * weights[None, :] * vals
        return contrib.sum(), np.abs(contrib).sum()

    hi, scale = rule(*_GL_HI)
    lo, _ = rule(*_GL_LO)
    return hi, abs(hi - lo), scale


def hankel_transform(profile, y, tol=1e-7):
    """Apply the order-(N/2-1) radial Fourier transform at output nodes ``y``.

    Returns ``(values, error_estimate)``.  Raises :class:`QuadratureError`
    when the panel error estimate exceeds ``tol`` relative to the
    absolute integral of the integrand.
    """
    N = profile.N
    nu = N / 2.0 - 1.0
    half = N / 2.0
    y = np.asarray(y, dtype=float)
    head = _origin_part(profile, y, half, nu)
    tail = _tail_part(profile, y, half, nu)
    mid = np.empty_like(y)
    err = np.empty_like(y)
    for i, yv in enumerate(y):
        val, e, scale = _middle_part(profile, yv, nu, half)
        if e > tol * max(scale, 1e-300) and e > 1e-14:
            raise QuadratureError(
                f"Hankel panel error {e:.2e} exceeds tolerance at frequency {yv:.4g}"
            )
        mid[i] = val
        err[i] = e
    total = y ** (1.0 - half) * (head + mid + tail)
    return total, y ** (1.0 - half) * err
