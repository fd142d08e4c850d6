"""Pointwise principal-value integral backend.

    (-Delta)^s f(x) = c/2 int_{S^{N-1}} int_0^inf
                      (2 f(x) - f(x + rho w) - f(x - rho w)) rho^{-1-2s} drho dw

The even second difference removes the principal value.  On [0, delta]
the integrand is written as g(rho) rho^{1-2s} with g smooth and integrated
by Gauss-Jacobi; [delta, R] uses log-graded Gauss-Legendre panels; the
rays are continued beyond R by their value at R.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from ..constants import sphere_area
from ..errors import QuadratureError


@lru_cache(maxsize=16)
def _directions(N, n_polar):
    """Unit vectors and weights summing to |S^{N-1}|."""
    if N == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if N == 2:
        m = 4 * n_polar
        th = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(m, 2 * np.pi / m)
    if N == 3:
        ct, wt = np.polynomial.legendre.leggauss(n_polar)
        m = 2 * n_polar
        ph = 2 * np.pi * np.arange(m) / m
        st = np.sqrt(1 - ct * ct)
        dirs = np.stack(
            [
                np.outer(st, np.cos(ph)).ravel(),
                np.outer(st, np.sin(ph)).ravel(),
                np.repeat(ct, m),
            ],
            axis=1,
        )
        w = np.outer(wt, np.full(m, 2 * np.pi / m)).ravel()
        return dirs, w
    raise ValueError("singular backend supports N <= 3")


def frac_lap_singular(
    f,
    x,
    s,
    c_sn=None,
    delta=0.05,
    radius=None,
    n_polar=24,
    panels_per_decade=8,
    order=16,
    tol=1e-8,
):
    """Evaluate (-Delta)^s f at the point ``x``.

    ``f`` maps an array of points with shape (..., N) to values with shape
    (...).  Returns ``(value, tail_estimate)``; raises
    :class:`QuadratureError` if the tail estimate exceeds ``tol`` relative
    to the value.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    N = x.size
    if c_sn is None:
        from ..constants import kernel_constants

        c_sn = kernel_constants(N, s)[0]
    if radius is None:
        radius = 50.0 + 2.0 * float(np.linalg.norm(x))
    dirs, wdir = _directions(N, n_polar)
    fx = float(f(x[None, :])[0])

    def second_diff(rho):
        # shape (n_dirs, n_rho)
        disp = dirs[:, None, :] * rho[None, :, None]
        fp = f(x + disp)
        fm = f(x - disp)
        return 2 * fx - fp - fm

    # [0, delta] with weight rho^{1-2s}
    gj_x, gj_w = roots_jacobi(order, 0.0, 1.0 - 2 * s)
    rho0 = 0.5 * delta * (gj_x + 1.0)
    g0 = second_diff(rho0) / rho0**2
    inner = (0.5 * delta) ** (2 - 2 * s) * (g0 @ gj_w)

    # [delta, radius] on log-graded panels
    decades = math.log10(radius / delta)
    n_pan = max(1, int(math.ceil(decades * panels_per_decade)))
    edges = np.geomspace(delta, radius, n_pan + 1)
    gl_x, gl_w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    rho = (0.5 * (b - a) * gl_x[None, :] + 0.5 * (b + a)).ravel()
    w = (0.5 * (b - a) * gl_w[None, :]).ravel()
    d = second_diff(rho)
    outer = d @ (w * rho ** (-1 - 2 * s))

    radial = inner + outer
    # beyond R each ray is continued by its value at R; the spread of
    # those values bounds the error of that continuation
    fp, fm = f(x + dirs * radius), f(x - dirs * radius)
    beyond = (2 * fx - fp - fm) * radius ** (-2 * s) / (2 * s)
    spread = float(np.ptp(np.concatenate([fp, fm])))

    value = 0.5 * c_sn * float(wdir @ (radial + beyond))
    estimate = 0.5 * c_sn * sphere_area(N) * spread * radius ** (-2 * s) / (2 * s)
    if estimate > tol * max(abs(value), 1e-300):
        raise QuadratureError(
            f"tail estimate {estimate:.2e} exceeds tolerance; increase the radius"
        )
    return value, estimate
