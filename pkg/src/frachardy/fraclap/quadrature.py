"""Radial integrals over R^N on log-graded grids."""
from __future__ import annotations

import numpy as np
from scipy.integrate import simpson

from ..constants import sphere_area
from ..errors import DomainError


def _end_tail(h0, h1, dx):
    # power-law continuation of h(x) = integrand * r^N beyond the grid, x = log r;
    # h0 is the end sample and h1 its neighbour, so the slope measures growth
    # towards the interior and must be positive for the tail to converge
    if h0 == 0.0 or h0 * h1 <= 0:
        return 0.0
    slope = np.log(h1 / h0) / dx
    return h0 / slope if slope > 0 else np.inf


def log_integral(x_nodes, h, tails=True) -> float:
    """Integral over log r of samples ``h`` with power-law end corrections."""
    lx = np.log(x_nodes)
    total = simpson(h, x=lx)
    if tails:
        total += _end_tail(h[0], h[1], lx[1] - lx[0])
        total += _end_tail(h[-1], h[-2], lx[-1] - lx[-2])
    return float(total)


def radial_integral(profile, integrand) -> float:
    """|S^{N-1}| times the integral of ``integrand(r, u(r)) r^{N-1} dr`` over (0, inf)."""
    r = profile.nodes
    g = integrand(r, profile.values)
    h = g * r**profile.N
    return sphere_area(profile.N) * log_integral(r, h)


def sphere_kernel(N, A, B, m, lo=None):
    """Integral over the unit sphere S^{N-1} of (A - B w_1)^{-m}, for A > B >= 0.

    This is the angular part of any radial convolution with a kernel that
    depends on |x - y|^2 = r^2 + rho^2 - 2 r rho w_1.  Closed forms for
    N = 1 and 3; a Gauss hypergeometric function for N = 2.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    lo = A - B if lo is None else np.asarray(lo, dtype=float)
    if N == 1:
        return lo ** (-m) + (A + B) ** (-m)
    if N == 2:
        return 2 * np.pi * A ** (-m) * _circle_hyp(m, lo * (A + B) / (A * A))
    if N == 3:
        # 2 pi [(A-B)^{1-m} - (A+B)^{1-m}] / ((m-1) B), written without cancellation
        ratio = np.log1p(2 * B / lo)
        with np.errstate(invalid="ignore", divide="ignore"):
            if m == 1.0:
                val = 2 * np.pi * ratio / B
            else:
                val = 2 * np.pi * lo ** (1 - m) * -np.expm1((1 - m) * ratio) / ((m - 1) * B)
        small = B <= 1e-12 * A
        return np.where(small, 4 * np.pi * A ** (-m), val)
    raise DomainError("radial kernels are implemented for N <= 3")


def _circle_hyp(m, w):
    """2F1(m/2, (m+1)/2; 1; 1 - w) for 0 < w <= 1.

    Near w = 0 the connection formula in powers of w is used, which is
    both faster and free of the cancellation in 1 - z.
    """
    from scipy.special import gamma, hyp2f1

    a, b = m / 2.0, (m + 1) / 2.0
    e = 0.5 - m  # c - a - b
    w = np.asarray(w, dtype=float)
    if abs(e - round(e)) < 1e-9:
        return hyp2f1(a, b, 1.0, 1.0 - w)
    near = w < 0.5
    out = np.empty_like(w)
    out[~near] = hyp2f1(a, b, 1.0, 1.0 - w[~near])
    wn = w[near]
    c1 = gamma(e) / (gamma(1 - a) * gamma(1 - b))
    c2 = gamma(-e) / (gamma(a) * gamma(b))
    out[near] = c1 * hyp2f1(a, b, 1 - e, wn) + wn**e * c2 * hyp2f1(1 - a, 1 - b, 1 + e, wn)
    return out
