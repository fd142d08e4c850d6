"""Poisson-kernel extension, flux extrapolation and weighted energy.

P(t, x) = p_Ns t^{2s} (|x|^2 + t^2)^{-(N+2s)/2} has unit mass for every t.
For radial data the convolution reduces to a single radial integral with
the angular factor of :func:`sphere_kernel`; its Fourier symbol is

    phi(t rho) = 2^{1-s} / Gamma(s) (t rho)^s K_s(t rho),

used for periodic-box fields.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import kve

from ..constants import gamma_fn, kernel_constants, sphere_area
from ..errors import DomainError, ExtrapolationError
from ..fraclap.fft import apply_symbol
from ..fraclap.profiles import GridField, RadialProfile
from ..fraclap.quadrature import sphere_kernel
from .mesh import HalfSpaceMesh
from .solver import HalfSpaceField

_ORDER = 12
_GL = np.polynomial.legendre.leggauss(_ORDER)
# distance panels grow by this factor away from the kernel peak
_PANEL_GROWTH = math.sqrt(2.0)
_ORIGIN_PANELS = np.geomspace(1e-10, 1.0, 41)


def poisson_symbol(s, x):
    """phi(x) = 2^{1-s}/Gamma(s) x^s K_s(x), with phi(0) = 1."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x > 0
    xv = x[nz]
    out[nz] = 2.0 ** (1 - s) / gamma_fn(s) * xv**s * kve(s, xv) * np.exp(-xv)
    return out


def _panel_nodes(lo, hi):
    """Gauss nodes and weights on panels [lo, hi] (arrays of equal shape)."""
    x, w = _GL
    half = 0.5 * (hi - lo)
    nodes = (lo + half)[..., None] + half[..., None] * x
    weights = half[..., None] * w
    return nodes.reshape(*lo.shape[:-1], -1), weights.reshape(*lo.shape[:-1], -1)


def _radial_offsets(t, r, rho_q):
    """Quadrature nodes in rho for the kernel peaked at rho = r with width t."""
    r = r[:, None]
    # origin region (0, r/2]: geometric in rho
    e = 0.5 * r * _ORIGIN_PANELS[None, :]
    n0, w0 = _panel_nodes(e[:, :-1], e[:, 1:])
    # near region: distance d from r, growing from t*1e-4
    d_max = float(np.max(rho_q))
    k = math.ceil(math.log(d_max / (t * 1e-4)) / math.log(_PANEL_GROWTH)) + 1
    d = np.concatenate([[0.0], t * 1e-4 * _PANEL_GROWTH ** np.arange(k)])[None, :]
    dl = np.minimum(d, 0.5 * r)
    n1, w1 = _panel_nodes(r - dl[:, 1:], r - dl[:, :-1])
    dr = np.minimum(d, rho_q[:, None] - r)
    n2, w2 = _panel_nodes(r + dr[:, :-1], r + dr[:, 1:])
    return np.concatenate([n0, n1, n2], axis=1), np.concatenate([w0, w1, w2], axis=1)


def poisson_difference(u: RadialProfile, s: float, t: float, r=None) -> np.ndarray:
    """(P(t, .) * u)(r) - u(r), computed without cancellation."""
    if not t > 0:
        raise DomainError("the extension height t must be positive")
    N = u.N
    r = u.nodes if r is None else np.asarray(r, dtype=float)
    p_ns = kernel_constants(N, s)[1]
    m = (N + 2 * s) / 2.0
    rho_q = np.maximum(u.nodes[-1], 500.0 * (r + t))
    rho, w = _radial_offsets(t, r, rho_q)
    ur = u(r)
    A = t * t + r[:, None] ** 2 + rho * rho
    B = 2.0 * r[:, None] * rho
    lo = t * t + (r[:, None] - rho) ** 2
    ker = p_ns * t ** (2 * s) * sphere_kernel(N, A, B, m, lo) * rho ** (N - 1)
    diff = np.sum(w * ker * (u(rho) - ur[:, None]), axis=1)

    # (0, 1e-10 r/2): origin model of u against the kernel value at rho = 0
    e = 0.5e-10 * r
    k0 = p_ns * t ** (2 * s) * sphere_area(N) * (t * t + r * r) ** (-m)
    a0 = u.origin_exponent
    head = u.values[0] * u.nodes[0] ** (-a0) * e ** (a0 + N) / (a0 + N) - ur * e**N / N
    diff += k0 * head

    # beyond rho_q the kernel is p |S| t^{2s} rho^{-1-2s} to relative O((r+t)^2/rho_q^2)
    c = p_ns * sphere_area(N) * t ** (2 * s)
    tail = -ur * rho_q ** (-2 * s) / (2 * s)
    if u.decay_exponent is not None:
        dd = u.decay_exponent
        x1 = u.nodes[-1]
        tail += u.values[-1] * x1 ** (-dd) * rho_q ** (dd - 2 * s) / (2 * s - dd)
    return diff + c * tail


def poisson_extend(u, t: float, s: float = None):
    """Slice at height ``t`` of the Poisson extension of ``u``.

    ``u`` is a :class:`RadialProfile` (then ``s`` is required) or a
    :class:`GridField` (``s`` likewise); the result is of the same kind.
    """
    if s is None:
        raise DomainError("the order s is required")
    if not t > 0:
        raise DomainError("the extension height t must be positive")
    if isinstance(u, GridField):
        return apply_symbol(u, lambda z: poisson_symbol(s, t * z))
    if isinstance(u, RadialProfile):
        vals = u.values + poisson_difference(u, s, t)
        return RadialProfile(u.nodes.copy(), vals, u.N, u.decay_exponent)
    raise TypeError("poisson_extend expects a RadialProfile or a GridField")


def extend_on_mesh(u: RadialProfile, mesh: HalfSpaceMesh) -> HalfSpaceField:
    """Poisson extension sampled at every node of ``mesh``."""
    if mesh.N != u.N:
        raise DomainError("mesh and profile dimensions differ")
    K, J = mesh.shape
    vals = np.empty((K, J))
    base = u(mesh.r)
    vals[0] = base
    for k in range(1, K):
        vals[k] = base + poisson_difference(u, mesh.s, mesh.t[k], mesh.r)
    return HalfSpaceField(mesh, vals)


def _secant(t1, t2, e, s):
    p = 2.0 * s
    return p * (t2**e - t1**e) / (t2**p - t1**p)


def _flux_fit(F, G):
    coef, *_ = np.linalg.lstsq(G, F, rcond=None)
    return coef[0]


def dtn_trace(w: HalfSpaceField, t_max=0.05, rel_window=0.05, tol=1e-2, min_levels=8) -> RadialProfile:
    """-lim t^{1-2s} dw/dt at t = 0, extrapolated from the graded t levels.

    Secant fluxes F_k = 2s (w_{k+1} - w_k) / (t_{k+1}^{2s} - t_k^{2s}) are
    fitted by the expansion w = v + a t^{2s} + b t^2 + c t^{2+2s}.  At
    radius r only levels below min(t_max, rel_window * r) enter, since a
    field varying on the scale r is not resolved above it; radii with
    fewer than ``min_levels`` such levels are dropped from the result.
    The fit over the lower half of each window must agree with the full
    fit to ``tol`` or :class:`ExtrapolationError` is raised.
    """
    mesh = w.mesh
    s = mesh.s
    t = mesh.t
    top = np.minimum(t_max, rel_window * mesh.r)
    counts = np.searchsorted(t, top, side="right") - 1
    keep = np.flatnonzero(counts >= min_levels)
    if keep.size < 4:
        raise ExtrapolationError("too few t levels inside the fit window")
    n_all = int(counts[keep].max())
    t1, t2 = t[:n_all], t[1 : n_all + 1]
    F = 2 * s * (w.values[1 : n_all + 1] - w.values[:n_all]) / (t2 ** (2 * s) - t1 ** (2 * s))[:, None]
    G = np.stack([np.ones(n_all), _secant(t1, t2, 2.0, s), _secant(t1, t2, 2.0 + 2 * s, s)], axis=1)
    full = np.empty(keep.size)
    half = np.empty(keep.size)
    for i, j in enumerate(keep):
        n = counts[j]
        full[i] = -_flux_fit(F[:n, j], G[:n])
        half[i] = -_flux_fit(F[: n // 2, j], G[: n // 2])
    floor = 1e-3 * float(np.max(np.abs(full)))
    drift = float(np.max(np.abs(full - half) / np.maximum(np.abs(full), floor)))
    if drift > tol:
        raise ExtrapolationError(f"flux extrapolation unstable (relative drift {drift:.2e})")
    return RadialProfile(mesh.r[keep].copy(), full, mesh.N)


class Energy(NamedTuple):
    value: float
    tail: float

    def __float__(self):
        return self.value


def weighted_energy(w: HalfSpaceField) -> Energy:
    """int t^{1-2s} |grad w|^2 over the truncated domain (radial measure).

    ``tail`` estimates the energy outside the box from the boundary values
    and normal differences (w times outward flux on the outer boundary).
    """
    mesh = w.mesh
    v = w.values
    value = mesh.energy(v)
    ct = mesh.t_conductance()[-1] * mesh.r_weights()
    top = np.sum(ct * v[-1] * (v[-2] - v[-1]))
    cr = mesh.t_weights() * mesh.r_conductance()[-1]
    side = np.sum(cr * v[:, -1] * (v[:, -2] - v[:, -1]))
    return Energy(float(value), float(abs(top) + abs(side)))
