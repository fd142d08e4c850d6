"""Hardy quotients, the supersolution form test and the remainder ratio.

The quadratic form is evaluated as the integral of u (-Delta)^s u (Mellin
backend) and the Hardy term as the integral of |x|^{-2s} u^2; both are
radial quadratures on the profile's log grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Union

import numpy as np

from .constants import gamma0, sphere_area
from .errors import DomainError
from .fraclap import RadialProfile, frac_lap_radial, seminorm_sq
from .fraclap.profiles import log_grid
from .fraclap.quadrature import radial_integral, sphere_kernel

TRIAL_R_MIN = 1e-4
TRIAL_NODES = 1024


def _psi(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_cutoff(r, inner=0.5, outer=1.0):
    """C-infinity step: 1 for r <= inner, 0 for r >= outer."""
    a = _psi(outer - r)
    return a / (a + _psi(r - inner))


def bump(r, center=0.0, width=1.0):
    """exp(1 - 1/(1 - ((r - c)/w)^2)) on |r - c| < w, scaled to peak 1."""
    z = (np.asarray(r, dtype=float) - center) / width
    out = np.zeros_like(z)
    inside = np.abs(z) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - z[inside] ** 2))
    return out


@dataclass
class TrialFamily:
    """Deterministic list of radial test profiles supported in the unit ball."""

    members: List[RadialProfile]
    labels: List[str]
    support: float = 1.0

    def __post_init__(self):
        if len(self.members) != len(self.labels):
            raise DomainError("one label per member is required")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(zip(self.labels, self.members))

    def __add__(self, other: "TrialFamily") -> "TrialFamily":
        return TrialFamily(self.members + other.members, self.labels + other.labels,
                           max(self.support, other.support))

    @staticmethod
    def _grid(r_min, n):
        return log_grid(r_min, 1.0, n)

    @classmethod
    def capped_ground_states(cls, N, s, caps=(1e-1, 1e-2, 1e-3), n=TRIAL_NODES):
        """max(r, eps)^((2s-N)/2) times a smooth cutoff, for each cap eps."""
        e = (2 * s - N) / 2.0
        members, labels = [], []
        for eps in caps:
            r = cls._grid(min(TRIAL_R_MIN, eps / 100.0), n)
            u = (np.maximum(r, eps) / eps) ** e * smooth_cutoff(r)
            members.append(RadialProfile(r, u, N))
            labels.append(f"cap:{eps:g}")
        return cls(members, labels)

    @classmethod
    def near_ground_states(cls, N, s, alphas=(0.2, 0.1, 0.05, 0.02), n=TRIAL_NODES):
        """r^((2s-N)/2 + alpha) times a smooth cutoff; the Hardy integral
        diverges like 1/alpha, so the quotient approaches gamma_0 as alpha -> 0."""
        members, labels = [], []
        for al in alphas:
            r = cls._grid(TRIAL_R_MIN, n)
            u = r ** ((2 * s - N) / 2.0 + al) * smooth_cutoff(r)
            members.append(RadialProfile(r, u, N))
            labels.append(f"alpha:{al:g}")
        return cls(members, labels)

    @classmethod
    def bumps(cls, N, size=20, seed=0, n=TRIAL_NODES):
        """Centred and annular bumps with seeded centres and widths."""
        rng = np.random.default_rng(seed)
        members, labels = [], []
        r = cls._grid(TRIAL_R_MIN, n)
        for i in range(size):
            if i % 2 == 0:
                c, w = 0.0, float(rng.uniform(0.3, 0.95))
            else:
                w = float(rng.uniform(0.1, 0.4))
                c = float(rng.uniform(w, 1.0 - w))
            members.append(RadialProfile(r, bump(r, c, w), N))
            labels.append(f"bump:{c:.4f}:{w:.4f}")
        return cls(members, labels)

    @classmethod
    def desk(cls, N, s, n=TRIAL_NODES):
        """Default family: caps, near ground states and eight bumps."""
        return (cls.capped_ground_states(N, s, n=n) + cls.near_ground_states(N, s, n=n)
                + cls.bumps(N, 8, n=n))


def hardy_term(u: RadialProfile, s: float) -> float:
    return u.hardy_integral(s)


def rayleigh_quotient(u: RadialProfile, s: float) -> float:
    """Seminorm squared over the Hardy integral."""
    den = hardy_term(u, s)
    if not den > 0:
        raise DomainError("the Hardy integral of the trial function vanishes")
    return seminorm_sq(u, s) / den


def best_constant_estimate(fam: TrialFamily, s: float) -> float:
    """Smallest Rayleigh quotient over the family."""
    if len(fam) == 0:
        raise DomainError("empty trial family")
    return min(rayleigh_quotient(u, s) for _, u in fam)


def _potential_values(b, r, s):
    if isinstance(b, RadialProfile):
        return b(r)
    return float(b) * r ** (-2 * s)


@dataclass
class APReport:
    """Outcome of the supersolution form test."""

    supersolution: bool
    supersolution_defect: float
    margins: dict
    violators: List[str]
    passed: bool

    def to_dict(self):
        return asdict(self)


def ap_form_check(u_pos: RadialProfile, b: Union[float, RadialProfile], fam: TrialFamily,
                  s: float, tol: float = 1e-6, margin_tol: float = 1e-4) -> APReport:
    """Test the form inequality seminorm^2(phi) >= int b phi^2 on a family.

    ``b`` is a potential profile or the coefficient gamma of gamma |x|^{-2s}.
    The supersolution premise (-Delta)^s u_pos >= b u_pos is checked at
    nodes at least a decade inside the grid of ``u_pos``.  A trial fails
    when its margin is below ``-margin_tol`` times its seminorm.
    """
    if np.any(u_pos.values <= 0):
        raise DomainError("the supersolution must be positive on its grid")
    r = u_pos.nodes
    inner = (r >= 10 * r[0]) & (r <= r[-1] / 10)
    lu = frac_lap_radial(u_pos, s).values[inner]
    bu = _potential_values(b, r[inner], s) * u_pos.values[inner]
    defect = float(np.max((bu - lu) / np.abs(lu)))
    supersolution = defect <= tol
    margins, violators = {}, []
    for label, phi in fam:
        sn = seminorm_sq(phi, s)
        pot = radial_integral(phi, lambda rr, v: _potential_values(b, rr, s) * v * v)
        margins[label] = sn - pot
        if sn - pot < -margin_tol * sn:
            violators.append(label)
    return APReport(supersolution, defect, margins, violators, supersolution and not violators)


# -- remainder term ---------------------------------------------------------------

_GL8 = np.polynomial.legendre.leggauss(8)


def _panels(edges):
    x, w = _GL8
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * x + 0.5 * (b + a)).ravel(), (0.5 * (b - a) * w).ravel()


def gagliardo_seminorm_q(u: RadialProfile, tau: float, q: float, radius: float = 1.0,
                         refine: int = 1) -> float:
    """Double integral over B x B of |u(x) - u(y)|^q / |x - y|^{N + q tau}, B = {|x| < radius}.

    Radial reduction: |S| times the integral over (r, rho) of
    |u(r) - u(rho)|^q (r rho)^{N-1} K(r, rho), where K is the angular
    integral of |r e - rho w|^{-N-q tau}.  Integrated on the triangle
    rho = r(1 - x) and doubled.
    """
    N = u.N
    m = (N + q * tau) / 2.0
    nr = 40 * refine
    r_edges = np.unique(np.concatenate([
        np.geomspace(1e-4 * radius, 0.05 * radius, 10 * refine + 1),
        np.linspace(0.05 * radius, radius, nr + 1),
    ]))
    r, wr = _panels(r_edges)
    x, wx = _panels(np.concatenate([[0.0], np.geomspace(1e-10, 1.0, 30 * refine + 1)]))
    rho = r[:, None] * (1.0 - x[None, :])
    ur = u(r)
    diff = np.abs(ur[:, None] - u(rho.ravel()).reshape(rho.shape)) ** q
    A = r[:, None] ** 2 + rho**2
    B = 2.0 * r[:, None] * rho
    ker = sphere_kernel(N, A, B, m, (r[:, None] * x[None, :]) ** 2)
    integrand = diff * (r[:, None] * rho) ** (N - 1) * ker * r[:, None]  # d rho = r dx
    total = 2.0 * sphere_area(N) * float(np.sum(wr[:, None] * wx[None, :] * integrand))
    return total


def sobolev_norm_sq(u: RadialProfile, s: float, q: float, radius: float = 1.0,
                    refine: int = 1) -> float:
    """||u||^2 in W^{tau,q}(B) with tau = (1+2s)/2 - 1/q:
    (||u||_{L^q(B)}^q + Gagliardo double integral)^{2/q}."""
    tau = (1 + 2 * s) / 2.0 - 1.0 / q
    lq = radial_integral(u, lambda r, v: np.where(r < radius, np.abs(v) ** q, 0.0))
    g = gagliardo_seminorm_q(u, tau, q, radius, refine)
    return (lq + g) ** (2.0 / q)


def check_remainder_q(s: float, q: float):
    lo = max(1.0, 2.0 / (1.0 + 2.0 * s))
    if not lo < q < 2.0:
        raise DomainError(f"q must lie in ({lo}, 2), got {q}")


def hardy_deficit(u: RadialProfile, s: float) -> float:
    """E_0(u) = seminorm^2 - gamma_0 * Hardy integral."""
    return seminorm_sq(u, s) - gamma0(u.N, s) * hardy_term(u, s)


def remainder_ratio(u: RadialProfile, s: float, q: float, refine: int = 1) -> float:
    """E_0(u) / ||u||^2_{W^{tau,q}(B)} for u supported in the unit ball."""
    check_remainder_q(s, q)
    norm = sobolev_norm_sq(u, s, q, refine=refine)
    if not norm > 0:
        raise DomainError("the W^{tau,q} norm of the trial function vanishes")
    return hardy_deficit(u, s) / norm


@dataclass
class HardyReport:
    N: int
    s: float
    gamma0: float
    quotients: dict = field(default_factory=dict)
    infimum: Optional[float] = None
    q: Optional[float] = None
    tau: Optional[float] = None
    ratios: dict = field(default_factory=dict)
    excluded: List[str] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    @property
    def ratio_infimum(self) -> Optional[float]:
        vals = [v for k, v in self.ratios.items() if k not in self.excluded]
        return min(vals) if vals else None


def hardy_report(fam: TrialFamily, N: int, s: float, q: Optional[float] = None,
                 refine: int = 1, deficit_floor: float = 1e-10) -> HardyReport:
    """Quotients over a family, and remainder ratios when ``q`` is given."""
    rep = HardyReport(N=N, s=s, gamma0=gamma0(N, s))
    for label, u in fam:
        rep.quotients[label] = rayleigh_quotient(u, s)
    rep.infimum = min(rep.quotients.values())
    if q is not None:
        check_remainder_q(s, q)
        rep.q = q
        rep.tau = (1 + 2 * s) / 2.0 - 1.0 / q
        for label, u in fam:
            d = hardy_deficit(u, s)
            rep.ratios[label] = d / sobolev_norm_sq(u, s, q, refine=refine)
            if d < deficit_floor:
                rep.excluded.append(label)
    return rep
