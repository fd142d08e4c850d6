"""Semilinear problems with a Hardy potential on the unit ball.

    B_s u - gamma |x|^{-2s} u = f   or   = u^p,   u = 0 outside the ball.

All solvers act on the trace unknowns of :class:`DtNOperator`, where the
discrete B_s is available as a dense matrix.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg as sla

from .constants import Params, gamma_alpha
from .errors import CoercivityError, ConvergenceError, DomainError, FitQualityError
from .extension import DtNOperator, HalfSpaceMesh, dtn_operator
from .extension.mesh import graded_r, graded_t
from .fraclap import RadialProfile, frac_lap_radial


@dataclass(frozen=True)
class PotentialSpec:
    """b(x) = gamma |x|^{-2s}, optionally truncated to min(b, cutoff)."""

    gamma: float
    s: float
    cutoff: Optional[float] = None

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError("the potential coefficient must be nonnegative")

    def values(self, op: DtNOperator) -> np.ndarray:
        return op.potential(self.gamma, self.cutoff)


@dataclass
class SolveOutcome:
    profile: RadialProfile
    residual: float
    path: str
    lam: Optional[float] = None
    iterations: int = 0
    increments: List[float] = field(default_factory=list)
    monotone_violations: int = 0
    exponent: Optional[float] = None
    energy: Optional[float] = None

    def to_dict(self):
        d = {k: v for k, v in asdict(self).items() if k != "profile"}
        d["r"] = self.profile.nodes.tolist()
        d["values"] = self.profile.values.tolist()
        return d


def _on_nodes(f, op) -> np.ndarray:
    if isinstance(f, RadialProfile) or callable(f):
        return np.asarray(f(op.r), dtype=float)
    arr = np.broadcast_to(np.asarray(f, dtype=float), (op.n,))
    return arr.copy()


def _weighted_norm(op, v):
    return math.sqrt(op.inner(v, v))


def fit_origin_exponent(r, v, lo, hi, min_r2=0.99):
    """Least-squares slope of log v against log r on [lo, hi]."""
    sel = (r >= lo) & (r <= hi) & (v > 0)
    if sel.sum() < 3:
        raise FitQualityError("fewer than three positive samples in the fit window")
    x, y = np.log(r[sel]), np.log(v[sel])
    slope, icpt = np.polyfit(x, y, 1)
    pred = slope * x + icpt
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    if r2 < min_r2:
        raise FitQualityError(f"log-log fit has R^2 = {r2:.4f} < {min_r2}")
    return float(slope), float(icpt), r2


# -- linear problems --------------------------------------------------------------

def direct_solve(b: PotentialSpec, f, op: Optional[DtNOperator] = None, N: int = 3) -> SolveOutcome:
    """Solve (B_h - b) v = f in one coupled linear solve."""
    op = op or dtn_operator(N, b.s)
    bv = b.values(op)
    fv = _on_nodes(f, op)
    v = op.solve(fv, -bv)
    res = _weighted_norm(op, op.apply(v) - bv * v - fv) / max(_weighted_norm(op, fv), 1e-300)
    return SolveOutcome(RadialProfile(op.r, v, op.mesh.N), res, "direct")


def monotone_solve(b: PotentialSpec, f, op: Optional[DtNOperator] = None, N: int = 3,
                   max_iter: int = 500, tol: float = 1e-12, growth: float = 1e8) -> SolveOutcome:
    """Monotone iteration B_h v_n = b v_{n-1} + f started from v_{-1} = 0.

    Every iterate is checked to dominate the previous one.  Iterates
    exceeding ``growth`` times the first one raise :class:`ConvergenceError`
    (the regime where the potential is too strong).
    """
    op = op or dtn_operator(N, b.s)
    fv = _on_nodes(f, op)
    if np.any(fv < 0):
        raise DomainError("the source must be nonnegative")
    bv = b.values(op)
    fac = op.factor(0.0)
    v = op.solve(fv, factor=fac)
    scale0 = max(float(np.max(np.abs(v))), 1e-300)
    increments, violations = [], 0
    for it in range(1, max_iter + 1):
        nxt = op.solve(bv * v + fv, factor=fac)
        step = nxt - v
        if np.any(step < -1e-12 * max(float(np.max(np.abs(nxt))), 1e-300)):
            violations += 1
        inc = float(np.max(np.abs(step)))
        increments.append(inc)
        v = nxt
        if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > growth * scale0:
            raise ConvergenceError("monotone iterates grow without bound; the potential is too strong")
        if inc <= tol * max(float(np.max(np.abs(v))), 1e-300):
            res = _weighted_norm(op, op.apply(v) - bv * v - fv) / max(_weighted_norm(op, fv), 1e-300)
            return SolveOutcome(RadialProfile(op.r, v, op.mesh.N), res, "monotone", iterations=it,
                                increments=increments, monotone_violations=violations)
    raise ConvergenceError(f"monotone iteration did not converge in {max_iter} steps")


# -- variational path -----------------------------------------------------------------

def _coercive_potential(op, gamma, cutoffs):
    """Largest truncation of gamma|x|^{-2s} in the ladder that keeps B_h - b definite."""
    best = None
    for k in cutoffs:
        bv = op.potential(gamma, k)
        try:
            fac = op.factor(-bv)
        except CoercivityError:
            break
        best = (k, bv, fac)
    if best is None:
        raise CoercivityError("no truncation of the potential gives a coercive form")
    return best


def variational_minimize(params: Params, op: Optional[DtNOperator] = None, max_iter: int = 2000,
                         tol: float = 1e-10, cutoffs: Optional[Sequence] = None) -> SolveOutcome:
    """Minimise E(u) = <(B_h - b) u, u> on {int (u^+)^{p+1} = 1} by projected
    Sobolev gradient descent.

    The gradient is taken in the inner product of the form itself, so a
    unit step is u -> (E/G) (B_h - b)^{-1} (u^+)^p; negative parts are
    clipped and the iterate is rescaled onto the constraint after each
    step, with backtracking on the scale-invariant quotient.  Returns the
    rescaled solution lam^{1/(p-1)} u of B_h U - b U = U^p.
    """
    N, s, p = params.N, params.s, params.p
    if not p < params.p_crit:
        raise DomainError(f"p = {p} is not below the critical exponent {params.p_crit}")
    op = op or dtn_operator(N, s)
    gamma = gamma_alpha(N, s, params.alpha)
    if cutoffs is None:
        cutoffs = [None] if params.alpha > 0 else [10.0**k for k in range(1, 9)] + [None]
    _, bv, fac = _coercive_potential(op, gamma, cutoffs)
    H = op.shifted(-bv)
    M = op.mass

    def G(u):
        return float(np.sum(M * np.maximum(u, 0.0) ** (p + 1)))

    def normalize(u):
        return u / G(u) ** (1.0 / (p + 1))

    def quotient(u):
        return float(u @ H @ u) / G(u) ** (2.0 / (p + 1))

    r = op.r
    e = params.ground_exponent
    u = normalize(np.maximum(r, 0.1) ** e * np.clip(1 - r * r, 0, None))
    J = quotient(u)
    lam = res = None
    for it in range(1, max_iter + 1):
        E = float(u @ H @ u)
        target = (E / G(u)) * sla.cho_solve(fac, M * np.maximum(u, 0.0) ** p)
        tau = 1.0
        while True:
            cand = np.maximum((1 - tau) * u + tau * target, 0.0)
            if G(cand) > 0:
                cand = normalize(cand)
                Jc = quotient(cand)
                if Jc <= J * (1 + 1e-14):
                    break
            tau *= 0.5
            if tau < 1e-8:
                raise ConvergenceError("line search failed in variational descent")
        u, J = cand, Jc
        lam = float(u @ H @ u)  # equals lam * G(u) with G(u) = 1
        resid = H @ u - lam * M * u**p
        res = math.sqrt(float(np.sum(resid**2 / M))) / math.sqrt(float(np.sum((lam * M * u**p) ** 2 / M)))
        if res < tol:
            break
    else:
        raise ConvergenceError(f"variational descent did not converge (residual {res:.2e})")
    if not lam > 0:
        raise ConvergenceError("nonpositive Lagrange multiplier")
    U = lam ** (1.0 / (p - 1)) * u
    resid = op.apply(U) - bv * U - U**p
    rel = _weighted_norm(op, resid) / _weighted_norm(op, U**p)
    return SolveOutcome(RadialProfile(r, U, N), rel, "variational", lam=lam, iterations=it,
                        energy=float(u @ H @ u))


# -- explicit supercritical solution ---------------------------------------------------

@dataclass
class ExplicitSolution:
    beta: float
    mu: float
    exponent: float
    residual: float
    profile: RadialProfile = field(repr=False)

    def to_dict(self):
        return {"beta": self.beta, "mu": self.mu, "exponent": self.exponent, "residual": self.residual}


def explicit_supercritical(params: Params, r_min=1e-3, r_max=1e3, n=512,
                           window=(0.1, 10.0)) -> ExplicitSolution:
    """w = mu r^{-2s/(p-1)} with mu^{p-1} = gamma_beta - gamma_alpha.

    Valid for (N+2s)/(N-2s) <= p < p_crit(alpha) and 0 < alpha < (N-2s)/2.
    The residual (-Delta)^s w - gamma_alpha r^{-2s} w - w^p is measured with
    the Mellin backend relative to (-Delta)^s w on ``window``.
    """
    N, s, p, al = params.N, params.s, params.p, params.alpha
    if not 0 < al < params.alpha_max:
        raise DomainError(f"alpha must lie in (0, {params.alpha_max}), got {al}")
    if not params.p_sobolev <= p < params.p_crit:
        raise DomainError(
            f"p must lie in [{params.p_sobolev}, {params.p_crit}) for the explicit solution, got {p}"
        )
    beta = (N - 2 * s) / 2.0 - 2 * s / (p - 1)
    gap = gamma_alpha(N, s, beta) - gamma_alpha(N, s, al)
    mu = gap ** (1.0 / (p - 1))
    ex = -2 * s / (p - 1)
    w = RadialProfile.power(ex, N, coef=mu, r_min=r_min, r_max=r_max, n=n)
    lw = frac_lap_radial(w, s)
    r = w.nodes
    sel = (r >= window[0]) & (r <= window[1])
    res = lw.values - gamma_alpha(N, s, al) * r ** (-2 * s) * w.values - w.values**p
    rel = float(np.max(np.abs(res[sel]) / np.abs(lw.values[sel])))
    return ExplicitSolution(beta, mu, ex, rel, w)


# -- nonexistence mechanism -----------------------------------------------------------

@dataclass
class NonexistenceReport:
    target_exponent: float
    exponents: dict
    fitted_exponent: float
    fit_r2: float
    relative_error: float
    truncation_monotone: bool
    eps: List[float]
    critical_integrals: List[float]
    critical_slopes: List[float]
    critical_slope_spread: float
    subcritical_integrals: List[float]
    subcritical_slopes: List[float]
    p_crit: float
    critical_levels: List[float] = field(default_factory=list)
    subcritical_levels: List[float] = field(default_factory=list)
    closure: str = "ground-state"

    def to_dict(self):
        return asdict(self)


def nonexistence_operator(N, s, r_min=1e-7, ratio=0.85):
    """DtN operator on a mesh graded to ``r_min`` in both r and t."""
    levels = int(math.ceil(math.log(20.0 / (0.1 * r_min)) / -math.log(ratio)))
    return _nonexistence_operator(int(N), float(s), float(r_min), float(ratio), levels)


@lru_cache(maxsize=4)
def _nonexistence_operator(N, s, r_min, ratio, levels):
    mesh = HalfSpaceMesh(graded_t(20.0, ratio, levels), graded_r(20.0, r_min, 1.0, 0.02, ratio), N, s)
    return DtNOperator(mesh, 1.0)


def _ball_integral(op, v, power, eps):
    sel = (op.r > eps) & (op.r < 1.0)
    return float(np.sum(op.mass[sel] * np.abs(v[sel]) ** power))


def ground_state_potential(op: DtNOperator, gamma, exponent, r_c=1e-2) -> np.ndarray:
    """Cell-averaged gamma |x|^{-2s}, replaced below ``r_c`` by (B_h th)/th
    with th = |x|^exponent (1 - |x|^2)_+.

    With plain cell averages the natural condition at the innermost node
    acts as a potential cap of size r_min^{-2s}, which at the critical
    coupling feeds a log branch r^exponent log(r/r_min) into every
    solution.  The consistent closure makes th an exact discrete null
    solution near the origin, so the form is a pure difference form in
    v/th there and the inner condition is natural for v/th instead.
    """
    r = op.r
    th = r**exponent * np.clip(1.0 - r * r, 0.0, None)
    b = op.potential(gamma)
    inner = r < r_c
    b[inner] = (op.apply(th) / th)[inner]
    return b


def nonexistence_diagnostic(params: Params, f=None, op: Optional[DtNOperator] = None,
                            cutoffs: Sequence = (1e2, 1e4, 1e6, 1e8, None),
                            eps: Sequence = (1e-2, 1e-3, 1e-4, 1e-5),
                            closure: str = "ground-state",
                            fit_window: Optional[Sequence[float]] = None) -> NonexistenceReport:
    """Truncated-potential solves (B_h - min(b, k)) v = min(f, 1) for growing k.

    Reports the near-origin exponent of v (fitted on ``fit_window``,
    default [10 r_min, 100 r_min])
    against (2s-N)/2 + alpha, the growth of int_{eps<|x|<1} v^{p+1} per
    decade of 1/eps at p = p_crit and p = p_crit - 1/2, and the decade
    means of v^{p-1} |x|^{2s} at the same two powers.

    The integral diverges logarithmically at p_crit only for alpha = 0.
    For alpha > 0 the obstruction is that v^{p-1} is as singular as the
    Hardy potential, which the decade means show (flat at p_crit, decaying
    below).  ``closure`` is "ground-state" (see
    :func:`ground_state_potential`) or "cell".
    """
    N, s, al = params.N, params.s, params.alpha
    if not al < params.alpha_max:
        raise DomainError("alpha must be below (N-2s)/2")
    if closure not in ("ground-state", "cell"):
        raise DomainError(f"unknown closure {closure!r}")
    op = op or nonexistence_operator(N, s)
    fv = np.ones(op.n) if f is None else _on_nodes(f, op)
    if np.any(fv < 0) or not np.any(fv > 0):
        raise DomainError("the source must be nonnegative and nontrivial")
    fv = np.minimum(fv, 1.0)
    gamma = gamma_alpha(N, s, al)
    r_min = op.r[0]
    target = params.ground_exponent
    lo, hi = (10 * r_min, 100 * r_min) if fit_window is None else fit_window
    if closure == "cell":
        b = op.potential(gamma)
    else:
        b = ground_state_potential(op, gamma, target)
    sols, exps = [], {}
    for k in cutoffs:
        bv = b if k is None else np.minimum(b, k)
        v = op.solve(fv, -bv)
        sols.append(v)
        try:
            exps[str(k)] = fit_origin_exponent(op.r, v, lo, hi, min_r2=0.0)[0]
        except FitQualityError:
            exps[str(k)] = float("nan")
    tol = 1e-10
    monotone = all(np.all(b2 >= a - tol * np.max(np.abs(b2))) for a, b2 in zip(sols, sols[1:]))
    v = sols[-1]
    slope, _, r2 = fit_origin_exponent(op.r, v, lo, hi)
    decades = np.diff(-np.log10(np.asarray(eps, dtype=float)))

    def ladder(p):
        ints = [_ball_integral(op, v, p + 1, e) for e in eps]
        return ints, (np.diff(ints) / decades).tolist()

    def levels(p):
        out = []
        for hi, lo in zip(eps[:-1], eps[1:]):
            sel = (op.r > lo) & (op.r <= hi)
            out.append(float(np.mean(v[sel] ** (p - 1) * op.r[sel] ** (2 * s))))
        return out

    pc = params.p_crit
    ci, cs = ladder(pc)
    si, ss = ladder(pc - 0.5)
    mean = float(np.mean(cs))
    spread = float(np.max(np.abs(np.asarray(cs) - mean)) / abs(mean))
    return NonexistenceReport(
        target_exponent=target,
        exponents=exps,
        fitted_exponent=slope,
        fit_r2=r2,
        relative_error=abs(slope - target) / abs(target),
        truncation_monotone=bool(monotone),
        eps=list(eps),
        critical_integrals=ci,
        critical_slopes=cs,
        critical_slope_spread=spread,
        subcritical_integrals=si,
        subcritical_slopes=ss,
        p_crit=pc,
        critical_levels=levels(pc),
        subcritical_levels=levels(pc - 0.5),
        closure=closure,
    )
