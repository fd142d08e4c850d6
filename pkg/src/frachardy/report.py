"""Check records and the verification suite shared by the CLI and tests.

A :class:`Report` serializes to ``{command, config, checks, artifacts}``;
nothing time-dependent goes into it, so identical inputs give identical
JSON.  Run metadata is written separately by the CLI.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .constants import gamma_alpha, kappa_s, kernel_constants, poisson_mass
from .extension import HalfSpaceMesh, dtn_operator, dtn_trace, extend_on_mesh, weighted_energy
from .fraclap import (GridField, RadialProfile, frac_lap_fft, frac_lap_radial, frac_lap_singular,
                      ground_state, seminorm_sq)
from .fraclap.mellin import gaussian_image


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


@dataclass
class Check:
    name: str
    value: Any
    target: Any
    tol: Optional[float]
    passed: bool

    def to_dict(self):
        return _clean({"name": self.name, "value": self.value, "target": self.target,
                       "tol": self.tol, "pass": self.passed})


def upper(name, value, bound) -> Check:
    """Pass when value <= bound."""
    return Check(name, value, 0.0, bound, bool(value <= bound))


def lower(name, value, bound) -> Check:
    """Pass when value >= bound (``target`` holds the bound, ``tol`` is unused)."""
    return Check(name, value, bound, None, bool(value >= bound))


def positive(name, value) -> Check:
    return Check(name, value, "> 0", None, bool(value > 0))


@dataclass
class Report:
    command: str
    config: Dict[str, Any]
    checks: List[Check] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def to_dict(self):
        out = {
            "command": self.command,
            "config": _clean(self.config),
            "checks": [c.to_dict() for c in self.checks],
            "artifacts": list(self.artifacts),
        }
        if self.data:
            out["data"] = _clean(self.data)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# -- oracles and checks --------------------------------------------------------------

gaussian_frac_lap = gaussian_image


def _gauss(r):
    return np.exp(-0.5 * r * r)


# box extent and points per axis for the FFT backend; periodic images of
# the r^{-N-2s} tail cost O(L^{-N-2s}), hence the wide box in 1-D
FFT_BOX = {1: (400.0, 8192), 2: (40.0, 256), 3: (40.0, 128)}


def backend_errors(N, s, hankel_nodes=256) -> Dict[str, float]:
    """Sup-normalized errors of each backend on the Gaussian.

    Points are FFT grid points (0 and 2, 4, 6 steps along the first axis);
    the Hankel route is compared away from the origin, where its value is
    an extrapolation.  ``origin`` is the worse of the Mellin and
    singular-integral values at 0 against the closed form.
    """
    L, n = FFT_BOX[N]
    h = L / n
    k = np.array([0, 2, 4, 6])
    pts = k * h
    exact = gaussian_frac_lap(N, s, pts)
    sup = exact[0]

    F = frac_lap_fft(GridField.from_radial(_gauss, N, L, n), s)
    fft = np.array([F.values[(n // 2 + kk,) + (n // 2,) * (N - 1)] for kk in k])

    sing = np.array([frac_lap_singular(lambda p: np.exp(-0.5 * np.sum(p * p, axis=-1)),
                                       np.r_[x, np.zeros(N - 1)], s)[0] for x in pts])

    u = RadialProfile.from_function(_gauss, N, r_min=1e-3, r_max=12.0, n=hankel_nodes)
    hank = frac_lap_radial(u, s, method="hankel")(pts[1:])
    mel = frac_lap_radial(RadialProfile.from_function(_gauss, N, r_min=1e-3, r_max=12.0, n=1024), s)
    mellin = np.array([mel.at(x) for x in pts])

    def err(v, ref):
        return float(np.max(np.abs(v - ref)) / sup)

    return {
        "fft": err(fft, exact),
        "singular": err(sing, exact),
        "hankel": err(hank, exact[1:]),
        "mellin": err(mellin, exact),
        "fft_vs_singular": err(fft, sing),
        "fft_vs_hankel": err(fft[1:], hank),
        "singular_vs_hankel": err(sing[1:], hank),
        "origin": max(abs(mellin[0] - sup), abs(sing[0] - sup)) / sup,
    }


def poisson_mass_error(N, s, heights=(1e-3, 1.0, 1e3)) -> float:
    """max over t of |p_Ns * int t^{2s} (|x|^2 + t^2)^{-(N+2s)/2} dx - 1|."""
    p_ns = kernel_constants(N, s)[1]
    return max(abs(p_ns * poisson_mass(N, s, t) - 1.0) for t in heights)


def groundstate_residual(N, s, alpha, window=(0.1, 10.0)) -> float:
    """max |(-Delta)^s th - gamma_alpha r^{-2s} th| / |gamma_alpha r^{-2s} th| on ``window``."""
    th = ground_state(N, s, alpha)
    lt = frac_lap_radial(th, s)
    r = th.nodes
    sel = (r >= window[0]) & (r <= window[1])
    ref = gamma_alpha(N, s, alpha) * r[sel] ** (-2 * s) * th.values[sel]
    return float(np.max(np.abs(lt.values[sel] - ref) / np.abs(ref)))


def extension_errors(N, s) -> Dict[str, float]:
    """DtN trace of the extended Gaussian against kappa_s (-Delta)^s, and the
    energy identity int t^{1-2s}|grad w|^2 = kappa_s [u]^2."""
    g = RadialProfile.from_function(_gauss, N, r_min=1e-3, r_max=12.0, n=1024)
    mesh = HalfSpaceMesh.default(N, s)
    w = extend_on_mesh(g, mesh)
    tr = dtn_trace(w)
    ref = kappa_s(s) * frac_lap_radial(g, s)(tr.r)
    sel = tr.r < 4.0
    dtn = float(np.max(np.abs(tr.values - ref)[sel]) / np.max(np.abs(ref)))
    E = weighted_energy(w)
    sn = kappa_s(s) * seminorm_sq(g, s)
    return {"dtn": dtn, "energy": abs(E.value / sn - 1.0), "energy_tail": E.tail / sn}


def maximum_principle_trials(N, s, trials=100, seed=0) -> Dict[str, float]:
    """Mixed problems with random nonnegative g and c >= 0; counts negative nodes.

    Data are sums of three bumps with seeded centres, widths and heights.
    """
    op = dtn_operator(N, s)
    rng = np.random.default_rng(seed)
    r = op.r
    violations, worst = 0, 0.0
    for _ in range(trials):
        g = np.zeros(op.n)
        for _ in range(3):
            c, wd, a = rng.uniform(0, 1), rng.uniform(0.05, 0.5), rng.uniform(0, 1)
            z = (r - c) / wd
            g += a * np.where(np.abs(z) < 1, np.exp(-1.0 / np.maximum(1 - z * z, 1e-300)), 0.0)
        cpot = rng.uniform(0, 5) * rng.uniform(0, 1, op.n)
        v = op.solve(g, cpot)
        w = op.extend(v).values
        low = float(w.min())
        scale = max(float(np.abs(w).max()), 1e-300)
        if low < -1e-12 * scale:
            violations += 1
        worst = min(worst, low / scale)
    return {"violations": violations, "worst": worst}
