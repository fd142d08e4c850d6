"""Graded tensor meshes on the truncated half-space and the weighted form.

The unknowns live at the nodes (t_k, r_j) with t_0 = 0 the trace level.
Each mesh edge carries the exact one-dimensional conductance of its
weight, so the degenerate factor t^{1-2s} and the radial Jacobian
r^{N-1} are integrated rather than sampled:

    t-edge:  2s / (t_{k+1}^{2s} - t_k^{2s})  *  |S| int_{cell j} r^{N-1} dr
    r-edge:  1 / int r^{1-N} dr              *  |S| int_{cell k} t^{1-2s} dt

The first is the reciprocal of the integral of t^{2s-1}, which makes
w = c0 + c1 t^{2s} exact along t and turns the first t-edge into the
flux variable t^{1-2s} dw/dt at t = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..constants import sphere_area
from ..errors import DomainError

DEFAULT_T = 20.0
DEFAULT_RATIO = 0.85
DEFAULT_LEVELS = 80


def graded_t(T=DEFAULT_T, ratio=DEFAULT_RATIO, levels=DEFAULT_LEVELS) -> np.ndarray:
    """0 followed by t_k = T ratio^(levels-k), k = 1..levels."""
    if not (T > 0 and 0 < ratio < 1 and levels >= 2):
        raise DomainError("need T > 0, 0 < ratio < 1 and at least two levels")
    k = np.arange(1, levels + 1)
    return np.concatenate([[0.0], T * ratio ** (levels - k)])


def graded_r(R=DEFAULT_T, r_min=1e-3, core=1.0, h_core=0.02, ratio=DEFAULT_RATIO) -> np.ndarray:
    """Radial nodes: geometric from ``r_min`` until the spacing reaches
    ``h_core``, uniform up to ``core``, then geometric again out to ``R``.

    ``R`` is the last node (a Dirichlet node).
    """
    if not 0 < r_min < core < R:
        raise DomainError(f"need 0 < r_min < core < R, got {r_min}, {core}, {R}")
    q = 1.0 / ratio
    nodes = [r_min]
    while nodes[-1] * (q - 1) < h_core and nodes[-1] < core:
        nodes.append(nodes[-1] * q)
    x0 = nodes[-1]
    if x0 < core:
        n = max(1, int(math.ceil((core - x0) / h_core)))
        nodes.extend(np.linspace(x0, core, n + 1)[1:])
    h = max(h_core, nodes[-1] - nodes[-2])
    while nodes[-1] < R:
        h *= q
        nodes.append(nodes[-1] + h)
    r = np.array(nodes)
    r[-1] = R
    if r[-1] - r[-2] < 0.5 * (r[-2] - r[-3]):
        r = np.delete(r, -2)
    return r


def _cell_edges(x, lower=0.0):
    mid = 0.5 * (x[1:] + x[:-1])
    return np.concatenate([[lower], mid, [x[-1]]])


@dataclass
class HalfSpaceMesh:
    """Tensor mesh {t_k} x {r_j} for order ``s`` in dimension ``N``.

    ``t[0] == 0`` is the trace.  ``r[0] > 0`` and the symmetry condition at
    r = 0 is natural.  The last t row and last r column are the truncation
    boundary.
    """

    t: np.ndarray
    r: np.ndarray
    N: int
    s: float

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        if self.t[0] != 0.0 or np.any(np.diff(self.t) <= 0):
            raise DomainError("t nodes must start at 0 and increase strictly")
        if self.r[0] <= 0 or np.any(np.diff(self.r) <= 0):
            raise DomainError("r nodes must be positive and increase strictly")
        if not 0 < self.s < 1:
            raise DomainError(f"order s must lie in (0, 1), got {self.s}")

    @classmethod
    def default(cls, N, s, R=DEFAULT_T, T=DEFAULT_T, ratio=DEFAULT_RATIO, levels=DEFAULT_LEVELS,
                r_min=1e-3, core=1.0, h_core=0.02):
        return cls(graded_t(T, ratio, levels), graded_r(R, r_min, core, h_core, ratio), N, s)

    @property
    def shape(self):
        return self.t.size, self.r.size

    @property
    def a(self) -> float:
        return 1.0 - 2.0 * self.s

    # -- one-dimensional weights ---------------------------------------------
    def r_weights(self) -> np.ndarray:
        """|S| times the integral of r^{N-1} over each dual radial cell."""
        e = _cell_edges(self.r)
        return sphere_area(self.N) * (e[1:] ** self.N - e[:-1] ** self.N) / self.N

    def t_weights(self) -> np.ndarray:
        """Integral of t^{1-2s} over each dual t cell."""
        e = _cell_edges(self.t)
        p = 2.0 - 2.0 * self.s
        return (e[1:] ** p - e[:-1] ** p) / p

    def t_conductance(self) -> np.ndarray:
        p = 2.0 * self.s
        return p / (self.t[1:] ** p - self.t[:-1] ** p)

    def r_conductance(self) -> np.ndarray:
        r0, r1 = self.r[:-1], self.r[1:]
        N = self.N
        if N == 1:
            integral = r1 - r0
        elif N == 2:
            integral = np.log(r1 / r0)
        else:
            integral = (r0 ** (2 - N) - r1 ** (2 - N)) / (N - 2)
        return sphere_area(N) / integral

    def trace_mass(self) -> np.ndarray:
        """Lumped L^2 mass of the trace nodes."""
        return self.r_weights()

    def potential_average(self, coef, power) -> np.ndarray:
        """coef * r^power averaged over each dual radial cell against r^{N-1}."""
        e = _cell_edges(self.r)
        q = self.N + power
        if q <= 0:
            raise DomainError("potential is not integrable at the origin")
        num = (e[1:] ** q - e[:-1] ** q) / q
        den = (e[1:] ** self.N - e[:-1] ** self.N) / self.N
        return coef * num / den

    # -- assembly ---------------------------------------------------------------
    def index(self, k, j):
        return k * self.r.size + j

    def stiffness(self) -> sp.csr_matrix:
        """Matrix of the weighted energy int t^{1-2s} |grad w|^2 over all nodes."""
        K, J = self.shape
        ct = self.t_conductance()[:, None] * self.r_weights()[None, :]  # (K-1, J)
        cr = self.t_weights()[:, None] * self.r_conductance()[None, :]  # (K, J-1)
        idx = np.arange(K * J).reshape(K, J)
        rows, cols, vals = [], [], []
        for a_idx, b_idx, c in (
            (idx[:-1, :], idx[1:, :], ct),
            (idx[:, :-1], idx[:, 1:], cr),
        ):
            a_idx, b_idx, c = a_idx.ravel(), b_idx.ravel(), c.ravel()
            rows += [a_idx, b_idx, a_idx, b_idx]
            cols += [b_idx, a_idx, a_idx, b_idx]
            vals += [-c, -c, c, c]
        A = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(K * J, K * J),
        )
        return A.tocsr()

    def energy(self, values) -> float:
        """Discrete weighted energy of nodal values (shape (K, J))."""
        w = np.asarray(values, dtype=float)
        dt = np.diff(w, axis=0)
        dr = np.diff(w, axis=1)
        et = np.sum(self.t_conductance()[:, None] * self.r_weights()[None, :] * dt * dt)
        er = np.sum(self.t_weights()[:, None] * self.r_conductance()[None, :] * dr * dr)
        return float(et + er)
