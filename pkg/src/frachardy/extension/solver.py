"""Discrete Dirichlet-to-Neumann operator and the mixed boundary problem.

Eliminating every interior node of the weighted Laplacian leaves a dense
symmetric matrix S on the trace nodes of the Neumann patch E (the other
trace nodes are held at 0).  The discrete operator is

    B_h = kappa_s^{-1} M^{-1} S

with M the lumped trace mass, so <B_h v, phi>_M = kappa_s^{-1} v.S.phi is the
weighted energy of the discrete harmonic extension.  Because the stiffness
matrix is an M-matrix, so are S and S + kappa_s M diag(c) for c >= 0,
which is the discrete maximum principle.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import splu

from ..constants import kappa_s
from ..errors import CoercivityError, DomainError
from ..fraclap.profiles import RadialProfile
from .mesh import DEFAULT_LEVELS, DEFAULT_RATIO, DEFAULT_T, HalfSpaceMesh


@dataclass
class HalfSpaceField:
    """Nodal values w(t_k, r_j) on a :class:`HalfSpaceMesh`."""

    mesh: HalfSpaceMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.mesh.shape:
            raise DomainError(f"values must have shape {self.mesh.shape}")

    @property
    def t_nodes(self):
        return self.mesh.t

    @property
    def x_nodes(self):
        return self.mesh.r

    @property
    def s(self):
        return self.mesh.s

    @property
    def trace(self) -> np.ndarray:
        return self.values[0]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "value"])
            for k, tk in enumerate(self.mesh.t):
                for j, rj in enumerate(self.mesh.r):
                    w.writerow([repr(float(tk)), repr(float(rj)), repr(float(self.values[k, j]))])

    @classmethod
    def from_csv(cls, path, N, s) -> "HalfSpaceField":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t = np.unique(data[:, 0])
        r = np.unique(data[:, 1])
        mesh = HalfSpaceMesh(t, r, N, s)
        return cls(mesh, data[:, 2].reshape(t.size, r.size))


class DtNOperator:
    """Discrete B_s on the patch E = {r < r_E} of a mesh."""

    def __init__(self, mesh: HalfSpaceMesh, r_E: float = 1.0):
        K, J = mesh.shape
        if not mesh.r[0] < r_E <= mesh.r[-1]:
            raise DomainError(f"patch radius {r_E} must lie inside the mesh")
        self.mesh = mesh
        self.r_E = r_E
        A = mesh.stiffness().tocsr()
        kk, jj = np.divmod(np.arange(K * J), J)
        free = (kk < K - 1) & (jj < J - 1)
        on_e = (kk == 0) & (mesh.r[jj] < r_E)
        interior = free & (kk > 0)
        self.e_index = np.flatnonzero(on_e)
        self.i_index = np.flatnonzero(interior)
        self.n = self.e_index.size
        A_ii = A[self.i_index][:, self.i_index].tocsc()
        A_ie = A[self.i_index][:, self.e_index]
        A_ee = A[self.e_index][:, self.e_index].toarray()
        self._lu = splu(A_ii)
        # interior response to unit trace values
        self._lift = self._lu.solve(A_ie.toarray())
        S = A_ee - A_ie.T @ self._lift
        self.S = 0.5 * (S + S.T)
        self.kappa = kappa_s(mesh.s)
        self.mass = mesh.trace_mass()[: self.n]

    @property
    def r(self) -> np.ndarray:
        return self.mesh.r[: self.n]

    def matrix(self) -> np.ndarray:
        """Dense B_h (not symmetric; self-adjoint in the M inner product)."""
        return self.S / (self.kappa * self.mass[:, None])

    def apply(self, v) -> np.ndarray:
        return self.S @ v / (self.kappa * self.mass)

    def form(self, v, phi) -> float:
        """<B_h v, phi> in the trace L^2 inner product."""
        return float(v @ self.S @ phi) / self.kappa

    def inner(self, v, phi) -> float:
        return float(np.sum(self.mass * v * phi))

    def potential(self, coef, cutoff=None) -> np.ndarray:
        """Cell averages of coef |x|^{-2s}, optionally capped at ``cutoff``."""
        b = self.mesh.potential_average(coef, -2.0 * self.mesh.s)[: self.n]
        return b if cutoff is None else np.minimum(b, cutoff)

    def shifted(self, c) -> np.ndarray:
        """Symmetric matrix of v -> kappa^{-1} S v + M c v (c may be negative)."""
        c = np.broadcast_to(np.asarray(c, dtype=float), (self.n,))
        return self.S / self.kappa + np.diag(self.mass * c)

    def factor(self, c=0.0):
        """Cholesky factor of :meth:`shifted`, raising :class:`CoercivityError`."""
        H = self.shifted(c)
        try:
            return sla.cho_factor(H, lower=True)
        except sla.LinAlgError as exc:
            raise CoercivityError("discrete form B_h + c is not positive definite") from exc

    def solve(self, g, c=0.0, factor=None) -> np.ndarray:
        """Trace v with B_h v + c v = g on E."""
        g = np.broadcast_to(np.asarray(g, dtype=float), (self.n,))
        if factor is None:
            factor = self.factor(c)
        return sla.cho_solve(factor, self.mass * g)

    def lowest_eigenvalue(self, c=0.0) -> float:
        """Smallest eigenvalue of B_h + c in the M inner product."""
        H = self.shifted(c)
        d = 1.0 / np.sqrt(self.mass)
        return float(sla.eigvalsh(d[:, None] * H * d[None, :], subset_by_index=[0, 0])[0])

    def extend(self, v) -> HalfSpaceField:
        """Discrete harmonic extension of trace values ``v`` on E."""
        K, J = self.mesh.shape
        w = np.zeros(K * J)
        w[self.e_index] = v
        w[self.i_index] = -(self._lift @ v)
        return HalfSpaceField(self.mesh, w.reshape(K, J))


@lru_cache(maxsize=8)
def _cached_operator(N, s, R, r_E, T, ratio, levels, r_min, h_core):
    mesh = HalfSpaceMesh.default(N, s, R=R, T=T, ratio=ratio, levels=levels,
                                 r_min=r_min, core=r_E, h_core=h_core)
    return DtNOperator(mesh, r_E)


def dtn_operator(N, s, R=DEFAULT_T, r_E=1.0, T=DEFAULT_T, ratio=DEFAULT_RATIO,
                 levels=DEFAULT_LEVELS, r_min=1e-3, h_core=0.02) -> DtNOperator:
    """Shared (cached) operator for the default ball-patch geometry."""
    return _cached_operator(int(N), float(s), float(R), float(r_E), float(T), float(ratio),
                            int(levels), float(r_min), float(h_core))


Data = Union[float, Callable[[np.ndarray], np.ndarray], RadialProfile]


def _sample(data, r):
    if callable(data):
        return np.asarray(data(r), dtype=float)
    return np.broadcast_to(np.asarray(data, dtype=float), r.shape).copy()


@dataclass
class MixedProblem:
    """div(t^{1-2s} grad w) = 0 with -t^{1-2s} w_t = kappa_s (g - c w) on E = {r < r_E},
    w = 0 on the rest of {t = 0} and on the truncation boundary."""

    N: int
    s: float
    g: Data
    c: Data = 0.0
    r_E: float = 1.0
    R: float = DEFAULT_T
    T: float = DEFAULT_T
    ratio: float = DEFAULT_RATIO
    levels: int = DEFAULT_LEVELS
    r_min: float = 1e-3
    h_core: float = 0.02

    def __post_init__(self):
        if self.r_E > self.R:
            raise DomainError("the Neumann patch must fit inside the truncated domain")

    def operator(self) -> DtNOperator:
        return dtn_operator(self.N, self.s, self.R, self.r_E, self.T, self.ratio, self.levels,
                            self.r_min, self.h_core)


@dataclass
class MixedSolution:
    field: HalfSpaceField
    trace: np.ndarray
    r: np.ndarray
    operator: DtNOperator = field(repr=False)

    def profile(self) -> RadialProfile:
        return RadialProfile(self.r, self.trace, self.field.mesh.N)


def solve_mixed(prob: MixedProblem) -> MixedSolution:
    """Solve the mixed problem; the trace v satisfies B_h v + c v = g on E."""
    op = prob.operator()
    g = _sample(prob.g, op.r)
    c = _sample(prob.c, op.r)
    if not np.all(np.isfinite(g)):
        raise DomainError("Neumann data must be finite on E")
    v = op.solve(g, c)
    return MixedSolution(op.extend(v), v, op.r, op)


def dirichlet_extend(mesh: HalfSpaceMesh, trace) -> HalfSpaceField:
    """Weighted-harmonic w with w(0, r_j) = trace_j on every trace node,
    zero on the truncation boundary."""
    K, J = mesh.shape
    trace = np.asarray(trace, dtype=float)
    if trace.shape != (J,):
        raise DomainError("trace must have one value per radial node")
    A = mesh.stiffness().tocsr()
    kk, jj = np.divmod(np.arange(K * J), J)
    interior = (kk > 0) & (kk < K - 1) & (jj < J - 1)
    fixed = kk == 0
    iidx, fidx = np.flatnonzero(interior), np.flatnonzero(fixed)
    known = trace.copy()
    known[-1] = 0.0
    rhs = -(A[iidx][:, fidx] @ known)
    w = np.zeros(K * J)
    w[fidx] = known
    w[iidx] = splu(A[iidx][:, iidx].tocsc()).solve(rhs)
    return HalfSpaceField(mesh, w.reshape(K, J))
