"""Sampled radial, spectral and periodic-box functions."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import DomainError

DEFAULT_NODES = 512
DEFAULT_R_MIN = 1e-3
DEFAULT_R_MAX = 1e3

# below this |slope| the origin behaviour is treated as regular (u0 + u2 r^2)
_REGULAR_SLOPE = 1e-3


def log_grid(r_min=DEFAULT_R_MIN, r_max=DEFAULT_R_MAX, n=DEFAULT_NODES):
    if not 0 < r_min < r_max:
        raise DomainError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    return np.geomspace(r_min, r_max, n)


@dataclass
class LogGridFunction:
    """Samples of a function on (0, inf) with power-law tail models.

    Between the first and last node the function is a cubic spline in
    ``log x`` (of ``log|u|`` when the samples are strictly positive, which
    makes pure power laws exact).  Below the first node the local power
    law fitted to the first two nodes is used; above the last node the
    function is ``values[-1] * (x / x_max)**decay_exponent`` or zero when
    ``decay_exponent`` is None.
    """

    nodes: np.ndarray
    values: np.ndarray
    N: int
    decay_exponent: Optional[float] = None
    _spline: Optional[CubicSpline] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.shape != self.values.shape:
            raise DomainError("nodes and values must be 1-D arrays of equal length")
        if self.nodes.size < 4:
            raise DomainError("at least four nodes are required")
        if self.nodes[0] <= 0 or np.any(np.diff(self.nodes) <= 0):
            raise DomainError("nodes must be positive and strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("values must be finite at every node")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")

    # -- tail models -------------------------------------------------------
    @property
    def positive(self) -> bool:
        return bool(np.all(self.values > 0))

    def _origin_window(self):
        # nodes in [r0, 2 r0] (at least two): averages out sampling noise
        # that a two-node difference would turn into a spurious power
        k = max(2, int(np.searchsorted(self.nodes, 2.0 * self.nodes[0], side="right")))
        return self.nodes[:k], self.values[:k]

    @property
    def origin_exponent(self) -> float:
        """Log-log slope over the first nodes (0 for regular or sign-changing data)."""
        r, v = self._origin_window()
        if np.all(v == 0.0) or not (np.all(v > 0) or np.all(v < 0)):
            return 0.0
        slope = float(np.polyfit(np.log(r), np.log(np.abs(v)), 1)[0])
        return 0.0 if abs(slope) < _REGULAR_SLOPE else slope

    @property
    def origin_is_regular(self) -> bool:
        return self.origin_exponent == 0.0

    def _spline_eval(self, x):
        if self._spline is None:
            lx = np.log(self.nodes)
            if self.positive:
                self._spline = CubicSpline(lx, np.log(self.values))
            else:
                self._spline = CubicSpline(lx, self.values)
        y = self._spline(np.log(x))
        return np.exp(y) if self.positive else y

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        lo, hi = self.nodes[0], self.nodes[-1]
        mid = (x >= lo) & (x <= hi)
        if np.any(mid):
            out[mid] = self._spline_eval(x[mid])
        below = x < lo
        if np.any(below):
            out[below] = self._origin_model(x[below])
        above = x > hi
        if np.any(above) and self.decay_exponent is not None:
            out[above] = self.values[-1] * (x[above] / hi) ** self.decay_exponent
        return out

    def _origin_model(self, x):
        a0 = self.origin_exponent
        r, v = self._origin_window()
        if a0 == 0.0:
            # even Taylor model u0 + u2 r^2: u2 by least squares in r^2, u0
            # so that the model meets the first node exactly (a jump there
            # is seen by (-Delta)^s as a |r - r0|^{-2s} spike)
            u2 = np.polyfit(r * r, v, 1)[0]
            u0 = v[0] - u2 * r[0] ** 2
            return u0 + u2 * x * x
        # power law through the window, anchored at the first node
        return self.values[0] * (x / self.nodes[0]) ** a0

    def at(self, x: float) -> float:
        """Point value; ``x = 0`` uses the regular origin model."""
        return float(self(np.array([x]))[0])

    # -- algebra -----------------------------------------------------------
    def _like(self, values, decay_exponent=None):
        return type(self)(self.nodes.copy(), values, self.N, decay_exponent)

    def __add__(self, other):
        if not isinstance(other, LogGridFunction) or not np.array_equal(self.nodes, other.nodes):
            return NotImplemented
        exps = [e for e in (self.decay_exponent, other.decay_exponent) if e is not None]
        return self._like(self.values + other.values, max(exps) if exps else None)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return self._like(c * self.values, self.decay_exponent)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other

    # -- serialization -----------------------------------------------------
    _coord_name = "x"

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self._coord_name, "value"])
            for xv, v in zip(self.nodes, self.values):
                w.writerow([repr(float(xv)), repr(float(v))])

    @classmethod
    def from_csv(cls, path, N, decay_exponent=None):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], N, decay_exponent)


class RadialProfile(LogGridFunction):
    """A radial function u(|x|) on R^N sampled on a log-graded radius grid."""

    _coord_name = "r"

    @property
    def r(self) -> np.ndarray:
        return self.nodes

    @classmethod
    def from_function(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        N: int,
        r_min: float = DEFAULT_R_MIN,
        r_max: float = DEFAULT_R_MAX,
        n: int = DEFAULT_NODES,
        decay_exponent: Optional[float] = None,
    ) -> "RadialProfile":
        r = log_grid(r_min, r_max, n)
        return cls(r, np.asarray(func(r), dtype=float), N, decay_exponent)

    @classmethod
    def power(cls, exponent, N, coef=1.0, **grid) -> "RadialProfile":
        """coef * r**exponent with the matching tail model."""
        return cls.from_function(lambda r: coef * r**exponent, N, decay_exponent=exponent, **grid)

    def hardy_integral(self, s: float) -> float:
        """Integral over R^N of |x|^{-2s} u^2 (power-law tails included)."""
        from .quadrature import radial_integral

        return radial_integral(self, lambda r, u: u * u * r ** (-2 * s))

    def norm_sq(self) -> float:
        from .quadrature import radial_integral

        return radial_integral(self, lambda r, u: u * u)


class SpectralProfile(LogGridFunction):
    """Radial Fourier transform F(rho) sampled on frequency nodes."""

    _coord_name = "rho"

    @property
    def rho(self) -> np.ndarray:
        return self.nodes


@dataclass
class GridField:
    """Real samples on the periodic box [-L/2, L/2)^N, n points per axis."""

    L: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim not in (1, 2, 3):
            raise DomainError("GridField supports N <= 3")
        n = self.values.shape[0]
        if any(m != n for m in self.values.shape):
            raise DomainError("GridField must have the same number of points per axis")
        if n & (n - 1):
            raise DomainError(f"points per axis must be a power of two, got {n}")
        if not self.L > 0:
            raise DomainError("box extent must be positive")

    @property
    def N(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @staticmethod
    def axis(L, n):
        return -L / 2 + L * np.arange(n) / n

    @classmethod
    def from_function(cls, func, N, L, n) -> "GridField":
        ax = cls.axis(L, n)
        mesh = np.meshgrid(*([ax] * N), indexing="ij")
        pts = np.stack(mesh, axis=-1)
        return cls(L, func(pts))

    @classmethod
    def from_radial(cls, func, N, L, n) -> "GridField":
        return cls.from_function(lambda p: func(np.sqrt(np.sum(p * p, axis=-1))), N, L, n)

    def coords(self) -> np.ndarray:
        ax = self.axis(self.L, self.n)
        return np.stack(np.meshgrid(*([ax] * self.N), indexing="ij"), axis=-1)

    def index_of(self, point) -> tuple:
        """Grid index of a point that lies exactly on the lattice."""
        h = self.L / self.n
        idx = tuple(int(round((p + self.L / 2) / h)) % self.n for p in point)
        return idx

    def to_csv(self, path):
        pts = self.coords().reshape(-1, self.N)
        names = ["x", "y", "z"][: self.N]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names + ["value"])
            for p, v in zip(pts, self.values.reshape(-1)):
                w.writerow([repr(float(c)) for c in p] + [repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "GridField":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        N = len(header) - 1
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        n = round(data.shape[0] ** (1.0 / N))
        ax = np.unique(data[:, 0])
        L = (ax[1] - ax[0]) * n
        return cls(L, data[:, -1].reshape((n,) * N))
