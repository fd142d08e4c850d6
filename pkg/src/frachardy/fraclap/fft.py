"""Periodic-box backends: Fourier multipliers applied with the FFT."""
from __future__ import annotations

import numpy as np

from .profiles import GridField


def wavenumber_norm(field: GridField) -> np.ndarray:
    """|zeta| on the FFT lattice of ``field``."""
    k = 2 * np.pi * np.fft.fftfreq(field.n, d=field.L / field.n)
    grids = np.meshgrid(*([k] * field.N), indexing="ij")
    return np.sqrt(sum(g * g for g in grids))


def apply_symbol(field: GridField, symbol) -> GridField:
    """Multiply the discrete Fourier coefficients by ``symbol(|zeta|)``."""
    z = wavenumber_norm(field)
    coef = np.fft.fftn(field.values)
    out = np.fft.ifftn(coef * symbol(z)).real
    return GridField(field.L, out)


def frac_lap_fft(field: GridField, s: float) -> GridField:
    """(-Delta)^s with the symbol |zeta|^{2s}; the mean mode is sent to zero."""

    def symbol(z):
        out = np.zeros_like(z)
        nz = z > 0
        out[nz] = z[nz] ** (2 * s)
        return out

    return apply_symbol(field, symbol)
