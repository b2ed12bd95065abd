"""Shared helpers for building band-limited random fields in tests."""

import numpy as np

from elhsim.spectral import (
    RealField,
    SpectralField,
    fft_inverse_array,
    forward,
    inverse,
    leray_project,
    make_grid,
    mollify,
)


def rand_spectral(grid, comp=(), seed=0, band=None, scale=1.0):
    """Random real-valued field, optionally band-limited to |xi| <= band."""
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(comp + grid.shape) * scale
    F = forward(RealField(grid, vals))
    if band is not None:
        F = mollify(F, 1.0 / band)
    return F


def rand_divfree(grid, seed=0, band=None, scale=1.0):
    return leray_project(rand_spectral(grid, (grid.dim,), seed, band, scale))


def rand_director(grid, seed=0, band=None, amplitude=0.3):
    """Pointwise-normalized director, then lightly band-limited."""
    pert = inverse(rand_spectral(grid, (grid.dim,), seed, band, amplitude)).values
    vals = pert.copy()
    vals[-1] += 1.0
    vals /= np.sqrt(np.sum(vals**2, axis=0))
    F = forward(RealField(grid, vals))
    if band is not None:
        F = mollify(F, 1.0 / band)
    return F


def values_of(F):
    return fft_inverse_array(F.coef, F.grid)
