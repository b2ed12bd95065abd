"""Periodic pseudospectral backbone: grid, transforms, calculus, filters.

Everything lives on the 2*pi-periodic torus in 2 or 3 dimensions.  Spectra
use the integer wavenumber lattice in fftfreq order with components in
[-n/2, n/2); the unpaired -n/2 (Nyquist) planes are kept identically zero
so real fields always carry a clean Hermitian pairing.

Transform normalization is unitary-on-average: the forward transform
divides by the total point count, so the zero mode equals the field mean
and function values are preserved when a spectrum is injected into a finer
lattice.  The squared L2 norm of a field over the box is then
(2*pi)^dim * sum |coef|^2.

Fields are thin wrappers around numpy arrays of shape
component_shape + spatial_shape; derivative axes are appended at the end
of the component shape, so grad(u)[i, j] = d_j u_i.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "RealField",
    "SpectralField",
    "forward",
    "inverse",
    "gradient",
    "divergence",
    "laplacian",
    "leray_project",
    "mollify",
    "dealiased_product",
    "hs_norm",
    "hs_norm_sq",
    "l2_inner",
    "resample",
    "padded_grid",
]


def fft_workers() -> int:
    """Transform worker count, capped by the ELH_THREADS environment variable."""
    try:
        return max(1, int(os.environ.get("ELH_THREADS", "1")))
    except ValueError:
        return 1


class Grid:
    """Uniform lattice with n points per axis on the 2*pi torus; n even."""

    def __init__(self, dim: int, n: int):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        if n < 4 or n % 2 != 0:
            raise ValueError(f"n must be an even integer >= 4, got {n}")
        self.dim = dim
        self.n = n
        self.shape = (n,) * dim
        self.npoints = n**dim
        self.box_volume = (2.0 * np.pi) ** dim
        k1 = np.fft.fftfreq(n, d=1.0 / n)  # integer wavenumbers, fftfreq order
        # Per-axis wavenumber arrays broadcastable over the trailing
        # spatial axes of any field array.
        self.k = [k1.reshape((-1,) + (1,) * (dim - 1 - ax)) for ax in range(dim)]
        self.k2 = sum(ki**2 for ki in self.k)  # |xi|^2 on the lattice
        with np.errstate(divide="ignore"):
            self.inv_k2 = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1.0), 0.0)
        self.kmax = np.sqrt(dim) * (n // 2 - 1)  # Nyquist excluded

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    def coords(self) -> list[np.ndarray]:
        """Sample coordinates per axis, broadcastable like self.k."""
        x1 = 2.0 * np.pi * np.arange(self.n) / self.n
        return [x1.reshape((-1,) + (1,) * (self.dim - 1 - ax)) for ax in range(self.dim)]

    def __eq__(self, other):
        return isinstance(other, Grid) and (self.dim, self.n) == (other.dim, other.n)

    def __hash__(self):
        return hash((self.dim, self.n))

    def __repr__(self):
        return f"Grid(dim={self.dim}, n={self.n})"


@lru_cache(maxsize=None)
def _grid(dim: int, n: int) -> Grid:
    return Grid(dim, n)


def make_grid(dim: int, n: int) -> Grid:
    """Cached grid factory; grids are immutable so sharing is safe."""
    return _grid(dim, n)


@dataclass
class RealField:
    """Real-space samples, shape component_shape + grid.shape."""

    grid: Grid
    values: np.ndarray

    @property
    def comp_shape(self) -> tuple[int, ...]:
        return self.values.shape[: self.values.ndim - self.grid.dim]

    def validate(self) -> None:
        if self.values.shape[-self.grid.dim:] != self.grid.shape:
            raise ValueError("sample array does not match grid shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite samples")


@dataclass
class SpectralField:
    """Fourier coefficients, shape component_shape + grid.shape."""

    grid: Grid
    coef: np.ndarray
    is_real: bool = True  # Hermitian-symmetric spectrum of a real field

    @property
    def comp_shape(self) -> tuple[int, ...]:
        return self.coef.shape[: self.coef.ndim - self.grid.dim]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coef.copy(), self.is_real)


def _zero_nyquist(coef: np.ndarray, grid: Grid) -> np.ndarray:
    for ax in grid.spatial_axes:
        idx = [slice(None)] * coef.ndim
        idx[ax] = grid.n // 2
        coef[tuple(idx)] = 0.0
    return coef


# transforms on very tall stacks thrash the cache; chunking the leading
# axis keeps each pass resident
_FFT_CHUNK = 24


def _chunked(transform, data: np.ndarray, grid: Grid) -> np.ndarray:
    """Apply a lattice transform in leading-axis chunks that stay cache
    resident; the spatial output shape may differ from the input's (the
    real-transform pair changes the last axis)."""
    nlead_dims = data.ndim - grid.dim
    lead = data.shape[:nlead_dims]
    nlead = int(np.prod(lead)) if lead else 1
    if nlead <= _FFT_CHUNK:
        return transform(data)
    flat = data.reshape((nlead,) + data.shape[nlead_dims:])
    first = transform(flat[:_FFT_CHUNK])
    out = np.empty((nlead,) + first.shape[1:], dtype=first.dtype)
    out[:_FFT_CHUNK] = first
    for start in range(_FFT_CHUNK, nlead, _FFT_CHUNK):
        sl = slice(start, start + _FFT_CHUNK)
        out[sl] = transform(flat[sl])
    return out.reshape(lead + first.shape[1:])


def fft_forward_array(values: np.ndarray, grid: Grid, scrub_nyquist: bool = True) -> np.ndarray:
    """Forward transform; by default the unpaired Nyquist planes are zeroed.

    scrub_nyquist=False is for storing pointwise-constructed fields whose
    lattice samples must be preserved exactly (unit directors, snapshot
    round trips); their tiny Nyquist residue is inert in the dynamics
    because every computed increment passes through the scrubbed path.
    """
    coef = _chunked(
        lambda block: sfft.fftn(block, axes=grid.spatial_axes, workers=fft_workers()),
        values, grid,
    )
    coef /= grid.npoints
    return _zero_nyquist(coef, grid) if scrub_nyquist else coef


def fft_inverse_array(coef: np.ndarray, grid: Grid) -> np.ndarray:
    return _chunked(
        lambda block: sfft.ifftn(block, axes=grid.spatial_axes,
                                 workers=fft_workers()).real * grid.npoints,
        coef, grid,
    )


def forward(f: RealField) -> SpectralField:
    return SpectralField(f.grid, fft_forward_array(f.values, f.grid), is_real=True)


def inverse(F: SpectralField) -> RealField:
    return RealField(F.grid, fft_inverse_array(F.coef, F.grid))


def gradient(F: SpectralField) -> SpectralField:
    """Append one derivative axis: out[..., j] = i*k_j * F."""
    g = F.grid
    out = np.empty(F.comp_shape + (g.dim,) + g.shape, dtype=complex)
    for j in range(g.dim):
        idx = (Ellipsis, j) + (slice(None),) * g.dim
        out[idx] = (1j * g.k[j]) * F.coef
    return SpectralField(g, out, F.is_real)


def divergence(F: SpectralField, axis: int = 0) -> SpectralField:
    """Contract i*k_j with the component axis `axis`."""
    g = F.grid
    nc = len(F.comp_shape)
    if nc == 0:
        raise ValueError("divergence needs at least one component axis")
    if F.comp_shape[axis] != g.dim:
        raise ValueError("contracted axis length must equal grid dim")
    moved = np.moveaxis(F.coef, axis, 0)
    out = sum((1j * g.k[j]) * moved[j] for j in range(g.dim))
    return SpectralField(g, out, F.is_real)


def laplacian(F: SpectralField) -> SpectralField:
    return SpectralField(F.grid, -F.grid.k2 * F.coef, F.is_real)


def leray_project(F: SpectralField) -> SpectralField:
    """Remove the gradient part of a vector field; the mean flow is kept."""
    g = F.grid
    if F.comp_shape != (g.dim,):
        raise ValueError("leray_project expects a vector field")
    out = F.coef.copy()
    kdotu = sum(g.k[j] * out[j] for j in range(g.dim))
    scale = kdotu * g.inv_k2  # zero at the mean mode, which is left alone
    for j in range(g.dim):
        out[j] -= g.k[j] * scale
    return SpectralField(g, out, F.is_real)


def mollify(F: SpectralField, eps: float) -> SpectralField:
    """Sharp Euclidean low-pass keeping |xi| <= 1/eps; idempotent bit-exactly."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    mask = F.grid.k2 <= (1.0 / eps) ** 2
    return SpectralField(F.grid, np.where(mask, F.coef, 0.0), F.is_real)


def cutoff_mask(grid: Grid, radius: float) -> np.ndarray:
    """Boolean |xi| <= radius mask on the lattice."""
    return grid.k2 <= radius**2


def hs_norm_sq(F: SpectralField, s: float, homogeneous: bool = False) -> float:
    """Squared Sobolev norm; weight (1+|xi|^2)^s, or |xi|^(2s) if homogeneous."""
    g = F.grid
    if homogeneous:
        with np.errstate(divide="ignore"):
            w = np.where(g.k2 > 0, g.k2**s, 0.0 if s > 0 else 1.0)
    else:
        w = (1.0 + g.k2) ** s
    mag = np.abs(F.coef) ** 2
    comp_axes = tuple(range(len(F.comp_shape)))
    if comp_axes:
        mag = mag.sum(axis=comp_axes)
    return float(g.box_volume * np.sum(w * mag))


def hs_norm(F: SpectralField, s: float, homogeneous: bool = False) -> float:
    if s < 0:
        raise ValueError("s must be nonnegative")
    return float(np.sqrt(hs_norm_sq(F, s, homogeneous)))


def l2_inner(F: SpectralField, G: SpectralField) -> float:
    """L2 inner product over the box via the Parseval identity."""
    if F.grid != G.grid or F.comp_shape != G.comp_shape:
        raise ValueError("mismatched fields")
    return float(F.grid.box_volume * np.sum(np.conj(F.coef) * G.coef).real)


@lru_cache(maxsize=None)
def _corner_slices(dim: int, n_from: int, n_to: int):
    """Source/destination corner blocks between fftfreq-ordered lattices.

    The positive-frequency block [0, h) and the negative block
    [n-h+1, n) are copied per axis (h = half of the smaller lattice); the
    unpaired Nyquist plane is dropped, which it is kept at zero anyway.
    """
    h = min(n_from, n_to) // 2
    lows = (slice(0, h), slice(0, h))
    highs = (slice(n_from - h + 1, n_from), slice(n_to - h + 1, n_to))
    pairs = []
    for corner in range(2**dim):
        src = [slice(None)] * dim
        dst = [slice(None)] * dim
        for ax in range(dim):
            s, d = highs if corner & (1 << ax) else lows
            src[ax], dst[ax] = s, d
        pairs.append((tuple(src), tuple(dst)))
    return pairs


def resample_array(coef: np.ndarray, grid_from: Grid, grid_to: Grid) -> np.ndarray:
    """Spectral injection/truncation between lattices; preserves values."""
    if grid_from.dim != grid_to.dim:
        raise ValueError("grids must share dim")
    dim = grid_from.dim
    lead = coef.shape[:-dim]
    out = np.zeros(lead + grid_to.shape, dtype=complex)
    head = (slice(None),) * len(lead)
    for src, dst in _corner_slices(dim, grid_from.n, grid_to.n):
        out[head + dst] = coef[head + src]
    return out


def resample(F: SpectralField, grid_to: Grid) -> SpectralField:
    return SpectralField(grid_to, resample_array(F.coef, F.grid, grid_to), F.is_real)


# ---------------------------------------------------------------------------
# half-spectrum (real-transform) pipeline
#
# The evaluation hot paths move data between lattices thousands of times;
# real-to-complex transforms with the redundant conjugate half dropped cut
# both the transform work and the copy volume roughly in half.  Only the
# final small-lattice spectra are expanded back to the full layout.


@lru_cache(maxsize=None)
def _half_corner_slices(dim: int, n_from: int, n_to: int):
    """Corner blocks as in _corner_slices, but the last axis keeps only
    the nonnegative frequencies [0, h)."""
    h = min(n_from, n_to) // 2
    lows = (slice(0, h), slice(0, h))
    highs = (slice(n_from - h + 1, n_from), slice(n_to - h + 1, n_to))
    pairs = []
    for corner in range(2 ** (dim - 1)):
        src = [slice(None)] * dim
        dst = [slice(None)] * dim
        for ax in range(dim - 1):
            s, d = highs if corner & (1 << ax) else lows
            src[ax], dst[ax] = s, d
        src[-1] = dst[-1] = slice(0, h)
        pairs.append((tuple(src), tuple(dst)))
    return pairs


def half_slice(coef: np.ndarray, grid: Grid) -> np.ndarray:
    """View of the nonnegative-frequency half of a full spectrum."""
    return coef[..., : grid.n // 2 + 1]


def half_resample(half: np.ndarray, grid_from: Grid, grid_to: Grid) -> np.ndarray:
    lead = half.shape[: half.ndim - grid_from.dim]
    out_shape = lead + grid_to.shape[:-1] + (grid_to.n // 2 + 1,)
    out = np.zeros(out_shape, dtype=complex)
    head = (slice(None),) * len(lead)
    for src, dst in _half_corner_slices(grid_from.dim, grid_from.n, grid_to.n):
        out[head + dst] = half[head + src]
    return out


def half_to_full(half: np.ndarray, grid: Grid) -> np.ndarray:
    """Expand a half spectrum of a real field to the full Hermitian layout."""
    n = grid.n
    lead = half.shape[: half.ndim - grid.dim]
    full = np.zeros(lead + grid.shape, dtype=complex)
    full[..., : n // 2 + 1] = half
    mir = np.conj(half[..., 1 : n // 2])[..., ::-1]
    for ax in range(-grid.dim, -1):
        mir = np.roll(np.flip(mir, axis=ax), 1, axis=ax)
    full[..., n // 2 + 1 :] = mir
    return full


def rfft_half(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Forward real transform to the half layout, normalized by the mean."""
    out = _chunked(
        lambda block: sfft.rfftn(block, axes=grid.spatial_axes, workers=fft_workers()),
        values, grid,
    )
    out /= grid.npoints
    return out


def irfft_values(half: np.ndarray, grid: Grid) -> np.ndarray:
    return _chunked(
        lambda block: sfft.irfftn(block, s=grid.shape, axes=grid.spatial_axes,
                                  workers=fft_workers()) * grid.npoints,
        half, grid,
    )


def values_on_grid(coef: np.ndarray, grid_from: Grid, grid_to: Grid) -> np.ndarray:
    """Real samples of a full small-lattice spectrum on another lattice."""
    return irfft_values(half_resample(half_slice(coef, grid_from), grid_from, grid_to),
                        grid_to)


def forward_truncated(values: np.ndarray, grid_from: Grid, grid_to: Grid) -> np.ndarray:
    """Full spectrum on grid_to of real samples living on grid_from."""
    half = half_resample(rfft_half(values, grid_from), grid_from, grid_to)
    return half_to_full(half, grid_to)


def padded_grid(grid: Grid, factor: float) -> Grid:
    """Grid enlarged by `factor` per axis, rounded up to an even size."""
    m = int(np.ceil(grid.n * factor))
    m += m % 2
    return make_grid(grid.dim, max(m, grid.n))


def product_pad_factor(degree: int) -> float:
    """Per-axis padding that makes a `degree`-fold product alias-free."""
    return (degree + 1) / 2.0


def _as_spectral(f: RealField | SpectralField) -> SpectralField:
    return forward(f) if isinstance(f, RealField) else f


def dealiased_product(
    fields: Sequence[RealField | SpectralField], degree: int | None = None
) -> SpectralField:
    """Alias-free pointwise product of band-limited fields.

    The factors are injected into a lattice padded by (degree+1)/2 per
    axis, multiplied in real space, transformed back and truncated to the
    original lattice.  Component shapes must broadcast against each other.
    """
    specs = [_as_spectral(f) for f in fields]
    if degree is None:
        degree = len(specs)
    if degree < 2 or len(specs) < 2:
        raise ValueError("need at least two factors")
    if degree != len(specs):
        raise ValueError(f"degree {degree} != number of factors {len(specs)}")
    g = specs[0].grid
    if any(s.grid != g for s in specs):
        raise ValueError("incompatible grids")
    big = padded_grid(g, product_pad_factor(degree))
    prod = None
    for s in specs:
        vals = fft_inverse_array(resample_array(s.coef, g, big), big)
        prod = vals if prod is None else prod * vals
    coef_big = fft_forward_array(prod, big)
    return SpectralField(g, resample_array(coef_big, big, g), is_real=True)
