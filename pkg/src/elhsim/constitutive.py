"""Constitutive ingredients of the momentum/director system.

Index conventions (fixed; the energy cancellation identities are sensitive
to them):

  grad(u)[i, j] = d_j u_i
  A[i, j] = (d_j u_i + d_i u_j) / 2        (symmetric)
  B[i, j] = (d_j u_i - d_i u_j) / 2        (skew)
  (B d)_i = B[k, i] d_k                    (first-index contraction)
  (A d)_i = A[i, j] d_j
  stress[j, i] is the (j, i) entry; its divergence is d_j stress[j, i].

All products are evaluated pointwise on a padded lattice.  pad="full"
pads enough for the quintic stress term to be alias-free; pad="rule23"
is the production 3/2 padding (exact for quadratics only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import LeslieCoefficients
from .spectral import (
    Grid,
    SpectralField,
    divergence,
    fft_forward_array,
    forward_truncated,
    gradient,
    padded_grid,
    resample_array,
    values_on_grid,
)

__all__ = [
    "KinematicTensors",
    "StressField",
    "PAD_FACTORS",
    "kinematics",
    "lagrange_multiplier",
    "kinematic_transport",
    "leslie_stress",
    "ericksen_stress_div",
]

# "rule23" is the classical two-thirds rule in padded form; "full" covers
# the degree-5 stress monomial exactly.
PAD_FACTORS = {"rule23": 1.5, "full": 3.0}


@dataclass
class KinematicTensors:
    """Rate-of-strain A, spin B and corotational director rate N."""

    grid: Grid
    A: np.ndarray  # (dim, dim) + shape, real samples
    B: np.ndarray
    N: np.ndarray  # (dim,) + shape


def _eval_grid(grid: Grid, pad: str) -> Grid:
    try:
        return padded_grid(grid, PAD_FACTORS[pad])
    except KeyError:
        raise ValueError(f"pad must be one of {sorted(PAD_FACTORS)}, got {pad!r}") from None


def _to_values(F: SpectralField, big: Grid) -> np.ndarray:
    return values_on_grid(F.coef, F.grid, big)


def _check_grids(*fields: SpectralField) -> Grid:
    g = fields[0].grid
    if any(f.grid != g for f in fields[1:]):
        raise ValueError("fields live on different grids")
    return g


def _spin_rate(u_vals_grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    swapped = np.swapaxes(u_vals_grad, 0, 1)
    return 0.5 * (u_vals_grad + swapped), 0.5 * (u_vals_grad - swapped)


def corotational_rate(B: np.ndarray, d: np.ndarray, w: np.ndarray) -> np.ndarray:
    """N = w + B d with the first-index contraction."""
    return w + np.einsum("ki...,k...->i...", B, d)


def kinematics(
    u: SpectralField, d: SpectralField, w: SpectralField, pad: str = "full"
) -> KinematicTensors:
    """Evaluate A, B, N as real samples on the padded lattice."""
    _check_grids(u, d, w)
    big = _eval_grid(u.grid, pad)
    Gu = _to_values(gradient(u), big)
    A, B = _spin_rate(Gu)
    N = corotational_rate(B, _to_values(d, big), _to_values(w, big))
    return KinematicTensors(big, A, B, N)


def multiplier_values(
    u_grad: np.ndarray,
    d: np.ndarray,
    d_grad: np.ndarray,
    w: np.ndarray,
    c: LeslieCoefficients,
    drop_stretch_term: bool = False,
) -> np.ndarray:
    """Constraint multiplier -rho1|w|^2 + |grad d|^2 - lambda2 d.A d, pointwise.

    drop_stretch_term removes the lambda2 part; that deliberately breaks the
    mechanism that keeps |d| = 1 and is used as an experimental control.
    """
    gamma = -c.rho1 * np.sum(w**2, axis=0) + np.sum(d_grad**2, axis=(0, 1))
    if c.lambda2 != 0.0 and not drop_stretch_term:
        A = 0.5 * (u_grad + np.swapaxes(u_grad, 0, 1))
        gamma = gamma - c.lambda2 * np.einsum("i...,ij...,j...->...", d, A, d)
    return gamma


def lagrange_multiplier(
    u: SpectralField,
    d: SpectralField,
    w: SpectralField,
    c: LeslieCoefficients,
    pad: str = "full",
) -> SpectralField:
    g = _check_grids(u, d, w)
    big = _eval_grid(g, pad)
    gamma = multiplier_values(
        _to_values(gradient(u), big),
        _to_values(d, big),
        _to_values(gradient(d), big),
        _to_values(w, big),
        c,
    )
    return SpectralField(g, forward_truncated(gamma, big, g))


def kinematic_transport(
    tensors: KinematicTensors, d: SpectralField, c: LeslieCoefficients
) -> SpectralField:
    """g = lambda1 N + lambda2 A d on the director's grid."""
    big = tensors.grid
    d_vals = _to_values(d, big)
    out = c.lambda1 * tensors.N + c.lambda2 * np.einsum("ij...,j...->i...", tensors.A, d_vals)
    return SpectralField(d.grid, forward_truncated(out, big, d.grid))


def stress_values(
    A: np.ndarray, B: np.ndarray, d: np.ndarray, w: np.ndarray, c: LeslieCoefficients
) -> np.ndarray:
    """Leslie stress entries S[j, i], pointwise on whatever lattice A lives on."""
    dim = d.shape[0]
    shape = d.shape[1:]
    S = np.zeros((dim, dim) + shape)
    N = corotational_rate(B, d, w)
    Ad = np.einsum("ij...,j...->i...", A, d)
    if c.mu1 != 0.0:
        phi = np.einsum("i...,i...->...", d, Ad)  # d.A d
        S += c.mu1 * phi * np.einsum("j...,i...->ji...", d, d)
    if c.mu2 != 0.0:
        S += c.mu2 * np.einsum("j...,i...->ji...", d, N)
    if c.mu3 != 0.0:
        S += c.mu3 * np.einsum("i...,j...->ji...", d, N)
    if c.mu5 != 0.0:
        S += c.mu5 * np.einsum("j...,i...->ji...", d, Ad)
    if c.mu6 != 0.0:
        S += c.mu6 * np.einsum("i...,j...->ji...", d, Ad)
    return S


def leslie_stress(
    u: SpectralField,
    d: SpectralField,
    w: SpectralField,
    c: LeslieCoefficients,
    pad: str = "full",
) -> SpectralField:
    """Stress tensor S[j, i] on the state's grid."""
    g = _check_grids(u, d, w)
    big = _eval_grid(g, pad)
    Gu = _to_values(gradient(u), big)
    A, B = _spin_rate(Gu)
    S = stress_values(A, B, _to_values(d, big), _to_values(w, big), c)
    return SpectralField(g, forward_truncated(S, big, g))


def elastic_tensor_values(d_grad: np.ndarray) -> np.ndarray:
    """(grad d (x) grad d)[i, j] = sum_k d_i d_k * d_j d_k, pointwise."""
    return np.einsum("ki...,kj...->ij...", d_grad, d_grad)


def ericksen_stress_div(d: SpectralField, pad: str = "full") -> SpectralField:
    """-div(grad d (x) grad d); the pressure part is handled by projection."""
    big = _eval_grid(d.grid, pad)
    E = elastic_tensor_values(_to_values(gradient(d), big))
    E_hat = SpectralField(big, fft_forward_array(E, big))
    div_big = divergence(E_hat, axis=1)  # tensor is symmetric; axis choice cosmetic
    return SpectralField(d.grid, -resample_array(div_big.coef, big, d.grid))


@dataclass
class StressField:
    """Leslie stress and elastic-stress divergence bundled for output."""

    stress: SpectralField
    elastic_div: SpectralField


def full_stress(
    u: SpectralField, d: SpectralField, w: SpectralField, c: LeslieCoefficients,
    pad: str = "full",
) -> StressField:
    return StressField(leslie_stress(u, d, w, c, pad), ericksen_stress_div(d, pad))
