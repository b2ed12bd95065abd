"""Time evolution of the coupled velocity/director system.

The unknowns are (u, d, w): velocity, director and the material rate of
the director.  The second-order director equation is never discretized
directly; it is split as

  dt d = w - u.grad d
  dt w = -u.grad w + (lap d + gamma d + lambda1 (w + B d) + lambda2 A d) / rho1

and the momentum equation is advanced in Leray-projected form, so the
pressure never appears.  All nonlinear terms are evaluated pointwise on a
padded lattice (see constitutive.PAD_FACTORS); the linear viscous and wave
parts are exact Fourier multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .coefficients import LeslieCoefficients
from .constitutive import (
    PAD_FACTORS,
    elastic_tensor_values,
    multiplier_values,
    stress_values,
)
from .spectral import (
    Grid,
    SpectralField,
    fft_forward_array,
    fft_inverse_array,
    forward_truncated,
    padded_grid,
    values_on_grid,
)

__all__ = [
    "State",
    "SolverConfig",
    "BlowUpError",
    "CflError",
    "PicardError",
    "rhs",
    "step",
    "picard_step",
    "director_only_run",
    "make_initial_data",
    "cfl_limit",
    "renormalize_director",
    "pressure_field",
]

BLOWUP_THRESHOLD = 1e8


class BlowUpError(RuntimeError):
    """Raised when a field leaves the finite range; the run is over."""

    def __init__(self, t: float, message: str):
        super().__init__(f"blow-up detected at t={t:.6g}: {message}")
        self.t = t


class CflError(ValueError):
    def __init__(self, dt: float, limit: float):
        super().__init__(f"dt={dt:g} exceeds the stability limit {limit:g}")
        self.limit = limit


class PicardError(RuntimeError):
    def __init__(self, residuals: list[float], tol: float):
        super().__init__(
            f"fixed-point sweep did not reach {tol:g} after {len(residuals)} iterations; "
            f"residual history {residuals}"
        )
        self.residuals = residuals


@dataclass
class State:
    """Solver unknowns at one time instant, stored spectrally."""

    t: float
    u: SpectralField
    d: SpectralField
    w: SpectralField

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def copy(self) -> "State":
        return State(self.t, self.u.copy(), self.d.copy(), self.w.copy())


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    integrator: str = "if_rk4"  # "rk4" | "if_rk4"
    dealias: str = "rule23"     # "rule23" | "full"
    cfl_safety: float = 0.9
    picard_max_iters: int = 30
    picard_tol: float = 1e-10
    renormalize_every: int = 0  # 0 disables; exploratory option, always logged

    def __post_init__(self):
        # negative dt is allowed for local reversibility probes
        if self.dt == 0:
            raise ValueError("dt must be nonzero")
        if self.integrator not in ("rk4", "if_rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.dealias not in PAD_FACTORS:
            raise ValueError(f"unknown dealias rule {self.dealias!r}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")


class _Engine:
    """Batched padded-lattice evaluator for the nonlinear right-hand side."""

    def __init__(self, grid: Grid, c: LeslieCoefficients, dealias: str,
                 corrupt_multiplier: bool = False):
        self.grid = grid
        self.c = c
        self.big = padded_grid(grid, PAD_FACTORS[dealias])
        self.corrupt_multiplier = corrupt_multiplier
        d = grid.dim
        # slot layout in the batched inverse transform
        self._n_fields = 3 * d + 3 * d * d
        self._slices = {}
        off = 0
        for name, count in (
            ("u", d), ("d", d), ("w", d),
            ("Gu", d * d), ("Gd", d * d), ("Gw", d * d),
        ):
            self._slices[name] = slice(off, off + count)
            off += count

    def _stack_small(self, u: np.ndarray, dvec: np.ndarray, w: np.ndarray) -> np.ndarray:
        g = self.grid
        d = g.dim
        out = np.empty((self._n_fields,) + g.shape, dtype=complex)
        out[self._slices["u"]] = u
        out[self._slices["d"]] = dvec
        out[self._slices["w"]] = w
        for name, f in (("Gu", u), ("Gd", dvec), ("Gw", w)):
            block = out[self._slices[name]].reshape((d, d) + g.shape)
            for j in range(d):
                block[:, j] = (1j * g.k[j]) * f
        return out

    def real_values(self, u: np.ndarray, dvec: np.ndarray, w: np.ndarray) -> dict:
        """Inverse-transform the state and its gradients onto the padded lattice."""
        g, big, d = self.grid, self.big, self.grid.dim
        stack = self._stack_small(u, dvec, w)
        vals = values_on_grid(stack, g, big)
        out = {name: vals[sl] for name, sl in self._slices.items()}
        for name in ("Gu", "Gd", "Gw"):
            out[name] = out[name].reshape((d, d) + big.shape)
        return out

    def nonlinear(self, u: np.ndarray, dvec: np.ndarray, w: np.ndarray) -> dict:
        """Nonlinear right-hand-side parts, returned as small-lattice spectra.

        The linear viscous term, the w term of dt d, and the
        (lap d + lambda1 w)/rho1 part of dt w are left to the caller.
        The momentum advection rides inside the stress tensor as -u (x) u
        (its divergence is u.grad u for solenoidal u).
        """
        c = self.c
        g, big, dim = self.grid, self.big, self.grid.dim
        v = self.real_values(u, dvec, w)
        uv, dv, wv = v["u"], v["d"], v["w"]
        Gu, Gd, Gw = v["Gu"], v["Gd"], v["Gw"]
        A = 0.5 * (Gu + np.swapaxes(Gu, 0, 1))
        B = 0.5 * (Gu - np.swapaxes(Gu, 0, 1))

        adv_d = (Gd * uv[None, :]).sum(axis=1)  # sum_j u_j (grad d)[i, j]
        adv_w = (Gw * uv[None, :]).sum(axis=1)

        Ad = (A * dv[None, :]).sum(axis=1)       # A[i,j] d_j
        Bd = (B * dv[:, None]).sum(axis=0)       # B[k,i] d_k
        N = wv + Bd
        phi = (dv * Ad).sum(axis=0)              # d . A d

        gamma = -c.rho1 * (wv**2).sum(axis=0) + (Gd**2).sum(axis=(0, 1))
        if c.lambda2 != 0.0 and not self.corrupt_multiplier:
            gamma -= c.lambda2 * phi

        w_nl = -adv_w + (gamma * dv + c.lambda1 * Bd + c.lambda2 * Ad) / c.rho1

        # stress[j, i]: Leslie terms minus elastic tensor minus u (x) u;
        # outer products written as broadcasts: out[j, i] = a[j] * b[i]
        stress = -uv[:, None] * uv[None, :]
        stress -= elastic_tensor_values(Gd)
        if c.mu1 != 0.0:
            stress += (c.mu1 * phi) * (dv[:, None] * dv[None, :])
        if c.mu2 != 0.0:
            stress += c.mu2 * (dv[:, None] * N[None, :])
        if c.mu3 != 0.0:
            stress += c.mu3 * (dv[None, :] * N[:, None])
        if c.mu5 != 0.0:
            stress += c.mu5 * (dv[:, None] * Ad[None, :])
        if c.mu6 != 0.0:
            stress += c.mu6 * (dv[None, :] * Ad[:, None])

        batch = np.concatenate([
            (-adv_d).reshape((dim,) + big.shape),
            w_nl.reshape((dim,) + big.shape),
            stress.reshape((dim * dim,) + big.shape),
        ])
        spec = forward_truncated(batch, big, g)
        dd_nl = spec[:dim]
        dw_nl = spec[dim:2 * dim]
        S = spec[2 * dim:].reshape((dim, dim) + g.shape)
        # momentum tendency: div_j S[j, i], projected onto solenoidal fields
        du_nl = np.stack([
            sum((1j * g.k[j]) * S[j, i] for j in range(dim)) for i in range(dim)
        ])
        du_nl = _project(du_nl, g)
        return {"du": du_nl, "dd": dd_nl, "dw": dw_nl, "u_max": float(np.max(np.abs(uv)))}

    def finish(self, nl: dict, u, dvec, w, include_viscous=True):
        """Add the linear parts to the nonlinear spectra."""
        c, g = self.c, self.grid
        du = nl["du"]
        if include_viscous:
            du = du - 0.5 * c.mu4 * g.k2 * u
        dd = nl["dd"] + w
        dw = nl["dw"] + (-g.k2 * dvec + c.lambda1 * w) / c.rho1
        return du, dd, dw

    def full_rhs(self, u, dvec, w, include_viscous=True):
        return self.finish(self.nonlinear(u, dvec, w), u, dvec, w, include_viscous)


def _project(coef: np.ndarray, g: Grid) -> np.ndarray:
    kdotu = sum(g.k[j] * coef[j] for j in range(g.dim))
    scale = kdotu * g.inv_k2
    return coef - np.stack([g.k[j] * scale for j in range(g.dim)])


@lru_cache(maxsize=16)
def _engine(grid: Grid, c: LeslieCoefficients, dealias: str, corrupt: bool) -> _Engine:
    return _Engine(grid, c, dealias, corrupt)


def rhs(
    state: State,
    c: LeslieCoefficients,
    dealias: str = "rule23",
    corrupt_multiplier: bool = False,
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """Time derivative of (u, d, w); du is divergence-free by construction."""
    eng = _engine(state.grid, c, dealias, corrupt_multiplier)
    du, dd, dw = eng.full_rhs(state.u.coef, state.d.coef, state.w.coef)
    g = state.grid
    return (SpectralField(g, du), SpectralField(g, dd), SpectralField(g, dw))


def cfl_limit(
    grid: Grid, c: LeslieCoefficients, integrator: str, u_max: float = 0.0
) -> float:
    """Largest stable dt: transport + director-wave limit, and the viscous
    eigenvalue limit for the plain explicit integrator."""
    kmax = grid.kmax
    wave = (u_max + 1.0 / np.sqrt(c.rho1)) * kmax
    limit = 2.8 / wave
    if integrator == "rk4":
        visc = 0.5 * c.mu4 * kmax**2
        if visc > 0:
            limit = min(limit, 2.8 / visc)
    return limit


def _check_finite(t: float, arrays: Sequence[np.ndarray]) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowUpError(t, "non-finite spectral coefficient")


def check_magnitudes(state: State) -> None:
    """Real-space blow-up guard; called at sample times."""
    for name, f in (("u", state.u), ("d", state.d), ("w", state.w)):
        m = float(np.max(np.abs(fft_inverse_array(f.coef, state.grid))))
        if not np.isfinite(m) or m > BLOWUP_THRESHOLD:
            raise BlowUpError(state.t, f"max|{name}| = {m:g}")


@lru_cache(maxsize=16)
def _if_multipliers(grid: Grid, mu4: float, dt: float):
    lam = -0.5 * mu4 * grid.k2
    return np.exp(lam * dt / 2.0), np.exp(lam * dt)


def step(
    state: State,
    c: LeslieCoefficients,
    config: SolverConfig,
    corrupt_multiplier: bool = False,
) -> State:
    """One explicit step; classical RK4 or its integrating-factor variant.

    The stability check uses the velocity amplitude seen by the first
    stage, so no extra transform is spent on it.
    """
    g = state.grid
    h = config.dt
    eng = _engine(g, c, config.dealias, corrupt_multiplier)
    u0, d0, w0 = state.u.coef, state.d.coef, state.w.coef
    viscous = config.integrator == "rk4"

    def f(u, d, w):
        return eng.full_rhs(u, d, w, include_viscous=viscous)

    nl1 = eng.nonlinear(u0, d0, w0)
    limit = cfl_limit(g, c, config.integrator, nl1["u_max"])
    if abs(h) > config.cfl_safety * limit:
        raise CflError(h, config.cfl_safety * limit)
    k1 = eng.finish(nl1, u0, d0, w0, include_viscous=viscous)

    if config.integrator == "rk4":
        k2 = f(u0 + 0.5 * h * k1[0], d0 + 0.5 * h * k1[1], w0 + 0.5 * h * k1[2])
        k3 = f(u0 + 0.5 * h * k2[0], d0 + 0.5 * h * k2[1], w0 + 0.5 * h * k2[2])
        k4 = f(u0 + h * k3[0], d0 + h * k3[1], w0 + h * k3[2])
        u1 = u0 + (h / 6.0) * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
        d1 = d0 + (h / 6.0) * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        w1 = w0 + (h / 6.0) * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
    else:
        # integrating factor on the viscous diagonal of u
        eh, ef = _if_multipliers(g, c.mu4, h)
        k2 = f(eh * (u0 + 0.5 * h * k1[0]), d0 + 0.5 * h * k1[1], w0 + 0.5 * h * k1[2])
        k3 = f(eh * u0 + 0.5 * h * k2[0], d0 + 0.5 * h * k2[1], w0 + 0.5 * h * k2[2])
        k4 = f(ef * u0 + h * eh * k3[0], d0 + h * k3[1], w0 + h * k3[2])
        u1 = ef * u0 + (h / 6.0) * (ef * k1[0] + 2.0 * eh * (k2[0] + k3[0]) + k4[0])
        d1 = d0 + (h / 6.0) * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        w1 = w0 + (h / 6.0) * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])

    u1 = _project(u1, g)  # scrub roundoff divergence
    _check_finite(state.t + h, (u1, d1, w1))
    return State(
        state.t + h,
        SpectralField(g, u1), SpectralField(g, d1), SpectralField(g, w1),
    )


def picard_step(
    state: State,
    c: LeslieCoefficients,
    config: SolverConfig,
    return_info: bool = False,
):
    """One step by decoupled fixed-point sweeps on the trapezoidal update.

    Each sweep solves the momentum update with the viscous term implicit
    (the stress's dependence on the new velocity entering through the
    previous sweep) and then the director update with the linear wave part
    implicit, transport and multiplier terms lagged one sweep.  Converges
    to the trapezoidal step of the coupled system.
    """
    g = state.grid
    h = config.dt
    alpha = 0.5 * h
    eng = _engine(g, c, config.dealias, False)
    u0, d0, w0 = state.u.coef, state.d.coef, state.w.coef

    nl0 = eng.nonlinear(u0, d0, w0)
    limit = cfl_limit(g, c, "if_rk4", nl0["u_max"])
    if h > config.cfl_safety * limit:
        raise CflError(h, config.cfl_safety * limit)
    visc = 0.5 * c.mu4 * g.k2
    wave = g.k2 / c.rho1
    lam_w = c.lambda1 / c.rho1
    # constant (old-endpoint) parts of the trapezoidal right-hand sides
    base_u = u0 + alpha * (nl0["du"] - visc * u0)
    base_d = d0 + alpha * (w0 + nl0["dd"])
    base_w = w0 + alpha * ((-g.k2 * d0 + c.lambda1 * w0) / c.rho1 + nl0["dw"])

    det = (1.0 - alpha * lam_w) + alpha**2 * wave
    u_m, d_m, w_m = u0.copy(), d0.copy(), w0.copy()
    residuals: list[float] = []
    for _ in range(config.picard_max_iters):
        nlm = eng.nonlinear(u_m, d_m, w_m)
        u_next = (base_u + alpha * nlm["du"]) / (1.0 + alpha * visc)
        r_d = base_d + alpha * nlm["dd"]
        r_w = base_w + alpha * nlm["dw"]
        d_next = ((1.0 - alpha * lam_w) * r_d + alpha * r_w) / det
        w_next = (r_w - alpha * wave * r_d) / det
        diff = max(
            float(np.max(np.abs(fft_inverse_array(x_next - x_m, g))))
            for x_next, x_m in ((u_next, u_m), (d_next, d_m), (w_next, w_m))
        )
        residuals.append(diff)
        u_m, d_m, w_m = u_next, d_next, w_next
        if diff < config.picard_tol:
            break
    else:
        raise PicardError(residuals, config.picard_tol)

    u_m = _project(u_m, g)
    _check_finite(state.t + h, (u_m, d_m, w_m))
    new = State(state.t + h, SpectralField(g, u_m), SpectralField(g, d_m),
                SpectralField(g, w_m))
    if return_info:
        return new, residuals
    return new


def renormalize_director(state: State) -> State:
    """Pointwise re-normalization of d; exploratory option, not used by default."""
    g = state.grid
    vals = fft_inverse_array(state.d.coef, g)
    norm = np.sqrt(np.sum(vals**2, axis=0))
    vals = vals / norm
    return replace(state, d=SpectralField(g, fft_forward_array(vals, g)))


def pressure_field(state: State, c: LeslieCoefficients,
                   dealias: str = "full") -> SpectralField:
    """Recover the pressure from the unprojected momentum terms (output only)."""
    g = state.grid
    eng = _Engine(g, c, dealias)
    # rebuild the momentum right-hand side without projection
    v = eng.real_values(state.u.coef, state.d.coef, state.w.coef)
    Gu, Gd = v["Gu"], v["Gd"]
    A = 0.5 * (Gu + np.swapaxes(Gu, 0, 1))
    B = 0.5 * (Gu - np.swapaxes(Gu, 0, 1))
    adv_u = np.einsum("j...,ij...->i...", v["u"], Gu)
    stress = stress_values(A, B, v["d"], v["w"], c) - elastic_tensor_values(Gd)
    batch = np.concatenate([(-adv_u), stress.reshape((g.dim**2,) + eng.big.shape)])
    spec = forward_truncated(batch, eng.big, g)
    r = spec[:g.dim]
    S = spec[g.dim:].reshape((g.dim, g.dim) + g.shape)
    for i in range(g.dim):
        r[i] += sum((1j * g.k[j]) * S[j, i] for j in range(g.dim))
    # div of the momentum equation: lap p = div r, so p_hat = -(i xi . r_hat)/|xi|^2
    div_r = sum((1j * g.k[j]) * r[j] for j in range(g.dim))
    return SpectralField(g, -div_r * g.inv_k2)


def _raw_forward(vals: np.ndarray, grid: Grid) -> np.ndarray:
    """Store pointwise-constructed samples without the Nyquist scrub.

    The scrub would perturb the lattice samples and break the exact
    compatibility conditions; callers first damp the Nyquist content with
    filter/normalize passes, so what is kept here is spectral-tail sized.
    """
    return fft_forward_array(vals, grid, scrub_nyquist=False)


def _hermitian_symmetrize(coef: np.ndarray, grid: Grid) -> np.ndarray:
    rev = coef
    for ax in grid.spatial_axes:
        rev = np.roll(np.flip(rev, axis=ax), 1, axis=ax)
    return 0.5 * (coef + np.conj(rev))


def _random_band_spectrum(rng: np.random.Generator, ncomp: int, grid: Grid,
                          band: float) -> np.ndarray:
    """Smooth random spectrum supported in |xi| <= band, unit L2 norm."""
    shape = (ncomp,) + grid.shape
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    weight = np.exp(-grid.k2 / max(band, 1.0) ** 2)
    coef *= np.where((grid.k2 > 0) & (grid.k2 <= band**2), weight, 0.0)
    coef = _hermitian_symmetrize(coef, grid)
    norm = np.sqrt(grid.box_volume * np.sum(np.abs(coef) ** 2))
    if norm > 0:
        coef /= norm
    return coef


def director_from_perturbation(pert: np.ndarray, amplitude: float, grid: Grid) -> np.ndarray:
    """Pointwise normalization of (e_last + amplitude * perturbation).

    The samples are run through two filter/normalize passes so the stored
    spectrum has only sub-roundoff content above the band, then normalized
    once more so |d| = 1 holds exactly on the lattice.
    """
    vals = amplitude * pert
    vals[-1] += 1.0
    mags = np.sqrt(np.sum(vals**2, axis=0))
    if float(mags.min()) < 1e-8:
        raise ValueError(
            "director normalization degenerate (|e_last + amplitude*perturbation| "
            "vanishes somewhere); retry with a smaller amplitude"
        )
    vals /= mags
    for _ in range(2):
        vals = fft_inverse_array(fft_forward_array(vals, grid), grid)
        vals /= np.sqrt(np.sum(vals**2, axis=0))
    return vals


def make_initial_data(
    kind: str,
    amplitude: float,
    seed: int,
    grid: Grid,
    band: float = 3.0,
) -> State:
    """Deterministic initial state; same seed gives bit-identical output.

    The director is the pointwise normalization of (e_last + amplitude *
    perturbation) and w is projected onto the pointwise tangent space, so
    the unit-length and orthogonality conditions hold to roundoff on the
    lattice.  Velocity and w are scaled to L2 norm = amplitude.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    if kind not in ("random", "quiescent"):
        raise ValueError(f"unknown initial-data kind {kind!r}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    dim = grid.dim

    u_coef = _random_band_spectrum(rng, dim, grid, band)
    pert_coef = _random_band_spectrum(rng, dim, grid, band)
    w_coef = _random_band_spectrum(rng, dim, grid, band)

    if kind == "quiescent":
        u = SpectralField(grid, np.zeros_like(u_coef))
    else:
        proj = _project(u_coef, grid)
        norm = np.sqrt(grid.box_volume * np.sum(np.abs(proj) ** 2))
        if norm > 0:
            proj *= amplitude / norm
        u = SpectralField(grid, proj)

    d_vals = director_from_perturbation(fft_inverse_array(pert_coef, grid), amplitude, grid)

    w_vals = fft_inverse_array(w_coef, grid)
    if kind == "quiescent":
        w_vals = np.zeros_like(w_vals)
    else:
        w_vals = amplitude * w_vals
        w_vals -= np.einsum("i...,i...->...", w_vals, d_vals) * d_vals
        w_vals = fft_inverse_array(fft_forward_array(w_vals, grid), grid)
        w_vals -= np.einsum("i...,i...->...", w_vals, d_vals) * d_vals

    return State(
        0.0,
        u,
        SpectralField(grid, _raw_forward(d_vals, grid)),
        SpectralField(grid, _raw_forward(w_vals, grid)),
    )


def director_only_run(
    u_given: SpectralField | Callable[[float], SpectralField] | None,
    d0: SpectralField,
    w0: SpectralField,
    eps: float,
    c: LeslieCoefficients,
    config: SolverConfig,
    t_end: float,
    sample_every: int = 1,
) -> list[State]:
    """Evolve (d, w) with a prescribed velocity and a sharp low-pass filter.

    The filter of radius 1/eps is applied to every transported or
    constitutive product, and the initial data are filtered, so the pair
    stays inside the cutoff space (the filter is a projection there).  With
    1/eps at or above the lattice radius this is the plain full-resolution
    director dynamics.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    g = d0.grid
    mask = g.k2 <= (1.0 / eps) ** 2
    big = padded_grid(g, PAD_FACTORS[config.dealias])
    dim = g.dim

    if u_given is None:
        u_supplier = lambda t: None
    elif isinstance(u_given, SpectralField):
        u_supplier = lambda t: u_given
    else:
        u_supplier = u_given

    def _vals(coef: np.ndarray) -> np.ndarray:
        return values_on_grid(coef, g, big)

    def rhs_dw(d_hat: np.ndarray, w_hat: np.ndarray, t: float):
        u_f = u_supplier(t)
        dv = _vals(d_hat)
        wv = _vals(w_hat)
        Gd = np.empty((dim, dim) + g.shape, dtype=complex)
        for j in range(dim):
            Gd[:, j] = (1j * g.k[j]) * d_hat
        Gd_v = _vals(Gd.reshape((dim * dim,) + g.shape)).reshape((dim, dim) + big.shape)
        if u_f is not None:
            uv = _vals(u_f.coef)
            Gu = np.empty((dim, dim) + g.shape, dtype=complex)
            Gw = np.empty((dim, dim) + g.shape, dtype=complex)
            for j in range(dim):
                Gu[:, j] = (1j * g.k[j]) * u_f.coef
                Gw[:, j] = (1j * g.k[j]) * w_hat
            Gu_v = _vals(Gu.reshape((dim * dim,) + g.shape)).reshape((dim, dim) + big.shape)
            Gw_v = _vals(Gw.reshape((dim * dim,) + g.shape)).reshape((dim, dim) + big.shape)
            A = 0.5 * (Gu_v + np.swapaxes(Gu_v, 0, 1))
            B = 0.5 * (Gu_v - np.swapaxes(Gu_v, 0, 1))
            adv_d = np.einsum("j...,ij...->i...", uv, Gd_v)
            adv_w = np.einsum("j...,ij...->i...", uv, Gw_v)
            gamma = multiplier_values(Gu_v, dv, Gd_v, wv, c)
            Bd = np.einsum("ki...,k...->i...", B, dv)
            Ad = np.einsum("ij...,j...->i...", A, dv)
            prod = gamma * dv + c.lambda1 * Bd + c.lambda2 * Ad
            batch = np.concatenate([adv_d, adv_w, prod])
            spec = mask * forward_truncated(batch, big, g)
            dd = w_hat - spec[:dim]
            dw = (-g.k2 * d_hat + c.lambda1 * w_hat + spec[2 * dim:]) / c.rho1
            dw -= spec[dim:2 * dim]
        else:
            gamma = -c.rho1 * np.sum(wv**2, axis=0) + np.sum(Gd_v**2, axis=(0, 1))
            prod = gamma * dv
            spec = mask * forward_truncated(prod, big, g)
            dd = w_hat
            dw = (-g.k2 * d_hat + c.lambda1 * w_hat + spec) / c.rho1
        return dd, dw

    h = config.dt
    wave = (1.0 / np.sqrt(c.rho1)) * g.kmax
    if h > config.cfl_safety * 2.8 / wave:
        raise CflError(h, config.cfl_safety * 2.8 / wave)

    d_hat = np.where(mask, d0.coef, 0.0)
    w_hat = np.where(mask, w0.coef, 0.0)
    t = 0.0
    nsteps = int(round(t_end / h))

    def _u_field(tt: float) -> SpectralField:
        u_f = u_supplier(tt)
        if u_f is None:
            return SpectralField(g, np.zeros((dim,) + g.shape, dtype=complex))
        return u_f

    samples = [State(t, _u_field(t), SpectralField(g, d_hat.copy()),
                     SpectralField(g, w_hat.copy()))]
    for istep in range(nsteps):
        k1 = rhs_dw(d_hat, w_hat, t)
        k2 = rhs_dw(d_hat + 0.5 * h * k1[0], w_hat + 0.5 * h * k1[1], t + 0.5 * h)
        k3 = rhs_dw(d_hat + 0.5 * h * k2[0], w_hat + 0.5 * h * k2[1], t + 0.5 * h)
        k4 = rhs_dw(d_hat + h * k3[0], w_hat + h * k3[1], t + h)
        d_hat = d_hat + (h / 6.0) * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
        w_hat = w_hat + (h / 6.0) * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        t += h
        _check_finite(t, (d_hat, w_hat))
        if (istep + 1) % sample_every == 0 or istep == nsteps - 1:
            samples.append(State(t, _u_field(t), SpectralField(g, d_hat.copy()),
                                 SpectralField(g, w_hat.copy())))
    return samples
