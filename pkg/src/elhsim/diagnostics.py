"""Energy, dissipation and constraint diagnostics.

Norm conventions: Sobolev norms are realized spectrally with weight
(1 + |xi|^2)^s, homogeneous seminorms with |xi|^(2s); squared L2 integrals
over the box equal (2*pi)^dim times the lattice mean of the squared
samples.  Quadratic functionals of the state are evaluated by exact
spectral sums; functionals involving products with the director are
evaluated pointwise on a padded lattice, exact under pad="full" for every
term that appears here.

The dissipation rate of the squared-L2 energy balance splits into five
named terms:

  D_visc  = mu4/2 * |grad u|^2
  D_mu1   = mu1 * |d.A d|^2
  D_lam1  = -lambda1 * |w + B d|^2
  D_cross = -2 lambda2 * <w + B d, A d>
  D_mu56  = (mu5 + mu6) * |A d|^2

For strictly damping coefficients the same sum regroups into a manifestly
nonnegative completed square

  -lambda1 |w + B d + (lambda2/lambda1) A d|^2
      + (mu5 + mu6 + lambda2^2/lambda1) |A d|^2 + D_visc + D_mu1.

The lambda2^2/lambda1 coefficient (negative denominator) is the one that
makes the square exact and matches the admissibility inequality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import LeslieCoefficients, classify, equivalence_constants, eta0
from .constitutive import PAD_FACTORS
from .dynamics import State
from .spectral import (
    Grid,
    SpectralField,
    fft_forward_array,
    fft_inverse_array,
    hs_norm_sq,
    make_grid,
    padded_grid,
    resample_array,
    values_on_grid,
)

__all__ = [
    "DiagnosticsRecord",
    "basic_energy",
    "basic_dissipation",
    "hs_functionals",
    "modified_energy",
    "modified_functionals",
    "equivalence_bounds",
    "constraint_monitor",
    "energy_residual",
    "identity_suite",
    "IdentityResult",
    "diagnostics_record",
    "default_sobolev_index",
]


def default_sobolev_index(dim: int) -> int:
    """Smallest integer exceeding dim/2 + 1: 2 in 2-D, 3 in 3-D."""
    return 2 if dim == 2 else 3


# ---------------------------------------------------------------------------
# low-level helpers


def _values_on(coef: np.ndarray, g: Grid, big: Grid) -> np.ndarray:
    return values_on_grid(coef, g, big)


def _quad_sq(vals: np.ndarray, big: Grid, comp_axes: int) -> float:
    """Integral of |vals|^2 over the box by lattice quadrature."""
    sq = vals**2
    if comp_axes:
        sq = sq.sum(axis=tuple(range(comp_axes)))
    return float(big.box_volume * sq.mean())


def _quad_inner(a: np.ndarray, b: np.ndarray, big: Grid, comp_axes: int) -> float:
    prod = a * b
    if comp_axes:
        prod = prod.sum(axis=tuple(range(comp_axes)))
    return float(big.box_volume * prod.mean())


def _spin_hat(u_coef: np.ndarray, g: Grid) -> tuple[np.ndarray, np.ndarray]:
    dim = g.dim
    G = np.empty((dim, dim) + g.shape, dtype=complex)
    for j in range(dim):
        G[:, j] = (1j * g.k[j]) * u_coef
    GT = np.swapaxes(G, 0, 1)
    return 0.5 * (G + GT), 0.5 * (G - GT)


def _grad_stack_hat(coef: np.ndarray, g: Grid, orders: int) -> list[np.ndarray]:
    """[X, grad X, ..., grad^orders X] spectrally; derivative axes appended."""
    out = [coef]
    for _ in range(orders):
        prev = out[-1]
        nxt = np.empty(prev.shape[: prev.ndim - g.dim] + (g.dim,) + g.shape, dtype=complex)
        for j in range(g.dim):
            idx = (Ellipsis, j) + (slice(None),) * g.dim
            nxt[idx] = (1j * g.k[j]) * prev
        out.append(nxt)
    return out


class _ContractionTerms:
    """Real-space derivative stacks of A, B, w contracted with d.

    Provides, for each order k <= s:
      phi_k   = d . (grad^k A) d                (rank k)
      Ad_k    = (grad^k A) d                    (rank k+1)
      Bd_k    = (grad^k B) d  (first index)     (rank k+1)
      w_k     = grad^k w                        (rank k+1)

    Everything is inverse-transformed onto the padded lattice in a single
    batched call; one instance is shared by every functional evaluated on
    the same state and order.  In 2-D the strain/spin tensors are carried
    by their independent scalars, using that u is kept solenoidal (the
    strain is trace-free).
    """

    def __init__(self, state: State, s: int, pad: str):
        g = state.grid
        big = padded_grid(g, PAD_FACTORS[pad])
        self.big = big
        self.s = s
        self.dim = g.dim
        if g.dim == 2:
            # two independent strain scalars (trace-free for solenoidal u)
            # and one spin scalar carry the whole stack
            u1, u2 = state.u.coef
            a11 = (1j * g.k[0]) * u1
            a12 = 0.5 * ((1j * g.k[1]) * u1 + (1j * g.k[0]) * u2)
            b12 = 0.5 * ((1j * g.k[1]) * u1 - (1j * g.k[0]) * u2)
            stacks = (
                _grad_stack_hat(a11, g, s)
                + _grad_stack_hat(a12, g, s)
                + _grad_stack_hat(b12, g, s)
                + _grad_stack_hat(state.w.coef, g, s)
                + [state.d.coef]
            )
        else:
            A_hat, B_hat = _spin_hat(state.u.coef, g)
            stacks = (
                _grad_stack_hat(A_hat, g, s)
                + _grad_stack_hat(B_hat, g, s)
                + _grad_stack_hat(state.w.coef, g, s)
                + [state.d.coef]
            )
        shapes = [a.shape[: a.ndim - g.dim] for a in stacks]
        flat = np.concatenate([a.reshape((-1,) + g.shape) for a in stacks])
        vals = values_on_grid(flat, g, big)
        parts = []
        off = 0
        for shp in shapes:
            count = int(np.prod(shp)) if shp else 1
            parts.append(vals[off:off + count].reshape(shp + big.shape))
            off += count
        m = s + 1
        if g.dim == 2:
            self.a11 = parts[:m]
            self.a12 = parts[m: 2 * m]
            self.b12 = parts[2 * m: 3 * m]
            self.w = parts[3 * m: 4 * m]
        else:
            self.A = parts[:m]
            self.B = parts[m: 2 * m]
            self.w = parts[2 * m: 3 * m]
        self.d = parts[-1]
        self._cache: dict[tuple[str, int], np.ndarray] = {}

    def _memo(self, key: str, k: int, build) -> np.ndarray:
        try:
            return self._cache[(key, k)]
        except KeyError:
            val = self._cache[(key, k)] = build()
            return val

    def phi(self, k: int) -> np.ndarray:
        return self._memo("phi", k, lambda: np.einsum(
            "i...,i...->...", self.d, self.Ad(k)))

    def Ad(self, k: int) -> np.ndarray:
        return self._memo("Ad", k, self._build_Ad(k))

    def _build_Ad(self, k: int):
        if self.dim == 2:
            def build():
                d1, d2 = self.d
                return np.stack([
                    self.a11[k] * d1 + self.a12[k] * d2,
                    self.a12[k] * d1 - self.a11[k] * d2,
                ])
            return build
        return lambda: np.einsum("ij...,j...->i...", self.A[k], self.d)

    def Bd(self, k: int) -> np.ndarray:
        return self._memo("Bd", k, self._build_Bd(k))

    def _build_Bd(self, k: int):
        if self.dim == 2:
            def build():
                # first-index contraction with the single spin scalar b:
                # (B d) = (-b d_2, b d_1)
                d1, d2 = self.d
                return np.stack([-self.b12[k] * d2, self.b12[k] * d1])
            return build
        return lambda: np.einsum("ki...,k...->i...", self.B[k], self.d)

    def sq(self, vals: np.ndarray, rank: int) -> float:
        return _quad_sq(vals, self.big, rank)

    def inner(self, a: np.ndarray, b: np.ndarray, rank: int) -> float:
        return _quad_inner(a, b, self.big, rank)


# ---------------------------------------------------------------------------
# basic (squared-L2) energy balance


def basic_energy(state: State, c: LeslieCoefficients) -> float:
    """(|u|^2 + rho1 |w|^2 + |grad d|^2)_{L2} / 2, by exact spectral sums."""
    u2 = hs_norm_sq(state.u, 0.0)
    w2 = hs_norm_sq(state.w, 0.0)
    gd2 = hs_norm_sq(state.d, 1.0, homogeneous=True)
    return 0.5 * (u2 + c.rho1 * w2 + gd2)


def basic_dissipation(
    state: State, c: LeslieCoefficients, pad: str = "full",
    terms: "_ContractionTerms | None" = None,
) -> dict[str, float]:
    """The five dissipation terms, their total, and (for the strictly
    damping class) the completed-square regrouping with its agreement gap."""
    if terms is None:
        terms = _ContractionTerms(state, 0, pad)
    big = terms.big
    X = terms.w[0] + terms.Bd(0)  # w + B d
    Y = terms.Ad(0)
    phi = terms.phi(0)
    out = {
        "D_visc": 0.5 * c.mu4 * hs_norm_sq(state.u, 1.0, homogeneous=True),
        "D_mu1": c.mu1 * _quad_sq(phi, big, 0),
        "D_lam1": -c.lambda1 * _quad_sq(X, big, 1),
        "D_cross": -2.0 * c.lambda2 * _quad_inner(X, Y, big, 1),
        "D_mu56": (c.mu5 + c.mu6) * _quad_sq(Y, big, 1),
    }
    out["total"] = sum(out.values())
    if c.lambda1 < 0:
        square = X + (c.lambda2 / c.lambda1) * Y
        regrouped = (
            out["D_visc"]
            + out["D_mu1"]
            - c.lambda1 * _quad_sq(square, big, 1)
            + (c.mu5 + c.mu6 + c.lambda2**2 / c.lambda1) * _quad_sq(Y, big, 1)
        )
        out["total_regrouped"] = regrouped
        out["regroup_gap"] = abs(regrouped - out["total"])
    return out


def dissipation_scale(terms: dict[str, float]) -> float:
    """Magnitude scale for tolerance checks: sum of absolute term values."""
    return sum(abs(terms[k]) for k in ("D_visc", "D_mu1", "D_lam1", "D_cross", "D_mu56"))


# ---------------------------------------------------------------------------
# higher-order functionals


def hs_functionals(
    state: State,
    c: LeslieCoefficients,
    s: int,
    delta: float | None = None,
    pad: str = "full",
    terms: "_ContractionTerms | None" = None,
) -> tuple[float, float]:
    """Sobolev-level energy and dissipation functionals (E, D).

    E = |u|^2_{Hs} + rho1 |w|^2_{Hs} + |grad d|^2_{Hs}.  D depends on the
    damping class; the variant is selected by classification and uses the
    full rank-k derivative arrays with Frobenius contraction.
    """
    if s < 0 or int(s) != s:
        raise ValueError("s must be a nonnegative integer")
    cls = classify(c, delta)
    if cls.kind == "invalid":
        raise ValueError(f"coefficients are not dissipative: {cls.reason}")
    E = (
        hs_norm_sq(state.u, s)
        + c.rho1 * hs_norm_sq(state.w, s)
        + _grad_d_hs_sq(state, s)
    )
    if terms is None:
        terms = _ContractionTerms(state, s, pad)
    mu1_sum = sum(terms.sq(terms.phi(k), k) for k in range(s + 1))
    Ad_sq = [terms.sq(terms.Ad(k), k + 1) for k in range(s + 1)]
    visc_hs = _grad_u_hs_sq(state, s)

    if cls.kind == "strict_damping":
        ratio = c.lambda2 / c.lambda1
        sq_sum = 0.0
        for k in range(s + 1):
            Xk = terms.w[k] + terms.Bd(k) + ratio * terms.Ad(k)
            sq_sum += terms.sq(Xk, k + 1)
        D = (
            0.5 * c.mu4 * visc_hs
            + c.mu1 * mu1_sum
            - c.lambda1 * sq_sum
            + (c.mu5 + c.mu6 + c.lambda2**2 / c.lambda1) * sum(Ad_sq)
        )
    else:
        delta = cls.delta
        coef = 2.0 * abs(c.lambda2) / ((1.0 - delta) * c.mu4)
        square_sum = 0.0
        for k in range(s + 1):
            grad_norm = np.sqrt(hs_norm_sq(state.u, k + 1, homogeneous=True))
            square_sum += (grad_norm - coef * np.sqrt(Ad_sq[k])) ** 2
        D = (
            0.25 * delta * c.mu4 * visc_hs
            + c.mu1 * mu1_sum
            + (c.mu5 + c.mu6 - 2.0 * c.lambda2**2 / ((1.0 - delta) * c.mu4)) * sum(Ad_sq)
            + 0.5 * (1.0 - delta) * c.mu4 * square_sum
        )
    return E, D


def _grad_d_hs_sq(state: State, s: float) -> float:
    g = state.grid
    w = (1.0 + g.k2) ** s * g.k2
    mag = (np.abs(state.d.coef) ** 2).sum(axis=0)
    return float(g.box_volume * np.sum(w * mag))


def _grad_u_hs_sq(state: State, s: float) -> float:
    g = state.grid
    w = (1.0 + g.k2) ** s * g.k2
    mag = (np.abs(state.u.coef) ** 2).sum(axis=0)
    return float(g.box_volume * np.sum(w * mag))


def modified_energy(
    state: State,
    c: LeslieCoefficients,
    s: int,
    eta: float,
    estimate_constant: float = 1.0,
) -> float:
    """The weighted energy alone; a pure spectral sum, cheap per step."""
    if classify(c).kind != "strict_damping":
        raise ValueError("modified functionals need the strict-damping class")
    cap = eta0(c, estimate_constant)
    if not 0.0 < eta <= cap:
        raise ValueError(f"eta must lie in (0, {cap:g}], got {eta:g}")
    g = state.grid
    return (
        hs_norm_sq(state.u, s)
        + (-eta * c.lambda1 + 1.0 - eta * c.rho1) * _grad_d_hs_sq(state, s - 1)
        + hs_norm_sq(state.d, s + 1, homogeneous=True)
        + c.rho1 * (1.0 - eta) * hs_norm_sq(state.w, s)
        + c.rho1 * eta * hs_norm_sq(state.w, 0.0)
        + eta * c.rho1 * _sum_field_sq(state.w.coef, state.d.coef, g, s)
    )


def modified_functionals(
    state: State,
    c: LeslieCoefficients,
    s: int,
    eta: float,
    estimate_constant: float = 1.0,
    pad: str = "full",
    terms: "_ContractionTerms | None" = None,
) -> tuple[float, float]:
    """Weighted energy/dissipation pair whose decay drives the small-data
    global regime.  Requires strictly damping coefficients and
    0 < eta <= eta0(c, estimate_constant)."""
    E = modified_energy(state, c, s, eta, estimate_constant)
    if terms is None:
        terms = _ContractionTerms(state, s, pad)
    ratio = c.lambda2 / c.lambda1
    sq_sum = 0.0
    tail_sum = 0.0
    for k in range(s + 1):
        bd_ad = terms.Bd(k) + ratio * terms.Ad(k)
        Xk = terms.w[k] + bd_ad
        sq_sum += terms.sq(Xk, k + 1)
        if k >= 1:
            tail_sum += terms.sq(bd_ad, k + 1)
    mu1_sum = sum(terms.sq(terms.phi(k), k) for k in range(s + 1))
    ad_sum = sum(terms.sq(terms.Ad(k), k + 1) for k in range(s + 1))
    D = (
        0.25 * c.mu4 * _grad_u_hs_sq(state, s)
        + 0.25 * eta * _grad_d_hs_sq(state, s)
        - 0.5 * c.lambda1 * sq_sum
        + c.mu1 * mu1_sum
        + (c.mu5 + c.mu6 + c.lambda2**2 / c.lambda1) * ad_sum
        + 3.0 * eta * c.rho1 * tail_sum
    )
    return E, D


def _sum_field_sq(w_coef: np.ndarray, d_coef: np.ndarray, g: Grid, s: int) -> float:
    """|w + d|^2 in the homogeneous s-seminorm."""
    with np.errstate(divide="ignore"):
        wgt = np.where(g.k2 > 0, g.k2**s, 1.0 if s == 0 else 0.0)
    mag = (np.abs(w_coef + d_coef) ** 2).sum(axis=0)
    return float(g.box_volume * np.sum(wgt * mag))


def equivalence_bounds(
    state: State,
    c: LeslieCoefficients,
    s: int,
    eta: float,
    estimate_constant: float = 1.0,
) -> dict[str, float]:
    """Sandwich of the modified energy between multiples of the plain one.

    Returns the reference norm, the two bounds and the modified energy.
    The bound constants are loose; balanced states satisfy them while
    director-dominated single-low-mode states can undercut the lower one.
    """
    cap = eta0(c, estimate_constant)
    lower_c, upper_c = equivalence_constants(c, cap)
    ref = (
        hs_norm_sq(state.u, s)
        + c.rho1 * hs_norm_sq(state.w, s)
        + _grad_d_hs_sq(state, s)
    )
    E, _ = modified_functionals(state, c, s, eta, estimate_constant)
    return {
        "reference": ref,
        "lower": lower_c * ref,
        "upper": upper_c * ref,
        "value": E,
        "ok": lower_c * ref <= E <= upper_c * ref,
    }


# ---------------------------------------------------------------------------
# constraint monitor


def constraint_monitor(d: SpectralField, w: SpectralField) -> tuple[float, float, float]:
    """(max|h|, |h|_L2, max|d.w|) with h = |d|^2 - 1, on the lattice samples."""
    g = d.grid
    dv = fft_inverse_array(d.coef, g)
    wv = fft_inverse_array(w.coef, g)
    h = np.einsum("i...,i...->...", dv, dv) - 1.0
    tang = np.einsum("i...,i...->...", dv, wv)
    h_l2 = float(np.sqrt(g.box_volume * np.mean(h**2)))
    return float(np.max(np.abs(h))), h_l2, float(np.max(np.abs(tang)))


# ---------------------------------------------------------------------------
# energy-law residual


def energy_residual(
    t: np.ndarray, energy: np.ndarray, dissipation: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-interval residual of dE/dt + D = 0 from uniform samples.

    The interval rate (E_{i+1} - E_i)/dt is paired with the trapezoidal
    dissipation average plus its end-slope (Euler-Maclaurin) correction,
    making the estimator fourth-order accurate so it tracks the
    integrator's error rather than its own truncation.  Falls back to the
    plain trapezoid when fewer than seven samples are available.

    Returns (absolute residuals, residuals relative to max dissipation).
    """
    t = np.asarray(t, dtype=float)
    E = np.asarray(energy, dtype=float)
    D = np.asarray(dissipation, dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-8, atol=1e-14):
        raise ValueError("samples must be uniformly spaced")
    h = float(dt[0])
    res = (E[1:] - E[:-1]) / h + 0.5 * (D[:-1] + D[1:])
    if t.size >= 7:
        dD = _derivative_samples(D, h)
        res = res - (h / 12.0) * (dD[1:] - dD[:-1])
    rel = np.abs(res) / (np.max(np.abs(D)) + 1e-30)
    return res, rel


def _derivative_samples(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative of uniform samples."""
    n = f.size
    d = np.empty(n)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    return d


# ---------------------------------------------------------------------------
# integral cancellation identities


@dataclass
class IdentityResult:
    name: str
    lhs: float
    rhs: float

    @property
    def diff(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def scale(self) -> float:
        return abs(self.lhs) + abs(self.rhs) + 1e-30

    def passed(self, tol: float = 1e-10) -> bool:
        return self.diff <= tol * self.scale


def _band_of(coef: np.ndarray, g: Grid) -> int:
    nz = np.abs(coef) > 0
    comp_axes = tuple(range(coef.ndim - g.dim))
    if comp_axes:
        nz = nz.any(axis=comp_axes)
    if not nz.any():
        return 0
    band = 0
    for ax in range(g.dim):
        other = tuple(a for a in range(g.dim) if a != ax)
        line = nz.any(axis=other) if other else nz
        kvals = np.abs(np.fft.fftfreq(g.n, 1.0 / g.n))
        band = max(band, int(kvals[line].max()))
    return band


def identity_suite(
    u: SpectralField,
    d: SpectralField,
    w: SpectralField,
    c: LeslieCoefficients,
) -> list[IdentityResult]:
    """Check the four stress-work cancellation identities.

    Each left side is evaluated as <div of one stress block, u> with the
    divergence taken spectrally on a lattice wide enough to hold the full
    product spectrum; each right side uses the independent closed form.
    Both sides are exact lattice quantities, so for band-limited inputs
    they agree to roundoff.
    """
    g = u.grid
    band = max(_band_of(f.coef, g) for f in (u, d, w))
    band = max(band, 1)
    m = max(g.n, 10 * band + 4)
    m += m % 2
    big = make_grid(g.dim, m)
    dim = g.dim

    uv = _values_on(u.coef, g, big)
    dv = _values_on(d.coef, g, big)
    wv = _values_on(w.coef, g, big)
    A_hat, B_hat = _spin_hat(resample_array(u.coef, g, big), big)
    A = fft_inverse_array(A_hat.reshape((dim * dim,) + big.shape), big).reshape(
        (dim, dim) + big.shape
    )
    B = fft_inverse_array(B_hat.reshape((dim * dim,) + big.shape), big).reshape(
        (dim, dim) + big.shape
    )
    Bd = np.einsum("ki...,k...->i...", B, dv)
    Ad = np.einsum("ij...,j...->i...", A, dv)
    phi = np.einsum("i...,i...->...", dv, Ad)

    def work_of_block(block: np.ndarray) -> float:
        """<d_j block[j, i], u_i> with the divergence taken spectrally."""
        hat = fft_forward_array(block.reshape((dim * dim,) + big.shape), big)
        hat = hat.reshape((dim, dim) + big.shape)
        div = np.stack([
            sum((1j * big.k[j]) * hat[j, i] for j in range(dim)) for i in range(dim)
        ])
        u_hat = fft_forward_array(uv, big)
        return float(big.box_volume * np.sum(np.conj(u_hat) * div).real)

    outer = lambda a, b: np.einsum("j...,i...->ji...", a, b)

    results = [
        IdentityResult(
            "quintic_strain",
            work_of_block(c.mu1 * phi * outer(dv, dv)),
            -c.mu1 * _quad_sq(phi, big, 0),
        ),
        IdentityResult(
            "spin_block",
            work_of_block(c.mu2 * outer(dv, Bd) + c.mu3 * np.einsum(
                "i...,j...->ji...", dv, Bd)),
            c.lambda1 * _quad_sq(Bd, big, 1) + c.lambda2 * _quad_inner(Bd, Ad, big, 1),
        ),
        IdentityResult(
            "strain_block",
            work_of_block(c.mu5 * outer(dv, Ad) + c.mu6 * np.einsum(
                "i...,j...->ji...", dv, Ad)),
            -(c.mu5 + c.mu6) * _quad_sq(Ad, big, 1) + c.lambda2 * _quad_inner(Ad, Bd, big, 1),
        ),
        IdentityResult(
            "rate_block",
            work_of_block(c.mu2 * outer(dv, wv) + c.mu3 * np.einsum(
                "i...,j...->ji...", dv, wv)),
            c.lambda2 * _quad_inner(wv, Ad, big, 1) + c.lambda1 * _quad_inner(wv, Bd, big, 1),
        ),
    ]
    return results


# ---------------------------------------------------------------------------
# per-sample record


@dataclass
class DiagnosticsRecord:
    t: float
    E_basic: float
    D_total: float
    D_visc: float
    D_mu1: float
    D_lam1: float
    D_cross: float
    D_mu56: float
    E_hs: float
    D_hs: float | None  # undefined when the coefficients fall in no class
    E_eta: float | None
    D_eta: float | None
    h_max: float
    h_l2: float
    tangency_max: float
    residual: float | None = None  # filled post-hoc

    COLUMNS = (
        "t", "E_basic", "D_total", "D_visc", "D_mu1", "D_lam1", "D_cross",
        "D_mu56", "E_hs", "D_hs", "E_eta", "D_eta", "h_max", "h_l2",
        "tangency_max", "residual",
    )


def diagnostics_record(
    state: State,
    c: LeslieCoefficients,
    s: int,
    eta: float | None = None,
    estimate_constant: float = 1.0,
    delta: float | None = None,
    pad: str = "rule23",
) -> DiagnosticsRecord:
    """Assemble the per-sample record used for the CSV stream.

    The derivative stacks are built once and shared by every functional.
    """
    shared = _ContractionTerms(state, s, pad)
    terms = basic_dissipation(state, c, pad, terms=shared)
    if classify(c, delta).kind == "invalid":
        # off-class exploratory run: the Sobolev dissipation variant is
        # undefined; the energy is class-independent
        E_hs = (hs_norm_sq(state.u, s) + c.rho1 * hs_norm_sq(state.w, s)
                + _grad_d_hs_sq(state, s))
        D_hs = None
    else:
        E_hs, D_hs = hs_functionals(state, c, s, delta=delta, pad=pad, terms=shared)
    if eta is not None:
        E_eta, D_eta = modified_functionals(state, c, s, eta, estimate_constant,
                                            pad=pad, terms=shared)
    else:
        E_eta = D_eta = None
    h_max, h_l2, tang = constraint_monitor(state.d, state.w)
    return DiagnosticsRecord(
        t=state.t,
        E_basic=basic_energy(state, c),
        D_total=terms["total"],
        D_visc=terms["D_visc"],
        D_mu1=terms["D_mu1"],
        D_lam1=terms["D_lam1"],
        D_cross=terms["D_cross"],
        D_mu56=terms["D_mu56"],
        E_hs=E_hs,
        D_hs=D_hs,
        E_eta=E_eta,
        D_eta=D_eta,
        h_max=h_max,
        h_l2=h_l2,
        tangency_max=tang,
    )
