import numpy as np
import pytest

from elhsim.coefficients import from_independent, preset
from elhsim.constitutive import (
    ericksen_stress_div,
    kinematic_transport,
    kinematics,
    lagrange_multiplier,
    leslie_stress,
)
from elhsim.spectral import (
    RealField,
    SpectralField,
    divergence,
    fft_inverse_array,
    forward,
    gradient,
    inverse,
    l2_inner,
    laplacian,
    make_grid,
    resample,
)

from util import rand_director, rand_divfree, rand_spectral, values_of


G = make_grid(2, 32)


def zero_vec(grid=G):
    return SpectralField(grid, np.zeros((grid.dim,) + grid.shape, dtype=complex))


def const_vec(direction, grid=G):
    coef = np.zeros((grid.dim,) + grid.shape, dtype=complex)
    for i, v in enumerate(direction):
        coef[(i,) + (0,) * grid.dim] = v
    return SpectralField(grid, coef)


def test_kinematics_zero_velocity():
    d = rand_director(G, seed=1, band=4)
    w = rand_spectral(G, (2,), seed=2, band=4)
    t = kinematics(zero_vec(), d, w)
    assert np.max(np.abs(t.A)) < 1e-14
    assert np.max(np.abs(t.B)) < 1e-14
    w_big = fft_inverse_array(resample(w, t.grid).coef, t.grid)
    assert np.max(np.abs(t.N - w_big)) < 1e-12


def test_kinematics_trigonometric_case():
    # u = (-sin x2, sin x1): A12 = (cos x1 - cos x2)/2, B12 = -(cos x1 + cos x2)/2
    x = G.coords()
    u_vals = np.stack([
        np.broadcast_to(-np.sin(x[1]), G.shape),
        np.broadcast_to(np.sin(x[0]), G.shape),
    ])
    u = forward(RealField(G, u_vals.copy()))
    d = const_vec((1.0, 0.0))
    t = kinematics(u, d, zero_vec())
    xb = t.grid.coords()
    a12 = 0.5 * (np.cos(xb[0]) - np.cos(xb[1]))
    b12 = 0.5 * (-np.cos(xb[1]) - np.cos(xb[0]))
    assert np.max(np.abs(t.A[0, 1] - np.broadcast_to(a12, t.grid.shape))) < 1e-12
    assert np.max(np.abs(t.B[0, 1] - np.broadcast_to(b12, t.grid.shape))) < 1e-12


def test_kinematics_decomposition_and_symmetry():
    u = rand_divfree(G, seed=3)
    d = rand_director(G, seed=4, band=4)
    t = kinematics(u, d, zero_vec())
    Gu = fft_inverse_array(
        resample(gradient(u), t.grid).coef.reshape((4,) + t.grid.shape), t.grid
    ).reshape((2, 2) + t.grid.shape)
    assert np.max(np.abs(t.A + t.B - Gu)) < 1e-12 * max(1.0, np.max(np.abs(Gu)))
    assert np.max(np.abs(t.A - np.swapaxes(t.A, 0, 1))) < 1e-12
    assert np.max(np.abs(t.B + np.swapaxes(t.B, 0, 1))) < 1e-12


def test_multiplier_constant_director():
    c = preset("damped_default")
    d = const_vec((0.0, 1.0))
    gamma = lagrange_multiplier(zero_vec(), d, zero_vec(), c)
    assert np.max(np.abs(gamma.coef)) < 1e-14


def test_multiplier_uniform_rate():
    c = from_independent(mu1=0, mu4=1, mu5=0, mu6=0, lambda1=0, rho1=2.0)
    d = const_vec((0.0, 1.0))
    w = const_vec((1.0, 0.0))
    gamma = lagrange_multiplier(zero_vec(), d, w, c)
    vals = values_of(gamma)
    assert np.allclose(vals, -2.0, atol=1e-13)


def test_multiplier_against_pointwise_oracle():
    c = from_independent(mu1=0.5, mu4=1.0, mu5=1.2, mu6=0.4, lambda1=-1.0, rho1=1.3)
    u = rand_divfree(G, seed=5, band=4)
    d = rand_director(G, seed=6, band=4)
    w = rand_spectral(G, (2,), seed=7, band=4)
    gamma = lagrange_multiplier(u, d, w, c)

    # oracle: direct evaluation on a twice-oversampled lattice
    fine = make_grid(2, 2 * G.n)
    uv = values_of(resample(u, fine))
    dv = values_of(resample(d, fine))
    wv = values_of(resample(w, fine))
    gu = values_of(resample(gradient(u), fine))
    gd = values_of(resample(gradient(d), fine))
    a = 0.5 * (gu + np.transpose(gu, (1, 0, 2, 3)))
    dad = sum(
        dv[i] * a[i, j] * dv[j] for i in range(2) for j in range(2)
    )
    expect = (
        -c.rho1 * (wv[0] ** 2 + wv[1] ** 2)
        + sum(gd[k, i] ** 2 for k in range(2) for i in range(2))
        - c.lambda2 * dad
    )
    got = values_of(resample(gamma, fine))
    scale = np.max(np.abs(expect))
    assert np.max(np.abs(got - expect)) < 1e-8 * scale


def test_multiplier_invariant_under_constant_velocity_shift():
    c = preset("damped_default")
    u = rand_divfree(G, seed=8, band=4)
    d = rand_director(G, seed=9, band=4)
    w = rand_spectral(G, (2,), seed=10, band=4)
    g1 = lagrange_multiplier(u, d, w, c)
    shifted = SpectralField(G, u.coef.copy())
    shifted.coef[0, 0, 0] += 0.7
    shifted.coef[1, 0, 0] -= 0.3
    g2 = lagrange_multiplier(shifted, d, w, c)
    assert np.max(np.abs(g1.coef - g2.coef)) < 1e-13 * max(1.0, np.max(np.abs(g1.coef)))


def test_transport_zero_couplings():
    c = from_independent(mu1=1, mu4=1, mu5=0, mu6=0, lambda1=0, rho1=1)
    u = rand_divfree(G, seed=11, band=4)
    d = rand_director(G, seed=12, band=4)
    w = rand_spectral(G, (2,), seed=13, band=4)
    t = kinematics(u, d, w)
    g = kinematic_transport(t, d, c)
    assert np.max(np.abs(g.coef)) < 1e-14


def test_transport_reduces_to_rate_without_flow():
    c = from_independent(mu1=0, mu4=1, mu5=0.5, mu6=0.5, lambda1=-1, rho1=1)
    d = rand_director(G, seed=14, band=4)
    w = rand_spectral(G, (2,), seed=15, band=4)
    t = kinematics(zero_vec(), d, w)
    g = kinematic_transport(t, d, c)
    assert np.max(np.abs(g.coef + w.coef)) < 1e-12 * max(1.0, np.max(np.abs(w.coef)))


def test_transport_compositional_identity():
    c = from_independent(mu1=0, mu4=1, mu5=2.0, mu6=0.5, lambda1=-0.7, rho1=1)
    u = rand_divfree(G, seed=16, band=4)
    d = rand_director(G, seed=17, band=4)
    w = rand_spectral(G, (2,), seed=18, band=4)
    t = kinematics(u, d, w)
    g = values_of(resample(kinematic_transport(t, d, c), t.grid))
    d_big = values_of(resample(d, t.grid))
    expect = c.lambda1 * t.N + c.lambda2 * np.einsum("ij...,j...->i...", t.A, d_big)
    assert np.max(np.abs(g - expect)) < 1e-12 * max(1.0, np.max(np.abs(expect)))


def test_stress_vanishes_for_wave_map():
    c = preset("wave_map")
    u = rand_divfree(G, seed=19, band=4)
    d = rand_director(G, seed=20, band=4)
    w = rand_spectral(G, (2,), seed=21, band=4)
    s = leslie_stress(u, d, w, c)
    assert np.max(np.abs(s.coef)) == 0.0


def test_stress_constant_director_closed_form():
    c = from_independent(mu1=0.9, mu4=1.0, mu5=1.1, mu6=0.3, lambda1=-0.8, rho1=1)
    u = rand_divfree(G, seed=22, band=4)
    d = const_vec((1.0, 0.0))
    s = leslie_stress(u, d, zero_vec(), c)
    t = kinematics(u, d, zero_vec())
    big = t.grid
    A, B = t.A, t.B
    expect = np.zeros((2, 2) + big.shape)
    for j in range(2):
        for i in range(2):
            expect[j, i] = (
                c.mu1 * A[0, 0] * (i == 0) * (j == 0)
                + c.mu2 * (j == 0) * B[0, i]
                + c.mu3 * (i == 0) * B[0, j]
                + c.mu5 * (j == 0) * A[0, i]
                + c.mu6 * (i == 0) * A[0, j]
            )
    got = values_of(resample(s, big)).reshape((2, 2) + big.shape)
    assert np.max(np.abs(got - expect)) < 1e-12 * max(1.0, np.max(np.abs(expect)))


def test_stress_against_pointwise_oracle():
    c = from_independent(mu1=0.7, mu4=2.0, mu5=0.9, mu6=0.2, lambda1=-1.1, rho1=1)
    u = rand_divfree(G, seed=23, band=3)
    d = rand_director(G, seed=24, band=3)
    w = rand_spectral(G, (2,), seed=25, band=3)
    s = leslie_stress(u, d, w, c)

    fine = make_grid(2, 3 * G.n)
    uv = values_of(resample(u, fine))
    dv = values_of(resample(d, fine))
    wv = values_of(resample(w, fine))
    gu = values_of(resample(gradient(u), fine))
    A = 0.5 * (gu + np.transpose(gu, (1, 0, 2, 3)))
    B = 0.5 * (gu - np.transpose(gu, (1, 0, 2, 3)))
    N = wv + np.einsum("ki...,k...->i...", B, dv)
    Ad = np.einsum("ij...,j...->i...", A, dv)
    phi = np.einsum("i...,i...->...", dv, Ad)
    expect = np.zeros((2, 2) + fine.shape)
    for j in range(2):
        for i in range(2):
            expect[j, i] = (
                c.mu1 * phi * dv[i] * dv[j]
                + c.mu2 * dv[j] * N[i]
                + c.mu3 * dv[i] * N[j]
                + c.mu5 * dv[j] * Ad[i]
                + c.mu6 * dv[i] * Ad[j]
            )
    got = values_of(resample(s, fine)).reshape((2, 2) + fine.shape)
    assert np.max(np.abs(got - expect)) < 1e-8 * max(1.0, np.max(np.abs(expect)))


def test_ericksen_constant_director():
    d = const_vec((0.0, 1.0))
    out = ericksen_stress_div(d)
    assert np.max(np.abs(out.coef)) < 1e-14


def test_ericksen_one_dimensional_profile():
    # d = (cos f, sin f) with f = x1 + eps sin x1; only the first component
    # of -div(grad d (x) grad d) survives and equals -(d/dx1)(f')^2
    eps = 0.1
    x = G.coords()
    f = x[0] + eps * np.sin(x[0])
    d_vals = np.stack([
        np.broadcast_to(np.cos(f), G.shape),
        np.broadcast_to(np.sin(f), G.shape),
    ])
    d = forward(RealField(G, d_vals.copy()))
    out = inverse(ericksen_stress_div(d))
    expect1 = 2.0 * eps * np.sin(x[0]) * (1.0 + eps * np.cos(x[0]))
    assert np.max(np.abs(out.values[0] - np.broadcast_to(expect1, G.shape))) < 1e-10
    assert np.max(np.abs(out.values[1])) < 1e-10


def test_elastic_work_pairing_identity():
    # <-div(grad d . grad d), u> + <lap d, u . grad d> = 0 for div-free u
    u = rand_divfree(G, seed=26, band=4)
    d = rand_director(G, seed=27, band=4)
    lhs1 = l2_inner(ericksen_stress_div(d), u)

    big = make_grid(2, 4 * G.n)
    lap_vals = values_of(resample(laplacian(d), big))
    uv = values_of(resample(u, big))
    gd = values_of(resample(gradient(d), big))
    advect = np.einsum("j...,kj...->k...", uv, gd)
    lhs2 = big.box_volume * np.mean(np.sum(lap_vals * advect, axis=0))
    scale = abs(lhs1) + abs(lhs2) + 1e-30
    assert abs(lhs1 + lhs2) < 1e-10 * scale
