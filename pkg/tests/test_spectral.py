import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qgswlab.spectral import (
    Grid,
    IllPosedInversion,
    ScalarField,
    build_grid,
    dealias,
    error_symbol,
    error_symbol_magnitude,
    error_velocity,
    hamiltonian,
    invert_helmholtz,
    spectral_energy,
    velocity_from_vorticity,
)

G64 = Grid(64)


def mode(grid, func):
    return grid.from_function(func)


def rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


def random_field(grid, seed, kcut=None, mean_zero=True):
    rng = np.random.default_rng(seed)
    f = ScalarField(grid, rng.standard_normal((grid.n, grid.n)))
    if kcut is not None:
        coeffs = np.where(grid.kabs <= kcut, f.spectral, 0.0)
        f = ScalarField.from_spectral(grid, coeffs)
    return f.minus_mean() if mean_zero else f


# ---- grid ------------------------------------------------------------------

def test_grid_wavenumbers_dft_order():
    g = build_grid(8, 2 * math.pi)
    assert list(g.wavenumbers) == [0, 1, 2, 3, -4, -3, -2, -1]
    assert g.k1[0, 0] == 0 and g.k2[0, 0] == 0


def test_grid_length_scales_wavenumbers():
    g = build_grid(8, math.pi)
    np.testing.assert_allclose(g.wavenumbers, 2 * np.array([0, 1, 2, 3, -4, -3, -2, -1]))
    assert list(g.integer_wavenumbers) == [0, 1, 2, 3, -4, -3, -2, -1]


@pytest.mark.parametrize("n,length", [(6, 2 * math.pi), (4, 2 * math.pi), (12, 1.0), (8, 0.0), (8, -1.0)])
def test_grid_rejects_bad_input(n, length):
    with pytest.raises(ValueError):
        build_grid(n, length)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_round_trip(seed):
    f = random_field(G64, seed, mean_zero=False)
    back = ScalarField.from_spectral(G64, f.spectral)
    assert rel(back.values, f.values) < 1e-12


def test_spectral_is_hermitian():
    f = random_field(G64, 3, mean_zero=False)
    c = f.spectral
    flipped = np.conj(np.roll(np.flip(c), 1, axis=(0, 1)))
    assert rel(flipped, c) < 1e-12


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_parseval(seed):
    f = random_field(G64, seed, mean_zero=False)
    direct = float(np.sum(f.values**2) * G64.cell_area)
    assert spectral_energy(f) == pytest.approx(direct, rel=1e-10)


def test_single_mode_norm_closed_form():
    f = mode(Grid(32), lambda x, y: np.cos(x))
    assert f.norm(2) == pytest.approx(math.pi * math.sqrt(2), rel=1e-12)


# ---- Helmholtz inversion and velocity --------------------------------------

@pytest.mark.parametrize(
    "func,lam,expect",
    [
        (lambda x, y: np.sin(x), 0.0, lambda x, y: np.sin(x)),
        (lambda x, y: np.sin(x), 1.0, lambda x, y: 0.5 * np.sin(x)),
        (lambda x, y: np.cos(y), 3.0, lambda x, y: 0.25 * np.cos(y)),
    ],
)
def test_invert_helmholtz_single_modes(func, lam, expect):
    psi = invert_helmholtz(mode(G64, func), lam)
    assert rel(psi.values, mode(G64, expect).values) < 1e-12


def test_invert_helmholtz_mean_mode():
    f = mode(G64, lambda x, y: 2.0 + np.sin(x))
    psi = invert_helmholtz(f, 4.0)
    assert psi.mean() == pytest.approx(0.5, rel=1e-12)


def test_poisson_rejects_nonzero_mean():
    f = mode(G64, lambda x, y: 1.0 + np.sin(x))
    with pytest.raises(IllPosedInversion):
        invert_helmholtz(f, 0.0)
    with pytest.raises(IllPosedInversion):
        velocity_from_vorticity(f, 0.0)


def test_helmholtz_rejects_negative_lambda():
    with pytest.raises(ValueError):
        invert_helmholtz(mode(G64, lambda x, y: np.sin(x)), -1.0)


@pytest.mark.parametrize(
    "func,lam,u1,u2",
    [
        (lambda x, y: np.sin(x), 0.0, lambda x, y: 0 * x, lambda x, y: np.cos(x)),
        (lambda x, y: np.sin(x), 1.0, lambda x, y: 0 * x, lambda x, y: 0.5 * np.cos(x)),
        (lambda x, y: np.cos(y), 3.0, lambda x, y: 0.25 * np.sin(y), lambda x, y: 0 * x),
    ],
)
def test_velocity_single_modes(func, lam, u1, u2):
    u = velocity_from_vorticity(mode(G64, func), lam)
    x, y = G64.mesh
    scale = max(np.abs(u1(x, y)).max(), np.abs(u2(x, y)).max())
    assert np.abs(u.u1.values - u1(x, y)).max() <= 1e-12 * scale
    assert np.abs(u.u2.values - u2(x, y)).max() <= 1e-12 * scale


def test_error_velocity_single_mode():
    w = mode(G64, lambda x, y: np.sin(x))
    e = error_velocity(w, 1.0)
    x, _ = G64.mesh
    assert np.abs(e.u1.values).max() < 1e-13
    assert rel(e.u2.values, 0.5 * np.cos(x)) < 1e-12


@given(st.integers(0, 2**31 - 1), st.floats(1e-3, 1e3))
@settings(max_examples=30, deadline=None)
def test_error_velocity_is_velocity_difference(seed, lam):
    w = random_field(G64, seed)
    e = error_velocity(w, lam)
    d = velocity_from_vorticity(w, 0.0) - velocity_from_vorticity(w, lam)
    ref = velocity_from_vorticity(w, 0.0)
    for a, b, r in ((e.u1, d.u1, ref.u1), (e.u2, d.u2, ref.u2)):
        scale = np.abs(r.spectral).max()
        assert np.abs(a.spectral - b.spectral).max() <= 1e-12 * scale


def test_error_velocity_rejects_nonpositive_lambda():
    w = mode(G64, lambda x, y: np.sin(x))
    with pytest.raises(ValueError):
        error_velocity(w, 0.0)


@given(st.integers(0, 2**31 - 1), st.one_of(st.just(0.0), st.floats(1e-6, 100.0)))
@settings(max_examples=30, deadline=None)
def test_velocity_divergence_free(seed, lam):
    w = random_field(G64, seed)
    u = velocity_from_vorticity(w, lam)
    scale = np.abs(u.u1.spectral).max() * G64.kabs.max()
    assert np.abs(u.spectral_divergence()).max() <= 1e-14 * scale


@pytest.mark.parametrize("lam", [1e-4, 0.1, 1.0, 10.0, 1e4])
def test_error_symbol_pointwise_bound(lam):
    g = Grid(64)
    k = g.kabs
    mag = error_symbol(g, lam) * k
    nz = k > 0
    bound = np.minimum(1.0 / k[nz], lam / k[nz] ** 3)
    assert np.all(mag[nz] <= bound * (1 + 1e-12))


# ---- continuum kernel norms: radial quadrature oracles ----------------------

@pytest.mark.parametrize("lam", [0.25, 1.0, 4.0])
def test_error_symbol_l1_norm(lam):
    # int_{R^2} |S| = 2 pi int_0^inf r |S(r)| dr, split at sqrt(lam) for the quadrature
    f = lambda r: 2 * math.pi * r * error_symbol_magnitude(r, lam)
    a = math.sqrt(lam)
    val = integrate.quad(f, 0, a, epsabs=0, epsrel=1e-12)[0] + integrate.quad(f, a, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert val == pytest.approx(math.pi**2 * math.sqrt(lam), rel=1e-3)


@pytest.mark.parametrize("lam", [0.25, 1.0, 4.0])
def test_gradient_kernel_l2_norm(lam):
    inner = integrate.quad(lambda r: 2 * math.pi * r / (lam + r * r) ** 2, 0, np.inf, epsrel=1e-12)[0]
    assert lam * math.sqrt(inner) == pytest.approx(math.sqrt(math.pi * lam), rel=1e-3)


# ---- dealiasing and energy -------------------------------------------------

def test_dealias_keeps_low_mode():
    f = mode(G64, lambda x, y: np.cos(x))
    assert rel(dealias(f).values, f.values) < 1e-14


def test_dealias_removes_high_mode():
    f = mode(G64, lambda x, y: np.cos(30 * x))
    assert np.abs(dealias(f).values).max() < 1e-13


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_dealias_energy_non_increasing(seed):
    f = random_field(G64, seed, mean_zero=False)
    assert spectral_energy(dealias(f)) <= spectral_energy(f)
    assert spectral_energy(dealias(f)) < spectral_energy(f)


def test_hamiltonian_single_mode():
    # H = 1/2 int psi * omega = 1/2 * (1/(lam+1)) * ||sin x||^2
    w = mode(G64, lambda x, y: np.sin(x))
    for lam in (0.0, 1.0):
        assert hamiltonian(w, lam) == pytest.approx(0.5 * 2 * math.pi**2 / (lam + 1), rel=1e-12)
