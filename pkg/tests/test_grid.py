import math
import warnings

import numpy as np
import pytest

from tripledeck.errors import DegenerateModeError, DomainError, ShapeError
from tripledeck.grid import (
    Grid,
    RoughnessProfile,
    SpectralField,
    diff_y,
    forward,
    frac_multiplier,
    hilbert_pressure,
    integrate_y,
    inverse,
)


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid(n_x=511)
    with pytest.raises(DomainError):
        Grid(n_y=512)
    with pytest.raises(DomainError):
        Grid(L=-1.0)


def test_round_trip_white_noise(small_grid, rng):
    f = rng.normal(size=(small_grid.n_x, small_grid.n_y))
    back = inverse(forward(f, small_grid))
    assert np.max(np.abs(back - f)) <= 1e-12 * np.max(np.abs(f))


def test_line_transform_of_gaussian(grid20):
    # exact line transform of exp(-x^2) is sqrt(pi) exp(-xi^2 / 4)
    fh = grid20.fft(np.exp(-grid20.x**2))
    exact = math.sqrt(math.pi) * np.exp(-grid20.xi**2 / 4)
    assert np.max(np.abs(fh - exact)) < 1e-13


def test_spectral_derivative(small_grid):
    k = 3 * math.pi / small_grid.L
    f = np.sin(k * small_grid.x)
    assert np.max(np.abs(small_grid.dx_spectral(f) - k * np.cos(k * small_grid.x))) < 1e-12


def test_hermitian_forward(small_grid, rng):
    f = rng.normal(size=(small_grid.n_x, small_grid.n_y))
    assert forward(f, small_grid).is_hermitian()


def test_frac_multiplier_negative_power_needs_zero_mean(small_grid):
    f = SpectralField(small_grid, small_grid.fft(np.ones((small_grid.n_x, small_grid.n_y))))
    with pytest.raises(DegenerateModeError):
        frac_multiplier(f, -0.5)


def test_hilbert_pressure_single_mode(small_grid):
    k = 4 * math.pi / small_grid.L
    a = np.cos(k * small_grid.x)
    assert np.max(np.abs(hilbert_pressure(a, small_grid) - k * a)) < 1e-12


def test_simpson_and_panel_integrals(grid20):
    y = grid20.y
    f = np.exp(-y) * np.cos(y)
    exact = 0.5 * (1 - np.exp(-y) * (np.cos(y) - np.sin(y)))
    simpson = integrate_y(f, grid20)
    panel = integrate_y(f, grid20, rule="panel6")
    assert np.max(np.abs(simpson - exact)) < 5e-7
    assert np.max(np.abs(panel - exact)) < 1e-10
    mid = integrate_y(f, grid20, upper=1.2345)
    assert mid == pytest.approx(0.5 * (1 - math.exp(-1.2345) * (math.cos(1.2345) - math.sin(1.2345))), abs=5e-7)
    with pytest.raises(DomainError):
        integrate_y(f, grid20, upper=25.0)


@pytest.mark.parametrize("deriv", [1, 2])
@pytest.mark.parametrize("accuracy,tol", [(4, 1e-4), (6, 1e-6)])
def test_diff_y_orders(grid20, deriv, accuracy, tol):
    y = grid20.y
    f = np.sin(2 * y) * np.exp(-0.1 * y)
    d1 = np.exp(-0.1 * y) * (2 * np.cos(2 * y) - 0.1 * np.sin(2 * y))
    d2 = np.exp(-0.1 * y) * (-3.99 * np.sin(2 * y) - 0.4 * np.cos(2 * y))
    got = diff_y(f, grid20.hy, deriv, accuracy)
    assert np.max(np.abs(got - (d1 if deriv == 1 else d2))) < tol


def test_roughness_presets(grid20):
    g = RoughnessProfile.preset("gaussian", grid20, 2.0, 1.5)
    assert g.samples.max() == pytest.approx(2.0)
    w = RoughnessProfile.preset("wavepacket", grid20, 1.0, 2.0, k0=3.0)
    assert w.samples[grid20.n_x // 2] == pytest.approx(1.0)
    with pytest.warns(UserWarning):
        RoughnessProfile.agnesi(grid20)
    with pytest.raises(DomainError):
        RoughnessProfile.agnesi(grid20, strict=True)
    with pytest.raises(ShapeError):
        RoughnessProfile(np.zeros(3), grid20)


def test_h2_norm_of_gaussian(grid20):
    # ||exp(-x^2)||_{H^2}^2 = int (1+xi^2)^2 pi exp(-xi^2/2) dxi / 2pi
    exact = math.sqrt(0.5 * math.sqrt(2 * math.pi) * (1 + 2 + 3))
    assert RoughnessProfile.gaussian(grid20).h2_norm == pytest.approx(exact, rel=1e-12)


def test_tail_energy_reported(grid20):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = RoughnessProfile.agnesi(grid20)
    assert 0 < a.tail_energy < 1e-3
    assert RoughnessProfile.gaussian(grid20).tail_energy == 0.0
