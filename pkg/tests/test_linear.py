import math

import mpmath
import numpy as np
import pytest

from tripledeck.airy import AIP0
from tripledeck.errors import NearSingularMultiplierError
from tripledeck.grid import Grid, RoughnessProfile, diff_y
from tripledeck.linear import (
    a0_radius,
    build_multiplier,
    multiplier_report,
    multiplier_scan,
    solve_linear,
    sublayer_residual,
    sup_ray_antiderivative,
    velocity_from_vorticity,
)


@pytest.fixture(scope="module")
def grid30():
    return Grid(L=40.0, n_x=512, m_height=30.0, n_y=513)


@pytest.fixture(scope="module")
def table30(grid30):
    return build_multiplier(grid30)


@pytest.fixture(scope="module")
def lin30(grid30, table30):
    f = RoughnessProfile.gaussian(grid30, amplitude=1e-3)
    return f, solve_linear(f, grid30, table30)


def test_p_m_against_mpmath(table30):
    c = table30.cube_root
    for j in (1, 5, 40, 200, -3):
        z = complex(c[j]) * table30.m_height
        ref = complex(mpmath.quad(lambda t: mpmath.airyai(t * z) * z, [0, 0.25, 1]))
        assert abs(table30.p_m[j] - ref) < 1e-10


def test_multiplier_formula(table30):
    xi = table30.xi
    j = 7
    rot = np.exp(1j * np.sign(xi[j]) * math.pi / 3)
    m = 1 - table30.p_m[j] * 1j * xi[j] * abs(xi[j]) ** (1 / 3) / (AIP0 * rot)
    assert table30.m[j] == pytest.approx(m, rel=1e-14)
    assert table30.m[0] == 1.0


def test_p0_and_a0():
    p0 = sup_ray_antiderivative()
    assert 1 / 3 < p0 < 0.5
    assert a0_radius(p0) == pytest.approx((4 * p0 / (3 * abs(AIP0))) ** -0.75)


@pytest.mark.parametrize("m_height", [10.0, 30.0, 50.0])
def test_report_positivity(m_height):
    rep = multiplier_report(build_multiplier(Grid(m_height=m_height)))
    assert rep["positivity_holds"]
    assert rep["quarter_bound_holds"]
    assert rep["min_re_p_rotated_modes"] > 0


def test_scan_limit():
    # p_M -> 1/3 as r -> inf, so Re(p/e^{i pi/3}) -> 1/6
    assert multiplier_scan([60.0])[0] == pytest.approx(1 / 6, abs=1e-10)


def test_singular_guard(grid30):
    with pytest.raises(NearSingularMultiplierError):
        build_multiplier(grid30, guard=10.0)


def test_laws_and_residual(lin30, grid30):
    f, sol = lin30
    assert sol.checks["wall_law_error"] < 1e-6
    assert sol.checks["integral_law_error"] < 1e-8
    res, scale = sublayer_residual(sol.omega_physical(), grid30)
    assert np.max(np.abs(res)) / scale < 1e-5


def test_integral_law_physical(lin30, grid30):
    f, sol = lin30
    top = grid30.integrate_high(sol.omega_physical())
    assert np.max(np.abs(top - (sol.a0 + f.samples))) < 1e-8 * np.max(np.abs(f.samples))


def test_zero_roughness(grid30, table30):
    f = RoughnessProfile(np.zeros(grid30.n_x), grid30)
    sol = solve_linear(f, grid30, table30)
    assert not np.any(sol.omega0.modes)
    assert not np.any(sol.a0)


def test_linearity(grid30, table30):
    f1 = RoughnessProfile.gaussian(grid30, amplitude=1.0)
    f2 = RoughnessProfile.wavepacket(grid30, amplitude=1.0, width=2.0)
    a, b = 0.3, -1.7
    s1 = solve_linear(f1, grid30, table30)
    s2 = solve_linear(f2, grid30, table30)
    s12 = solve_linear(RoughnessProfile(a * f1.samples + b * f2.samples, grid30), grid30, table30)
    comb = a * s1.omega0.modes + b * s2.omega0.modes
    assert np.max(np.abs(s12.omega0.modes - comb)) <= 1e-10 * np.max(np.abs(comb))


def test_velocity_continuity(lin30, grid30):
    _, sol = lin30
    u, v = velocity_from_vorticity(sol.omega_physical(), grid30)
    ux = grid30.dx_spectral(u)
    vy = diff_y(v, grid30.hy, 1, 6)
    assert np.max(np.abs(ux + vy)) < 1e-7 * np.max(np.abs(ux))
    assert np.max(np.abs(u[:, 0])) == 0 and np.max(np.abs(v[:, 0])) < 1e-15


def test_pressure_is_hilbert_of_displacement(lin30, grid30):
    _, sol = lin30
    p = sol.pressure()
    assert np.max(np.abs(grid30.fft(p) - np.abs(grid30.xi) * sol.a0_hat)) < 1e-12
