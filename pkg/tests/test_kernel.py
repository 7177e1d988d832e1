import math

import numpy as np
import pytest

from oracles import fd_green
from tripledeck.errors import ResidualTooLargeError, ShapeError, SingularSystemError
from tripledeck.grid import Grid
from tripledeck.kernel import (
    apply_green,
    boundary_solution,
    build_mode_kernel,
    cube_root,
    fd_oracle_solve,
    first_derivative_wall,
    ode_residual,
    thomas_solve,
)


def _profile(y, m_height, seed=0):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    t = y / m_height
    return (c[0] + c[1] * t + c[2] * t**2) * np.exp(-2 * t)


def test_cube_root_branch():
    c = cube_root(np.array([8.0, -8.0]))
    assert c[0] == pytest.approx(2 * np.exp(1j * math.pi / 6))
    assert c[1] == pytest.approx(2 * np.exp(-1j * math.pi / 6))
    assert np.allclose(c**3, 1j * np.array([8.0, -8.0]))


@pytest.mark.parametrize("xi", [1e-6, 0.01, 1.0, -3.0, 50.0])
def test_matches_sparse_fd(xi):
    g = Grid(m_height=0.5, n_y=513)
    h = _profile(g.y, g.m_height)
    f = apply_green(build_mode_kernel(xi, g), h).f_hat
    ref = fd_green(xi, h, g.m_height, g.n_y)
    assert np.max(np.abs(f - ref)) / np.max(np.abs(ref)) < 1e-5


def test_boundary_conditions():
    g = Grid(m_height=5.0, n_y=513)
    h = _profile(g.y, g.m_height, 3)
    f = apply_green(build_mode_kernel(2.0, g), h).f_hat
    assert f[-1] == 0
    assert abs(first_derivative_wall(f, g.hy)) < 1e-8 * np.max(np.abs(f))


def test_zero_mode_closed_form():
    g = Grid(m_height=2.0, n_y=513)
    f = apply_green(build_mode_kernel(0.0, g), np.ones(g.n_y)).f_hat
    assert np.max(np.abs(f - (4 - g.y**2) / 2)) < 1e-12


def test_batch_equals_single():
    g = Grid(L=10.0, n_x=16, m_height=3.0, n_y=257)
    k = build_mode_kernel(g.xi, g)
    rng = np.random.default_rng(7)
    h = (rng.normal(size=(16, 1)) + rng.normal(size=(16, 1)) * g.y[None, :]) * np.exp(-g.y)[None, :]
    batch = apply_green(k, h).f_hat
    for j in (0, 3, 9):
        one = apply_green(build_mode_kernel(g.xi[j], g), h[j]).f_hat
        assert np.max(np.abs(batch[j] - one)) < 1e-13 * max(1.0, np.max(np.abs(one)))


def test_conjugate_symmetry():
    g = Grid(m_height=4.0, n_y=257)
    h = np.exp(-g.y)
    fp = apply_green(build_mode_kernel(1.7, g), h).f_hat
    fm = apply_green(build_mode_kernel(-1.7, g), h).f_hat
    assert np.max(np.abs(fm - np.conj(fp))) < 1e-14


def test_unresolved_mode_is_caught():
    g = Grid(m_height=30.0, n_y=129)
    with pytest.raises(ResidualTooLargeError):
        apply_green(build_mode_kernel(1e3, g), np.exp(-g.y) + 0j)


def test_shape_error():
    g = Grid(m_height=3.0, n_y=129)
    with pytest.raises(ShapeError):
        apply_green(build_mode_kernel([1.0, 2.0], g), np.zeros((3, 129)))


def test_boundary_solution_flux():
    g = Grid(m_height=20.0, n_y=1025)
    w = boundary_solution(2.0, 1.0 + 0.5j, g)
    assert abs(first_derivative_wall(w, g.hy) - (1.0 + 0.5j)) < 1e-8
    assert np.max(ode_residual(np.array([2.0]), w[None, :], np.zeros((1, g.n_y)), g)) < 1e-6


def test_internal_fd_solver_agrees_with_sparse():
    g = Grid(m_height=2.0, n_y=257)
    h = _profile(g.y, g.m_height, 5)
    a = fd_oracle_solve(3.0, h, g)
    b = fd_green(3.0, h, g.m_height, g.n_y)
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_thomas_singular():
    with pytest.raises(SingularSystemError):
        thomas_solve(np.zeros(2), np.zeros(3), np.zeros(2), np.ones(3))
