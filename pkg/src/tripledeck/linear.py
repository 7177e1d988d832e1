r"""
Linear sublayer solve driven by the roughness.

The integral condition turns into a Fourier multiplier

.. math::

    m(\xi) = 1 - \frac{p_M(\xi)\, i\xi|\xi|^{1/3}}{\mathrm{Ai}'(0)\,e^{\mathrm{sgn}(\xi)\pi i/3}},
    \qquad p_M(\xi) = \int_0^{(i\xi)^{1/3}M}\mathrm{Ai}(z)\,dz,

after which :math:`\hat A_0 = -\hat F/m` and the vorticity is the decaying
Airy profile carrying the wall flux :math:`i\xi|\xi|\hat A_0`.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .airy import AIP0, ray_antiderivative
from .errors import InvariantViolationError, NearSingularMultiplierError, ShapeError
from .grid import SpectralField, hilbert_pressure, integrate_y
from .kernel import build_mode_kernel, cube_root, first_derivative_wall, second_derivative

__all__ = [
    "MultiplierTable",
    "LinearSolution",
    "DiagnosticsRecord",
    "build_multiplier",
    "solve_linear",
    "multiplier_report",
    "multiplier_scan",
    "sup_ray_antiderivative",
    "a0_radius",
    "velocity_from_vorticity",
    "sublayer_residual",
]

SINGULAR_GUARD = 1e-8


def _p_of_xi(xi, m_height):
    """``p_M(xi)`` for every entry of ``xi`` (conjugate symmetry for xi < 0)."""
    xi = np.asarray(xi, dtype=float)
    radii = np.abs(xi) ** (1.0 / 3.0) * m_height
    p_pos = ray_antiderivative(math.pi / 6, radii)
    return np.where(xi < 0, np.conj(p_pos), p_pos)


def _m_of(xi, p):
    xi = np.asarray(xi, dtype=float)
    rot = np.exp(1j * np.sign(xi) * math.pi / 3)
    return 1.0 - p * 1j * xi * np.abs(xi) ** (1.0 / 3.0) / (AIP0 * rot)


@dataclass
class MultiplierTable:
    """Per-mode ``p_M``, ``m`` and the empirical bound ratio ``|m|^{-1} (1+|xi|)^{4/3}``."""

    grid: object
    xi: np.ndarray
    p_m: np.ndarray
    m: np.ndarray
    inv_m_bound_ratio: np.ndarray
    cube_root: np.ndarray

    @property
    def m_height(self):
        return self.grid.m_height


def build_multiplier(grid, guard=SINGULAR_GUARD):
    """Tabulate ``p_M`` and ``m`` on every grid mode.

    Raises
    ------
    NearSingularMultiplierError
        If ``|m| <= guard`` on some mode.
    """
    xi = grid.xi
    p = _p_of_xi(xi, grid.m_height)
    m = _m_of(xi, p)
    m[xi == 0] = 1.0
    bad = np.flatnonzero(np.abs(m) <= guard)
    if bad.size:
        j = int(bad[0])
        raise NearSingularMultiplierError(
            f"|m| = {abs(m[j]):.3e} at xi = {xi[j]:.6g} (mode {j})", index=j, value=m[j]
        )
    ratio = (1.0 + np.abs(xi)) ** (4.0 / 3.0) / np.abs(m)
    return MultiplierTable(grid, xi.copy(), p, m, ratio, cube_root(xi))


def sup_ray_antiderivative(r_max=100.0, n=20001):
    r"""``p_0 = sup |int_0^z Ai|`` over the rays ``arg z = +-pi/6``, sampled to ``|z| = r_max``.

    The two rays give conjugate values, so one suffices.
    """
    r = np.linspace(0.0, r_max, n)
    return float(np.max(np.abs(ray_antiderivative(math.pi / 6, r))))


def a0_radius(p0=None):
    r"""Frequency radius below which ``|m| >= 1/4``: ``(4 p_0/(3|Ai'(0)|))^{-3/4}``."""
    if p0 is None:
        p0 = sup_ray_antiderivative()
    return (4.0 * p0 / (3.0 * abs(AIP0))) ** (-0.75)


def multiplier_scan(r_values):
    r"""``Re(p_M / e^{i pi/3})`` as a function of ``r = |xi|^{1/3} M`` (same for both signs)."""
    r = np.asarray(r_values, dtype=float)
    p = ray_antiderivative(math.pi / 6, r)
    return np.real(p / np.exp(1j * math.pi / 3))


@dataclass
class DiagnosticsRecord:
    """Flat, JSON-ready collection of scalar diagnostics."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def to_dict(self):
        return dict(self.values)


def multiplier_report(table, r_scan_max=50.0, n_scan=2000):
    """Empirical constants of the multiplier: bound ratio, min ``|m|``,
    the ``|m| >= 1/4`` check below ``a0`` and the positivity scan."""
    xi = table.xi
    p0 = sup_ray_antiderivative()
    a0 = a0_radius(p0)
    low = np.abs(xi) <= a0
    r_grid = np.linspace(r_scan_max / n_scan, r_scan_max, n_scan)
    scan = multiplier_scan(r_grid)
    r_modes = np.abs(xi) ** (1.0 / 3.0) * table.m_height
    in_range = (r_modes > 0) & (r_modes <= r_scan_max)
    rot = np.exp(1j * np.sign(xi) * math.pi / 3)
    pos_modes = np.real(table.p_m / rot)[in_range]
    return DiagnosticsRecord(
        {
            "M": float(table.m_height),
            "max_inv_m_bound_ratio": float(np.max(table.inv_m_bound_ratio)),
            "min_abs_m": float(np.min(np.abs(table.m))),
            "p0": p0,
            "a0": a0,
            "min_abs_m_below_a0": float(np.min(np.abs(table.m[low]))),
            "quarter_bound_holds": bool(np.all(np.abs(table.m[low]) >= 0.25)),
            "min_re_p_rotated_scan": float(np.min(scan)),
            "min_re_p_rotated_modes": float(np.min(pos_modes)) if pos_modes.size else None,
            "positivity_holds": bool(np.min(scan) > 0 and (pos_modes.size == 0 or np.min(pos_modes) > 0)),
        }
    )


def velocity_from_vorticity(omega, grid):
    """``u = I_y[omega]`` and ``v = -d/dx I_y[u]`` on the physical grid."""
    u = integrate_y(omega, grid, rule="panel6")
    v = -grid.dx_spectral(integrate_y(u, grid, rule="panel6"))
    return u, v


def sublayer_residual(omega, grid, u=None, v=None, forcing=None):
    """Pointwise residual of ``y w_x + u w_x + v w_y - w_yy (- forcing)`` on interior y nodes.

    Returns
    -------
    residual : ndarray, shape (n_x, n_y - 6)
    scale : float
        ``max(|y w_x|, |w_yy|)`` used to report a relative residual.
    """
    y = grid.y
    wx = grid.dx_spectral(omega)
    wyy = second_derivative(omega, grid.hy)
    inner = slice(3, grid.n_y - 3)
    res = y[inner][None, :] * wx[:, inner] - wyy
    scale = max(float(np.max(np.abs(y[None, :] * wx))), float(np.max(np.abs(wyy))))
    if u is not None:
        wy = _first_derivative_central(omega, grid.hy)
        res = res + u[:, inner] * wx[:, inner] + v[:, inner] * wy
    if forcing is not None:
        res = res - forcing[:, inner]
    return res, scale


_D1C = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])


def _first_derivative_central(f, h):
    n = f.shape[-1]
    out = np.zeros(f.shape[:-1] + (n - 6,), dtype=f.dtype)
    for i, c in enumerate(_D1C):
        if c:
            out = out + c * f[..., i : n - 6 + i]
    return out / h


@dataclass
class LinearSolution:
    """Linear response to the roughness.

    Attributes
    ----------
    omega0 : SpectralField
        Vorticity modes.
    a0 : ndarray
        Displacement samples.
    a0_hat : ndarray
        Displacement modes.
    top_trace : ndarray
        ``omega0(x, M)`` samples.
    """

    grid: object
    omega0: SpectralField
    a0: np.ndarray
    a0_hat: np.ndarray
    top_trace: np.ndarray
    checks: dict = field(default_factory=dict)

    def omega_physical(self):
        return self.omega0.to_physical()

    def pressure(self):
        return hilbert_pressure(self.a0, self.grid)

    def velocities(self):
        return velocity_from_vorticity(self.omega_physical(), self.grid)


def solve_linear(f, grid, table, kernel=None, verify=True, law_tol=1e-6, integral_tol=1e-8):
    r"""Linear response ``(omega_0, A_0)`` to roughness ``f``.

    ``A_0 = -F/m`` mode by mode and
    ``omega_0 = -Ai(c y) i xi |xi|^{2/3} F / (Ai'(0) e^{sgn(xi) pi i/6} m)``,
    with the mean and Nyquist modes of the vorticity set to zero.

    Parameters
    ----------
    f : RoughnessProfile
    grid : Grid
    table : MultiplierTable
        Built on ``grid``.
    kernel : ModeKernel, optional
        Airy profiles for all grid modes (built when omitted).
    verify : bool
        Check the wall law, the integral law and the top trace before
        returning.

    Raises
    ------
    InvariantViolationError
        A law fails; ``index`` names the offending mode.
    """
    if table.grid != grid or f.grid != grid:
        raise ShapeError("roughness, table and grid must share one grid")
    if kernel is None:
        kernel = build_mode_kernel(grid.xi, grid)
    f_hat = f.hat.copy()
    a_hat = -f_hat / table.m
    a_hat[grid.nyquist] = 0.0
    g_hat = grid.symbol(1.0, signed=True) * a_hat
    xi = grid.xi
    nz = xi != 0
    omega_hat = np.zeros((grid.n_x, grid.n_y), dtype=complex)
    c = kernel.cube_root
    omega_hat[nz] = kernel.ai_values()[nz] * (g_hat[nz] / (AIP0 * c[nz]))[:, None]
    omega_hat[grid.nyquist] = 0.0

    checks = {}
    if verify:
        checks = _verify_laws(grid, omega_hat, a_hat, f_hat, g_hat, kernel, law_tol, integral_tol)
    omega = SpectralField(grid, omega_hat)
    a0 = grid.ifft(a_hat)
    top = grid.ifft(omega_hat[:, -1])
    return LinearSolution(grid, omega, a0, a_hat, top, checks)


def _verify_laws(grid, omega_hat, a_hat, f_hat, g_hat, kernel, law_tol, integral_tol):
    dwall = first_derivative_wall(omega_hat, grid.hy)
    gscale = max(float(np.max(np.abs(g_hat))), 1e-300)
    wall_err = np.abs(dwall - g_hat) / gscale
    fscale = max(float(np.max(np.abs(f_hat))), 1e-300)
    integral = grid.integrate_high(omega_hat)
    target = a_hat + f_hat
    target[grid.nyquist] = 0.0
    int_err = np.abs(integral - target) / fscale
    c = kernel.cube_root
    expected_top = np.zeros(grid.n_x, dtype=complex)
    nz = grid.xi != 0
    with np.errstate(under="ignore"):
        ai_top = kernel.ai[:, -1] * np.exp(-kernel.rho[:, -1])
    expected_top[nz] = ai_top[nz] / AIP0 * c[nz] ** 2 * np.abs(grid.xi[nz]) * a_hat[nz]
    expected_top[grid.nyquist] = 0.0
    top_err = np.abs(omega_hat[:, -1] - expected_top) / max(float(np.max(np.abs(a_hat))), 1e-300)
    for name, err, tol in (
        ("wall law", wall_err, law_tol),
        ("integral law", int_err, integral_tol),
        ("top trace", top_err, law_tol),
    ):
        j = int(np.argmax(err))
        if err[j] > tol:
            raise InvariantViolationError(
                f"{name} violated: relative error {err[j]:.3e} > {tol:g} at mode {j} "
                f"(xi = {grid.xi[j]:.6g})",
                index=j,
            )
    return {
        "wall_law_error": float(np.max(wall_err)),
        "integral_law_error": float(np.max(int_err)),
        "top_trace_error": float(np.max(top_err)),
    }
