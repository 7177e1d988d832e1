r"""
Airy Green's function for the per-mode sublayer operator.

For each frequency :math:`\xi` the forced problem

.. math::

    (i\xi y - \partial_y^2) f = h,\qquad f'(0) = 0,\quad f(M) = 0

has the solution

.. math::

    f(y) = \pi s_M c^{-1}\Big[\mu_M(y)\int_0^y \mu_0 h\,dz
           + \mu_0(y)\int_y^M \mu_M h\,dz\Big],

with :math:`c = (i\xi)^{1/3}` on the principal branch,
:math:`\mu_0(y) = \mathrm{Ai}(cy) + \mathrm{Bi}(cy)/\sqrt3`,
:math:`\mu_M(y) = \mathrm{Ai}(cy) - [\mathrm{Ai}(cM)/\mathrm{Bi}(cM)]\mathrm{Bi}(cy)`
and :math:`s_M = 1/t(cM)`.

Both profiles are stored scaled, :math:`\mu_0 = e^{\rho(y)}\tilde\mu_0` and
:math:`\mu_M = e^{-\rho(y)}\tilde\mu_M` with
:math:`\rho(y) = \mathrm{Re}\,\tfrac23 (cy)^{3/2}`, so the two running
integrals are propagated node to node with the bounded factors
:math:`e^{-(\rho_{k+1}-\rho_k)}` and never overflow.
"""

from dataclasses import dataclass
import math

import numpy as np

from .airy import AIP0, SQRT3, eval_airy
from .errors import NonFiniteError, ResidualTooLargeError, ShapeError, SingularSystemError
from .grid import cumulative_panels, panel_stencils

__all__ = [
    "ModeKernel",
    "GreenApplyResult",
    "cube_root",
    "build_mode_kernel",
    "apply_green",
    "boundary_solution",
    "fd_oracle_solve",
    "thomas_solve",
    "second_derivative",
    "first_derivative_wall",
]


def cube_root(xi):
    r"""Principal :math:`(i\xi)^{1/3} = |\xi|^{1/3} e^{i\,\mathrm{sgn}(\xi)\pi/6}`."""
    xi = np.asarray(xi, dtype=float)
    return np.abs(xi) ** (1.0 / 3.0) * np.exp(1j * np.sign(xi) * math.pi / 6)


# sixth-order central second derivative
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
# sixth-order one-sided first derivative at the wall
_D1_WALL = np.array([-49 / 20, 6, -15 / 2, 20 / 3, -15 / 4, 6 / 5, -1 / 6])


def second_derivative(f, h):
    """Sixth-order second derivative on interior nodes ``3 .. n-4`` (last axis)."""
    n = f.shape[-1]
    out = np.zeros(f.shape[:-1] + (n - 6,), dtype=f.dtype)
    for i, c in enumerate(_D2):
        out = out + c * f[..., i : n - 6 + i]
    return out / h**2


def first_derivative_wall(f, h):
    """Sixth-order one-sided first derivative at the first node (last axis)."""
    return np.tensordot(f[..., :7], _D1_WALL, axes=([-1], [0])) / h


@dataclass
class ModeKernel:
    """Green's-function data for a batch of frequencies on one grid.

    Attributes
    ----------
    xi : ndarray, shape (n_modes,)
    cube_root : ndarray
        ``(i xi)^{1/3}``.
    s_m : ndarray
        ``1/t(cM)``; equals ``sqrt(3)/2`` at ``xi = 0``.
    mu0, mu_m : ndarray, shape (n_modes, n_y)
        Scaled profiles ``exp(-rho) mu_0`` and ``exp(rho) mu_M``.
    ai : ndarray, shape (n_modes, n_y)
        Scaled ``exp(rho) Ai(c y)``.
    rho : ndarray, shape (n_modes, n_y)
        ``Re(2/3 (c y)^{3/2})``.
    """

    grid: object
    xi: np.ndarray
    cube_root: np.ndarray
    s_m: np.ndarray
    mu0: np.ndarray
    mu_m: np.ndarray
    ai: np.ndarray
    rho: np.ndarray

    @property
    def n_modes(self):
        return self.xi.shape[0]

    def mu0_values(self):
        """Unscaled ``mu_0`` (may overflow for large ``|xi|^{1/3} y``)."""
        with np.errstate(over="ignore"):
            return self.mu0 * np.exp(self.rho)

    def mu_m_values(self):
        """Unscaled ``mu_M``."""
        with np.errstate(under="ignore"):
            return self.mu_m * np.exp(-self.rho)

    def ai_values(self):
        """Unscaled ``Ai(c y)``."""
        with np.errstate(under="ignore"):
            return self.ai * np.exp(-self.rho)

    def select(self, idx):
        idx = np.atleast_1d(idx)
        return ModeKernel(
            self.grid, self.xi[idx], self.cube_root[idx], self.s_m[idx],
            self.mu0[idx], self.mu_m[idx], self.ai[idx], self.rho[idx],
        )

    def green_matrix(self, j=0):
        """Dense ``G(y, z)`` for mode ``j`` (scaled products, for symmetry checks).

        Returns ``pi s_M mu_M(max) mu_0(min)``, i.e. the kernel without the
        ``c^{-1}`` prefactor, so that ``f = c^{-1} int G h dz``.
        """
        r = self.rho[j]
        diff = r[:, None] - r[None, :]
        lower = np.exp(-np.abs(diff))
        a = self.mu_m[j][:, None] * self.mu0[j][None, :]
        b = self.mu0[j][:, None] * self.mu_m[j][None, :]
        # y >= z: mu_M(y) mu_0(z); y < z: mu_0(y) mu_M(z)
        g = np.where(diff >= 0, a, b) * lower
        if self.xi[j] == 0:
            yy = self.grid.y
            return self.grid.m_height - np.maximum(yy[:, None], yy[None, :]) + 0j
        return math.pi * self.s_m[j] * g


def build_mode_kernel(xi, grid):
    """Assemble the scaled Green's-function profiles for one or many frequencies.

    Parameters
    ----------
    xi : float or array_like
        Frequencies.
    grid : Grid

    Returns
    -------
    ModeKernel

    Raises
    ------
    NonFiniteError
        Propagated from the Airy evaluator.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if not np.all(np.isfinite(xi)):
        raise NonFiniteError("frequencies must be finite")
    y = grid.y
    n = xi.shape[0]
    mag, inv = np.unique(np.abs(xi), return_inverse=True)
    c_pos = mag ** (1.0 / 3.0) * np.exp(1j * math.pi / 6)

    ny = y.shape[0]
    mu0 = np.empty((mag.size, ny), dtype=complex)
    mum = np.empty((mag.size, ny), dtype=complex)
    ai = np.empty((mag.size, ny), dtype=complex)
    rho = np.zeros((mag.size, ny))
    s_m = np.empty(mag.size, dtype=complex)

    zero = mag == 0
    if zero.any():
        i0 = np.flatnonzero(zero)
        mu0[i0] = 2.0 * eval_airy(0.0).ai
        mum[i0] = 0.0
        ai[i0] = eval_airy(0.0).ai
        s_m[i0] = SQRT3 / 2.0
    nz = np.flatnonzero(~zero)
    if nz.size:
        z = c_pos[nz, None] * y[None, :]
        smp = eval_airy(z)
        top = eval_airy(c_pos[nz] * grid.m_height)
        r = np.asarray(smp.scale_exp)
        r_top = np.asarray(top.scale_exp)
        with np.errstate(under="ignore"):
            damp = np.exp(-2.0 * r)
            ratio = np.asarray(top.ai) / np.asarray(top.bi)
            top_damp = np.exp(-2.0 * (r_top[:, None] - r))
            t_top = ratio * np.exp(-2.0 * r_top) + 1.0 / SQRT3
        mu0[nz] = smp.ai * damp + smp.bi / SQRT3
        mum[nz] = smp.ai - ratio[:, None] * top_damp * smp.bi
        mum[nz, -1] = 0.0
        ai[nz] = smp.ai
        rho[nz] = r
        s_m[nz] = 1.0 / t_top

    neg = xi < 0
    sel = lambda arr: np.where(
        neg.reshape((-1,) + (1,) * (arr.ndim - 1)), np.conj(arr[inv]), arr[inv]
    )
    return ModeKernel(
        grid=grid,
        xi=xi,
        cube_root=cube_root(xi),
        s_m=sel(s_m),
        mu0=sel(mu0),
        mu_m=sel(mum),
        ai=sel(ai),
        rho=rho[inv],
    )


@dataclass
class GreenApplyResult:
    """Solution profile(s) and the maximal interior ODE residual per mode."""

    f_hat: np.ndarray
    residual: np.ndarray


def _scaled_sweeps(k, h):
    """Running integrals ``J0 = exp(-rho_y) int_0^y mu_0 h`` and
    ``JM = exp(rho_y) int_y^M mu_M h`` on every node."""
    hy = k.grid.hy
    rho = k.rho
    n = rho.shape[-1]
    g0 = k.mu0 * h
    gm = k.mu_m * h
    drho = np.diff(rho, axis=-1)  # nonnegative: rho increases with y

    # forward panel integrals are scaled to node p+1, backward ones to node p
    nodes, weights = panel_stencils(n)
    idx = np.arange(n - 1)
    rs = rho[:, nodes]
    w = hy * np.einsum(
        "kpm,pm->kp", g0[:, nodes] * np.exp(rs - rho[:, idx + 1][:, :, None]), weights
    )
    v = hy * np.einsum(
        "kpm,pm->kp", gm[:, nodes] * np.exp(rho[:, idx][:, :, None] - rs), weights
    )

    decay = np.exp(-drho)
    j0 = np.zeros(g0.shape, dtype=complex)
    acc = np.zeros(g0.shape[0], dtype=complex)
    for p in range(n - 1):
        acc = decay[:, p] * acc + w[:, p]
        j0[:, p + 1] = acc

    jm = np.zeros(g0.shape, dtype=complex)
    acc = np.zeros(g0.shape[0], dtype=complex)
    for p in range(n - 2, -1, -1):
        acc = decay[:, p] * acc + v[:, p]
        jm[:, p] = acc
    return j0, jm


def _zero_mode_solve(h, hy):
    # -f'' = h, f'(0) = 0, f(M) = 0  =>  f(y) = int_y^M int_0^z h
    inner = cumulative_panels(h, hy)
    outer = cumulative_panels(inner, hy)
    return outer[..., -1:] - outer


def ode_residual(xi, f, h, grid):
    """Maximal interior ``|i xi y f - f'' - h|`` per mode (sixth-order differences)."""
    f = np.atleast_2d(f)
    h = np.atleast_2d(h)
    xi = np.atleast_1d(xi)
    y = grid.y[3:-3]
    res = 1j * xi[:, None] * y[None, :] * f[:, 3:-3] - second_derivative(f, grid.hy) - h[:, 3:-3]
    return np.max(np.abs(res), axis=-1)


def apply_green(k, h_hat, check=True, rtol=1e-6):
    """Solve ``(i xi y - d_y^2) f = h`` with ``f'(0) = 0``, ``f(M) = 0`` for every mode.

    Parameters
    ----------
    k : ModeKernel
    h_hat : ndarray, shape (n_modes, n_y) or (n_y,) for a single mode
    check : bool
        Raise when the interior residual exceeds ``rtol * max(1, max|h|)``.

    Returns
    -------
    GreenApplyResult

    Raises
    ------
    ResidualTooLargeError
        The y grid does not resolve the forced mode.
    """
    single = np.ndim(h_hat) == 1
    h = np.atleast_2d(np.asarray(h_hat, dtype=complex))
    if h.shape != (k.n_modes, k.grid.n_y):
        raise ShapeError(f"forcing shape {h.shape} does not match kernel ({k.n_modes}, {k.grid.n_y})")
    if not np.all(np.isfinite(h)):
        raise NonFiniteError("forcing contains non-finite values")

    f = np.zeros_like(h)
    zero = k.xi == 0
    nz = ~zero
    if nz.any():
        sub = k.select(np.flatnonzero(nz))
        j0, jm = _scaled_sweeps(sub, h[nz])
        pref = math.pi * sub.s_m / sub.cube_root
        f[nz] = pref[:, None] * (sub.mu_m * j0 + sub.mu0 * jm)
        f[nz, -1] = 0.0
    if zero.any():
        f[zero] = _zero_mode_solve(h[zero], k.grid.hy)

    residual = ode_residual(k.xi, f, h, k.grid)
    if check:
        bound = rtol * np.maximum(1.0, np.max(np.abs(h), axis=-1))
        bad = np.flatnonzero(residual > bound)
        if bad.size:
            j = bad[0]
            raise ResidualTooLargeError(
                f"Green solve residual {residual[j]:.3e} exceeds {bound[j]:.3e} "
                f"at xi = {k.xi[j]:.6g} (mode {j}); refine the y grid"
            )
    if single:
        return GreenApplyResult(f[0], residual[0])
    return GreenApplyResult(f, residual)


def boundary_solution(xi, g_hat, grid, kernel=None):
    r"""Decaying solution of :math:`(i\xi y - \partial_y^2)\omega = 0` with
    :math:`\partial_y\omega(0) = \hat g`:

    .. math:: \hat\omega_b = \frac{\mathrm{Ai}(cy)}{\mathrm{Ai}'(0)\,c}\,\hat g.

    Parameters
    ----------
    xi : float or array_like
    g_hat : complex or array_like
        Neumann data, one value per frequency.
    grid : Grid
    kernel : ModeKernel, optional
        Precomputed profiles for the same frequencies.

    Returns
    -------
    ndarray
        Shape ``(n_y,)`` for scalar input, else ``(n_modes, n_y)``.  The
        ``xi = 0`` profile is zero.
    """
    single = np.ndim(xi) == 0
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    g = np.broadcast_to(np.asarray(g_hat, dtype=complex), xi.shape)
    if kernel is None:
        kernel = build_mode_kernel(xi, grid)
    out = np.zeros((xi.shape[0], grid.n_y), dtype=complex)
    nz = xi != 0
    if nz.any():
        c = kernel.cube_root[nz]
        out[nz] = kernel.ai_values()[nz] * (g[nz] / (AIP0 * c))[:, None]
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("boundary solution is not finite")
    return out[0] if single else out


def thomas_solve(lower, diag, upper, rhs):
    """Tridiagonal elimination, batched over leading axes.

    ``lower[i]`` multiplies ``x[i-1]`` and ``upper[i]`` multiplies ``x[i+1]``
    in row ``i`` (``lower[0]`` and ``upper[-1]`` are ignored).

    Raises
    ------
    SingularSystemError
        On an exactly zero pivot.
    """
    n = diag.shape[-1]
    cp = np.zeros(np.broadcast(diag, rhs).shape, dtype=complex)
    dp = np.zeros_like(cp)
    piv = diag[..., 0]
    if np.any(piv == 0):
        raise SingularSystemError("zero pivot in row 0")
    cp[..., 0] = upper[..., 0] / piv
    dp[..., 0] = rhs[..., 0] / piv
    for i in range(1, n):
        piv = diag[..., i] - lower[..., i] * cp[..., i - 1]
        if np.any(piv == 0):
            raise SingularSystemError(f"zero pivot in row {i}")
        if i < n - 1:
            cp[..., i] = upper[..., i] / piv
        dp[..., i] = (rhs[..., i] - lower[..., i] * dp[..., i - 1]) / piv
    x = np.zeros_like(dp)
    x[..., -1] = dp[..., -1]
    for i in range(n - 2, -1, -1):
        x[..., i] = dp[..., i] - cp[..., i] * x[..., i + 1]
    return x


def fd_oracle_solve(xi, h_hat, grid, neumann=0.0, top=0.0):
    """Second-order finite-difference solve of ``(i xi y - d_y^2) f = h``.

    Central differences in the interior, a ghost node for
    ``f'(0) = neumann`` and the Dirichlet value ``f(M) = top``.

    Parameters
    ----------
    xi : float
    h_hat : array_like, shape (n_y,)
    grid : Grid
    neumann, top : complex

    Returns
    -------
    ndarray, shape (n_y,)
    """
    h = np.asarray(h_hat, dtype=complex)
    n = grid.n_y
    if h.shape != (n,):
        raise ShapeError(f"expected ({n},), got {h.shape}")
    dy = grid.hy
    y = grid.y
    inv = 1.0 / dy**2
    diag = 1j * xi * y + 2.0 * inv + 0j
    lower = np.full(n, -inv, dtype=complex)
    upper = np.full(n, -inv, dtype=complex)
    rhs = h.copy()
    # ghost node f_{-1} = f_1 - 2 dy g folds into row 0
    upper[0] = -2.0 * inv
    rhs[0] = h[0] - 2.0 * neumann / dy
    # Dirichlet row at the top
    diag[-1] = 1.0
    lower[-1] = 0.0
    rhs[-1] = top
    return thomas_solve(lower, diag, upper, rhs)
