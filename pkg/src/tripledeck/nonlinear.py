r"""
Picard iteration for the perturbation ``(omega_bar, A_bar)`` about the linear
solution.

Each step freezes the transport term at the current total field,

.. math::

    y\partial_x\bar\omega_{k+1} - \partial_y^2\bar\omega_{k+1}
        = h_k = -(u\,\partial_x\omega + v\,\partial_y\omega)\big|_{\omega_0+\bar\omega_k},

and splits the new iterate into a forced part (Neumann-zero at the wall,
zero at ``y = M``) and a decaying boundary part carrying the wall flux
``d_x|d_x| A_bar``.  The displacement follows from the integral law,
``A_bar = m(D)^{-1} I_M[omega_bar_e]``.
"""

from dataclasses import dataclass, field
import logging
import math
import time
import warnings

import numpy as np

from .errors import (
    AliasWarning,
    DivergenceError,
    InvariantViolationError,
    ShapeError,
    TripleDeckError,
)
from .grid import diff_y, hilbert_pressure, integrate_y
from .kernel import apply_green, boundary_solution, build_mode_kernel, first_derivative_wall
from .linear import build_multiplier, solve_linear, sublayer_residual
from .norms import displacement_norm, vorticity_norms

__all__ = [
    "NonlinearTerm",
    "IterationState",
    "SolverOptions",
    "SolverState",
    "assemble_nonlinear",
    "iterate_once",
    "solve_nonlinear",
    "uniqueness_probe",
    "conservation_error",
]

log = logging.getLogger(__name__)

ALIAS_TAIL_LIMIT = 0.01


@dataclass
class NonlinearTerm:
    """Transport forcing and the velocities used to build it.

    Attributes
    ----------
    h : ndarray
        ``-(u w_x + v w_y)``, dealiased.
    u, v : ndarray
        ``u = I_y[w]``, ``v = V0 - y d_x A_M``.
    v0 : ndarray
        ``V0 = int_0^y int_z^M d_x w``.
    tail_fraction : float
        Energy fraction of the undealiased product in the discarded modes.
    continuity : float
        ``max |d_x u + d_y v|`` relative to ``max |d_x u|``.
    """

    h: np.ndarray
    u: np.ndarray
    v: np.ndarray
    v0: np.ndarray
    tail_fraction: float = 0.0
    continuity: float = 0.0


def _truncate(fh, keep):
    return fh * keep.reshape((-1,) + (1,) * (fh.ndim - 1))


def assemble_nonlinear(omega, a_m=None, grid=None, accuracy=6, warn=True, rule="panel6"):
    """Build ``h = -(u w_x + v w_y)`` for a total vorticity field.

    Parameters
    ----------
    omega : ndarray, shape (n_x, n_y)
        Real physical field.
    a_m : ndarray, optional
        ``u(x, M) = I_M[omega]``; computed from ``omega`` when omitted.
    grid : Grid
    accuracy : int
        Order of the y-derivative stencil.
    rule : {"panel6", "simpson"}
        Cumulative y-integration rule for ``u`` and ``V0``.

    Returns
    -------
    NonlinearTerm

    Warns
    -----
    AliasWarning
        When more than 1% of the product energy sits in the discarded modes.
    """
    omega = np.asarray(omega)
    if np.iscomplexobj(omega):
        raise ShapeError("omega must be a real physical field")
    if omega.shape != (grid.n_x, grid.n_y):
        raise ShapeError(f"expected shape ({grid.n_x}, {grid.n_y}), got {omega.shape}")
    if a_m is None:
        a_m = grid.integrate_high(omega)
    a_m = np.asarray(a_m, dtype=float)
    if a_m.shape != (grid.n_x,):
        raise ShapeError(f"expected A_M shape ({grid.n_x},), got {a_m.shape}")

    keep = grid.dealias_mask()
    dx_sym = grid.symbol(0, signed=True)
    y = grid.y

    w_hat = grid.fft(omega)
    wx_hat = dx_sym[:, None] * w_hat
    wy_hat = diff_y(w_hat, grid.hy, 1, accuracy)
    u_hat = integrate_y(w_hat, grid, rule=rule)
    # V0 = int_0^y (d_x A_M - d_x I_z[w]) dz
    inner = (dx_sym * grid.fft(a_m))[:, None] - dx_sym[:, None] * u_hat
    v0_hat = integrate_y(inner, grid, rule=rule)
    am_x_hat = dx_sym * grid.fft(a_m)
    v_hat = v0_hat - y[None, :] * am_x_hat[:, None]

    raw = -(grid.ifft(u_hat) * grid.ifft(wx_hat) + grid.ifft(v_hat) * grid.ifft(wy_hat))
    raw_hat = grid.fft(raw)
    total = float(np.sum(np.abs(raw_hat) ** 2))
    tail = float(np.sum(np.abs(raw_hat[~keep]) ** 2)) / total if total > 0 else 0.0
    if warn and tail > ALIAS_TAIL_LIMIT:
        warnings.warn(
            f"{100 * tail:.2f}% of the nonlinear term's energy lies in dealiased modes; "
            "refine n_x",
            AliasWarning,
            stacklevel=2,
        )

    u = grid.ifft(_truncate(u_hat, keep))
    v = grid.ifft(_truncate(v_hat, keep))
    prod = u * grid.ifft(_truncate(wx_hat, keep)) + v * grid.ifft(_truncate(wy_hat, keep))
    h = -grid.ifft(_truncate(grid.fft(prod), keep))

    div = dx_sym[:, None] * u_hat + diff_y(v_hat, grid.hy, 1, accuracy)
    ux = np.max(np.abs(dx_sym[:, None] * u_hat))
    continuity = float(np.max(np.abs(div)) / ux) if ux > 0 else 0.0
    return NonlinearTerm(
        h, grid.ifft(u_hat), grid.ifft(v_hat), grid.ifft(v0_hat), tail, continuity
    )


def conservation_error(omega, grid, accuracy=6):
    r"""Check that the x-mean of ``h`` is a pure y-flux.

    With ``d_x u + d_y v = 0`` the transport term is
    ``-(d_x(u w) + d_y(v w))``, so its mean mode equals ``-d_y`` of the mean
    of ``v w``.  Returns the maximum discrepancy relative to ``max |h|``.
    """
    term = assemble_nonlinear(omega, grid=grid, accuracy=accuracy, warn=False)
    keep = grid.dealias_mask()
    w = grid.ifft(_truncate(grid.fft(np.asarray(omega, dtype=float)), keep))
    flux = np.mean(term.v * w, axis=0)
    mean_h = np.mean(term.h, axis=0)
    dflux = diff_y(flux, grid.hy, 1, accuracy)
    scale = float(np.max(np.abs(term.h)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(mean_h + dflux)) / scale)


@dataclass
class SolverOptions:
    """Iteration controls.

    Attributes
    ----------
    tol : float
        Stop when the increment falls below ``tol`` times the first increment.
    max_iter : int
    alpha, epsilon : float
        Norm index and the exponent in the smallness diagnostic.
    damping : float
        Relaxation weight on the new iterate; 1 is plain Picard.
    law_tol : float
        Tolerance for the wall and integral laws at every iterate.
    abs_floor : float
        Increments below ``abs_floor`` times the linear-solution norm count
        as converged (round-off floor).
    """

    tol: float = 1e-8
    max_iter: int = 50
    alpha: float = 1.0
    epsilon: float = 1.0 / 6.0
    damping: float = 1.0
    law_tol: float = 1e-6
    abs_floor: float = 1e-13
    diverge_after: int = 3


@dataclass
class IterationState:
    """Current perturbation and its history.

    ``omega_bar`` and ``a_bar_hat`` are mode arrays; ``history`` rows are
    ``(k, increment, residual, wall_time)``.
    """

    k: int
    omega_bar: np.ndarray
    a_bar_hat: np.ndarray
    increment_norms: list = field(default_factory=list)
    residual: float = math.nan
    history: list = field(default_factory=list)
    laws: dict = field(default_factory=dict)

    def omega_total_hat(self, linear):
        return linear.omega0.modes + self.omega_bar

    def a_total_hat(self, linear):
        return linear.a0_hat + self.a_bar_hat


def _pair_norm(omega_hat, a_hat, grid, alpha):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        b = vorticity_norms(grid.ifft(omega_hat), alpha, grid)
    return b.x0 + b.x_alpha + displacement_norm(grid.ifft(a_hat), alpha, grid)


def _check_laws(grid, omega_hat, a_hat, tol):
    g = grid.symbol(1.0, signed=True) * a_hat
    scale = max(float(np.max(np.abs(omega_hat))) if omega_hat.size else 0.0, 1e-300)
    wall = np.abs(first_derivative_wall(omega_hat, grid.hy) - g) / max(
        float(np.max(np.abs(g))), scale
    )
    integral = np.abs(grid.integrate_high(omega_hat) - a_hat) / max(
        float(np.max(np.abs(a_hat))), scale * grid.m_height
    )
    if not np.any(omega_hat) and not np.any(a_hat):
        return {"wall_law_error": 0.0, "integral_law_error": 0.0}
    for name, err in (("wall law", wall), ("integral law", integral)):
        j = int(np.argmax(err))
        if err[j] > tol:
            raise InvariantViolationError(
                f"{name} violated by the perturbation: relative error {err[j]:.3e} > {tol:g} "
                f"at mode {j} (xi = {grid.xi[j]:.6g})",
                index=j,
            )
    return {"wall_law_error": float(np.max(wall)), "integral_law_error": float(np.max(integral))}


def full_residual(omega_hat, grid):
    """Relative residual of ``y w_x - w_yy + u w_x + v w_y = 0`` for a total field."""
    omega = grid.ifft(omega_hat)
    if not np.any(omega):
        return 0.0
    term = assemble_nonlinear(omega, grid=grid, warn=False)
    res, scale = sublayer_residual(omega, grid, u=term.u, v=term.v)
    return float(np.max(np.abs(res)) / scale) if scale > 0 else 0.0


def iterate_once(state, linear, table, grid, kernel, opts=None):
    """One Picard step ``(omega_bar_k, A_bar_k) -> (omega_bar_{k+1}, A_bar_{k+1})``.

    Parameters
    ----------
    state : IterationState
    linear : LinearSolution
    table : MultiplierTable
    grid : Grid
    kernel : ModeKernel
        Profiles for every grid mode.
    opts : SolverOptions, optional

    Returns
    -------
    IterationState
        With the new increment and full-system residual appended.

    Raises
    ------
    InvariantViolationError
        If the new iterate breaks the wall or integral law.
    """
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    omega_tot = state.omega_total_hat(linear)
    term = assemble_nonlinear(grid.ifft(omega_tot), grid=grid)
    h_hat = grid.fft(term.h)
    h_hat[grid.nyquist] = 0.0

    forced = apply_green(kernel, h_hat).f_hat
    a_new = grid.integrate_high(forced) / table.m
    a_new[grid.nyquist] = 0.0
    g = grid.symbol(1.0, signed=True) * a_new
    omega_new = forced + boundary_solution(grid.xi, g, grid, kernel=kernel)
    omega_new[grid.nyquist] = 0.0

    theta = opts.damping
    if theta != 1.0:
        omega_new = theta * omega_new + (1.0 - theta) * state.omega_bar
        a_new = theta * a_new + (1.0 - theta) * state.a_bar_hat

    laws = _check_laws(grid, omega_new, a_new, opts.law_tol)
    inc = _pair_norm(omega_new - state.omega_bar, a_new - state.a_bar_hat, grid, opts.alpha)
    residual = full_residual(linear.omega0.modes + omega_new, grid)
    laws["alias_tail_fraction"] = term.tail_fraction
    laws["continuity"] = term.continuity
    k = state.k + 1
    row = (k, inc, residual, time.perf_counter() - t0)
    log.debug("iteration %d: increment %.3e residual %.3e", k, inc, residual)
    return IterationState(
        k, omega_new, a_new, state.increment_norms + [inc], residual, state.history + [row], laws
    )


@dataclass
class SolverState:
    """Converged (or last) total solution and its diagnostics."""

    grid: object
    roughness: object
    linear: object
    iteration: IterationState
    converged: bool
    omega: np.ndarray
    a: np.ndarray
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def history(self):
        return self.iteration.history

    @property
    def omega_bar(self):
        return self.grid.ifft(self.iteration.omega_bar)

    @property
    def a_bar(self):
        return self.grid.ifft(self.iteration.a_bar_hat)


def _smallness(f, grid, eps):
    return f.h2_norm * grid.m_height ** ((5.0 + 3.0 * eps) / 2.0)


def solve_nonlinear(f, grid, opts=None, table=None, kernel=None, linear=None, initial=None):
    r"""Run the Picard iteration to convergence.

    Parameters
    ----------
    f : RoughnessProfile
    grid : Grid
    opts : SolverOptions or dict, optional
    table, kernel, linear : optional
        Reused when supplied.
    initial : tuple of ndarray, optional
        ``(omega_bar_hat, a_bar_hat)`` starting perturbation; zero by default.

    Returns
    -------
    SolverState

    Raises
    ------
    DivergenceError
        When the increment grows ``diverge_after`` times in a row.  The
        reported margin is ``||F||_{H^2} M^{(5+3 eps)/2}``, the quantity the
        existence theory needs to be small.
    """
    if isinstance(opts, dict):
        opts = SolverOptions(**opts)
    opts = opts or SolverOptions()
    if table is None:
        table = build_multiplier(grid)
    if kernel is None:
        kernel = build_mode_kernel(grid.xi, grid)
    if linear is None:
        linear = solve_linear(f, grid, table, kernel=kernel)

    if initial is None:
        start = (np.zeros((grid.n_x, grid.n_y), complex), np.zeros(grid.n_x, complex))
    else:
        start = (np.asarray(initial[0], complex), np.asarray(initial[1], complex))
    state = IterationState(0, start[0], start[1])
    margin = _smallness(f, grid, opts.epsilon)
    lin_norm = _pair_norm(linear.omega0.modes, linear.a0_hat, grid, opts.alpha)
    floor = opts.abs_floor * lin_norm

    converged = False
    ref = None
    rises = 0
    if lin_norm == 0.0 and not np.any(start[0]) and not np.any(start[1]):
        converged = True
        state.residual = 0.0
    while not converged and state.k < opts.max_iter:
        prev = state.increment_norms[-1] if state.increment_norms else None
        state = iterate_once(state, linear, table, grid, kernel, opts)
        inc = state.increment_norms[-1]
        if ref is None:
            ref = inc
        if inc <= opts.tol * ref or inc <= floor:
            converged = True
            break
        rises = rises + 1 if prev is not None and inc > prev else 0
        if rises >= opts.diverge_after:
            raise DivergenceError(
                f"increments grew {rises} times in a row (last {inc:.3e}); "
                f"smallness margin ||F||_H2 M^((5+3eps)/2) = {margin:.3e}",
                history=list(state.history),
                margin=margin,
            )

    omega_hat = linear.omega0.modes + state.omega_bar
    a_hat = linear.a0_hat + state.a_bar_hat
    omega = grid.ifft(omega_hat)
    a = grid.ifft(a_hat)
    u, v = _velocities(omega, grid)
    p = hilbert_pressure(a, grid)

    pert = _pair_norm(state.omega_bar, state.a_bar_hat, grid, opts.alpha)
    f2 = f.h2_norm**2
    ratios = state.increment_norms
    diag = {
        "iterations": state.k,
        "converged": converged,
        "final_increment": ratios[-1] if ratios else 0.0,
        "residual": float(state.residual) if state.k else full_residual(omega_hat, grid),
        "increment_ratios": [b / a for a, b in zip(ratios, ratios[1:]) if a > 0],
        "perturbation_norm": pert,
        "linear_norm": lin_norm,
        "a_bar_max": float(np.max(np.abs(grid.ifft(state.a_bar_hat)))),
        "f_h2": f.h2_norm,
        "smallness_margin": margin,
        "perturbation_bound_ratio": pert / (grid.m_height ** ((5 + 3 * opts.epsilon) / 2) * f2)
        if f2 > 0
        else 0.0,
        "upstream_decay": _upstream_decay(u, grid),
    }
    diag.update(state.laws)
    return SolverState(grid, f, linear, state, converged, omega, a, u, v, p, diag)


def _velocities(omega, grid):
    u = integrate_y(omega, grid, rule="panel6")
    v = -grid.dx_spectral(integrate_y(u, grid, rule="panel6"))
    return u, v


def _upstream_decay(u, grid):
    peak = float(np.max(np.abs(u)))
    if peak == 0.0:
        return 0.0
    edge = np.abs(grid.x) >= 0.95 * grid.L
    return float(np.max(np.abs(u[edge]))) / peak


def _random_start(grid, scale, alpha, rng, n_modes=8):
    """Smooth random perturbation with ``X0 + X_alpha`` norm ``scale``."""
    y = grid.y
    omega_hat = np.zeros((grid.n_x, grid.n_y), complex)
    for j in range(1, n_modes + 1):
        c = rng.normal(size=2) @ np.array([1.0, 1j])
        prof = np.exp(-y * rng.uniform(0.5, 2.0)) * (1.0 + rng.normal() * y)
        omega_hat[j] = c * prof
        omega_hat[-j] = np.conj(omega_hat[j])
    omega_hat *= grid.n_x * grid.dx
    a_hat = np.zeros(grid.n_x, complex)
    norm = _pair_norm(omega_hat, a_hat, grid, alpha)
    return omega_hat * (scale / norm), a_hat


def uniqueness_probe(f, grid, n_starts, seed=0, opts=None, base=None, table=None, kernel=None):
    """Restart the iteration from random perturbations and compare the limits.

    Parameters
    ----------
    f : RoughnessProfile
    grid : Grid
    n_starts : int
    seed : int
    opts : SolverOptions, optional
    base : SolverState, optional
        Converged zero-start solution; computed when omitted.

    Returns
    -------
    dict
        ``starts`` (per-start convergence, iterations, distance to the base
        limit), ``max_pairwise_distance`` in the ``X0 + X_alpha`` norm, and
        ``all_converged``.
    """
    if n_starts <= 0:
        return {"starts": [], "max_pairwise_distance": 0.0, "all_converged": True}
    if isinstance(opts, dict):
        opts = SolverOptions(**opts)
    opts = opts or SolverOptions()
    table = table or build_multiplier(grid)
    kernel = kernel or build_mode_kernel(grid.xi, grid)
    if base is None:
        base = solve_nonlinear(f, grid, opts, table=table, kernel=kernel)
    scale = _pair_norm(grid.fft(base.omega), grid.fft(base.a), grid, opts.alpha)
    if scale == 0.0:
        scale = 1e-3
    rng = np.random.default_rng(seed)
    limits = [base.iteration.omega_bar]
    starts = []
    for i in range(n_starts):
        init = _random_start(grid, scale, opts.alpha, rng)
        try:
            st = solve_nonlinear(
                f, grid, opts, table=table, kernel=kernel, linear=base.linear, initial=init
            )
            ok = st.converged
            if ok:
                limits.append(st.iteration.omega_bar)
            dist = _pair_norm(st.iteration.omega_bar - base.iteration.omega_bar,
                              st.iteration.a_bar_hat - base.iteration.a_bar_hat, grid, opts.alpha)
            starts.append({"start": i, "converged": ok, "iterations": st.iteration.k,
                           "distance_to_base": dist})
        except TripleDeckError as exc:
            starts.append({"start": i, "converged": False, "iterations": None,
                           "distance_to_base": None, "error": str(exc)})
    dmax = 0.0
    for i in range(len(limits)):
        for j in range(i + 1, len(limits)):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                b = vorticity_norms(grid.ifft(limits[i] - limits[j]), opts.alpha, grid)
            dmax = max(dmax, b.x0 + b.x_alpha)
    return {
        "starts": starts,
        "max_pairwise_distance": dmax,
        "all_converged": all(s["converged"] for s in starts),
        "start_scale": scale,
    }
