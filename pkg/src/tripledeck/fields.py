r"""
Physical reconstruction: the sublayer over the bump, the main and upper
decks, and the Blasius base profile.

The flat-strip unknowns map back over the bump through

.. math::

    y_* = y + F(x), \qquad u_* = y + u, \qquad v_* = v + (y + u) F'(x).

The main deck carries ``u~ = A U0'(y~)/lambda``, ``v~ = -A' U0(y~)/lambda``;
the upper deck is the harmonic extension
``p^ = e^{-|xi| y} |xi| A^ / lambda``, ``v^ = -e^{-|xi| y} i xi A^ / lambda``,
``u = -p``.
"""

from dataclasses import dataclass, field
import numpy as np

from .errors import ConvergenceError, DomainError, InvariantViolationError, ShapeError
from .grid import diff_y

__all__ = [
    "BlasiusProfile",
    "OuterLayers",
    "PhysicalSolution",
    "blasius_solve",
    "untransform",
    "outer_layers",
    "reconstruct",
    "transformed_continuity",
    "matching_error",
]


# ---------------------------------------------------------------- Blasius


def _blasius_rhs(s):
    f, fp, fpp = s
    return np.array([fp, fpp, -0.5 * f * fpp])


def _rk4(shear, eta):
    """Integrate ``f''' + f f''/2 = 0`` from the wall with ``f''(0) = shear``."""
    out = np.empty((eta.size, 3))
    s = np.array([0.0, 0.0, shear])
    out[0] = s
    for i in range(eta.size - 1):
        h = eta[i + 1] - eta[i]
        k1 = _blasius_rhs(s)
        k2 = _blasius_rhs(s + 0.5 * h * k1)
        k3 = _blasius_rhs(s + 0.5 * h * k2)
        k4 = _blasius_rhs(s + h * k3)
        s = s + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = s
    return out


@dataclass
class BlasiusProfile:
    """Blasius solution rescaled to wall slope ``lam``.

    Attributes
    ----------
    eta : ndarray
        Similarity variable.
    f, U, U_prime_eta : ndarray
        ``f``, ``f'`` and ``f''`` on ``eta``.
    wall_shear : float
        ``f''(0)`` before rescaling.
    lam : float
        Wall slope after rescaling, ``U0'(0)``.
    """

    eta: np.ndarray
    f: np.ndarray
    U: np.ndarray
    U_prime_eta: np.ndarray
    wall_shear: float
    lam: float = 1.0

    @property
    def y_tilde(self):
        """Main-deck coordinate with ``U0'(0) = lam``."""
        return self.eta * self.wall_shear / self.lam

    def _locate(self, y_tilde):
        eta = np.asarray(y_tilde, dtype=float) * self.lam / self.wall_shear
        if np.any(eta < 0):
            raise DomainError("y_tilde must be nonnegative")
        return eta

    def __call__(self, y_tilde):
        """``U0(y~)`` by cubic Hermite interpolation (1 beyond the table)."""
        eta = self._locate(y_tilde)
        return self._hermite(eta, self.U, self.U_prime_eta)

    def derivative(self, y_tilde):
        """``U0'(y~)``."""
        eta = self._locate(y_tilde)
        d = self._hermite(eta, self.U_prime_eta, self.f_third, outside=0.0)
        return d * self.lam / self.wall_shear

    @property
    def f_third(self):
        return -0.5 * self.f * self.U_prime_eta

    def _hermite(self, eta, v, dv, outside=1.0):
        e = self.eta
        k = np.clip(np.searchsorted(e, eta, side="right") - 1, 0, e.size - 2)
        h = e[k + 1] - e[k]
        t = (eta - e[k]) / h
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        val = h00 * v[k] + h10 * h * dv[k] + h01 * v[k + 1] + h11 * h * dv[k + 1]
        return np.where(eta > e[-1], outside, val)

    def near_wall_exponent(self, y_lo=0.05, y_hi=0.4, n=20):
        """Log-log slope of ``U0(y~) - lam y~`` over ``[y_lo, y_hi]``."""
        yy = np.geomspace(y_lo, y_hi, n)
        dev = np.abs(self(yy) - self.lam * yy)
        return float(np.polyfit(np.log(yy), np.log(dev), 1)[0])


def blasius_solve(eta_max=12.0, n=4000, lam=1.0, tol=1e-12, max_iter=50):
    """Shoot on ``f''(0)`` so that ``f'(eta_max) = 1``.

    Parameters
    ----------
    eta_max : float
        Outer edge, at least 10.
    n : int
        Number of RK4 steps, at least 100.
    lam : float
        Wall slope of the rescaled profile.

    Raises
    ------
    ConvergenceError
        When the secant iteration stalls.
    """
    if eta_max < 10 or n < 100:
        raise DomainError("need eta_max >= 10 and n >= 100")
    if lam <= 0:
        raise DomainError("lam must be positive")
    eta = np.linspace(0.0, eta_max, n + 1)

    def miss(s):
        return _rk4(s, eta)[-1, 1] - 1.0

    s0, s1 = 0.3, 0.35
    m0, m1 = miss(s0), miss(s1)
    for _ in range(max_iter):
        if m1 == m0:
            break
        s2 = s1 - m1 * (s1 - s0) / (m1 - m0)
        s0, m0 = s1, m1
        s1, m1 = s2, miss(s2)
        if abs(m1) < tol:
            sol = _rk4(s1, eta)
            return BlasiusProfile(eta, sol[:, 0], sol[:, 1], sol[:, 2], float(s1), lam)
    raise ConvergenceError(f"Blasius shooting did not converge (last miss {m1:.3e})")


# ---------------------------------------------------------------- sublayer


@dataclass
class PhysicalSolution:
    """Fields in the physical frame.

    ``y_star`` has the shape of the sublayer fields; ``main`` and ``upper``
    are filled by :func:`reconstruct`.
    """

    x: np.ndarray
    y: np.ndarray
    y_star: np.ndarray
    u_star: np.ndarray
    v_star: np.ndarray
    p_star: np.ndarray
    a_star: np.ndarray
    main: dict = field(default_factory=dict)
    upper: object = None
    blasius: BlasiusProfile = None
    checks: dict = field(default_factory=dict)


def untransform(state, f, noslip_tol=1e-8):
    """Undo the bump-flattening shift.

    Parameters
    ----------
    state : SolverState
        Provides ``u``, ``v``, ``p``, ``a`` on the flat strip.
    f : RoughnessProfile

    Returns
    -------
    PhysicalSolution

    Raises
    ------
    InvariantViolationError
        When ``u*`` or ``v*`` does not vanish on the bump.
    """
    grid = state.grid
    u, v = np.asarray(state.u), np.asarray(state.v)
    if u.shape != (grid.n_x, grid.n_y) or v.shape != u.shape:
        raise ShapeError("velocity fields do not match the grid")
    y = grid.y[None, :]
    fx = f.derivative[:, None]
    y_star = y + f.samples[:, None]
    u_star = y + u
    v_star = v + (y + u) * fx
    scale = max(1.0, float(np.max(np.abs(u_star))))
    slip = max(float(np.max(np.abs(u_star[:, 0]))), float(np.max(np.abs(v_star[:, 0])))) / scale
    if slip > noslip_tol:
        j = int(np.argmax(np.abs(u_star[:, 0]) + np.abs(v_star[:, 0])))
        raise InvariantViolationError(f"no-slip violated on the bump: {slip:.3e}", index=j)
    return PhysicalSolution(
        grid.x, grid.y, y_star, u_star, v_star, np.asarray(state.p), np.asarray(state.a),
        checks={"noslip": slip},
    )


def transformed_continuity(sol, grid, f, accuracy=6):
    r"""``max |d_{x*} u* + d_{y*} v*|`` relative to ``max |d_{x*} u*|``.

    Derivatives at fixed ``y*`` follow from the chain rule
    ``d_{x*} = d_x - F' d_y``, ``d_{y*} = d_y``.
    """
    fx = f.derivative[:, None]
    uy = grid.ifft(diff_y(grid.fft(sol.u_star), grid.hy, 1, accuracy))
    vy = grid.ifft(diff_y(grid.fft(sol.v_star), grid.hy, 1, accuracy))
    ux = grid.dx_spectral(sol.u_star - grid.y[None, :]) - fx * uy
    div = ux + vy
    scale = float(np.max(np.abs(ux)))
    return float(np.max(np.abs(div)) / scale) if scale > 0 else float(np.max(np.abs(div)))


def matching_error(state, f):
    """``max |I_M[omega] - (A + F)|`` relative to ``max |A + F|`` (and 1)."""
    grid = state.grid
    top = grid.integrate_high(state.omega)
    target = state.a + f.samples
    return float(np.max(np.abs(top - target)) / max(1e-300, float(np.max(np.abs(target)))))


# ---------------------------------------------------------------- outer decks


@dataclass
class OuterLayers:
    """Main- and upper-deck fields.

    ``main_u``, ``main_v`` have shape ``(n_x, len(y_tilde))``; ``upper_*``
    have shape ``(n_x, len(y_bar))``.
    """

    y_tilde: np.ndarray
    main_u: np.ndarray
    main_v: np.ndarray
    y_bar: np.ndarray
    upper_u: np.ndarray
    upper_v: np.ndarray
    upper_p: np.ndarray
    cauchy_riemann: np.ndarray


def _columns(op, arr):
    return np.stack([op(arr[:, i]) for i in range(arr.shape[1])], axis=1)


def _upper_modes(a_hat, xi, yb, lam):
    decay = np.exp(-np.abs(xi)[:, None] * yb[None, :])
    p = decay * (np.abs(xi) * a_hat)[:, None] / lam
    v = -decay * (1j * xi * a_hat)[:, None] / lam
    return p, v


def outer_layers(a, grid, y_bar_levels, y_tilde=None, blasius=None, lam=1.0):
    """Main and upper deck fields driven by a displacement.

    Parameters
    ----------
    a : ndarray, shape (n_x,)
        Displacement samples.
    grid : Grid
    y_bar_levels : sequence of float
        Upper-deck heights (nonnegative).
    y_tilde : sequence of float, optional
        Main-deck heights; defaults to 64 points on ``[0, 10]``.
    blasius : BlasiusProfile, optional
    lam : float

    Returns
    -------
    OuterLayers
        ``cauchy_riemann`` holds, per level, the larger of the two relative
        residuals ``d_x v + d_y p`` and ``d_x u + d_y v``; ``d_y`` is a
        fourth-order difference over a step much shorter than the smallest
        resolved wavelength.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (grid.n_x,):
        raise ShapeError(f"expected shape ({grid.n_x},), got {a.shape}")
    yb = np.asarray(y_bar_levels, dtype=float).ravel()
    if np.any(yb < 0):
        raise DomainError("upper-deck levels must be nonnegative")
    if blasius is None:
        blasius = blasius_solve(lam=lam)
    yt = np.linspace(0.0, 10.0, 64) if y_tilde is None else np.asarray(y_tilde, dtype=float)

    a_hat = grid.fft(a)
    a_hat[grid.nyquist] = 0.0
    a_x = grid.ifft(1j * grid.xi * a_hat)
    main_u = a[:, None] * blasius.derivative(yt)[None, :] / lam
    main_v = -a_x[:, None] * blasius(yt)[None, :] / lam

    xi = grid.xi
    p_hat, v_hat = _upper_modes(a_hat, xi, yb, lam)
    p = _columns(grid.ifft, p_hat)
    v = _columns(grid.ifft, v_hat)

    delta = 0.01 / max(float(np.max(np.abs(xi))), 1.0)
    offsets = np.array([-2, -1, 1, 2]) * delta
    coef = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * delta)
    dp = np.zeros_like(p)
    dv = np.zeros_like(v)
    for c, o in zip(coef, offsets):
        ph, vh = _upper_modes(a_hat, xi, yb + o, lam)
        dp += c * _columns(grid.ifft, ph)
        dv += c * _columns(grid.ifft, vh)
    vx = _columns(grid.dx_spectral, v)
    px = _columns(grid.dx_spectral, p)
    cr1 = np.max(np.abs(vx + dp), axis=0)
    cr2 = np.max(np.abs(-px + dv), axis=0)
    scale = max(float(np.max(np.abs(vx))), float(np.max(np.abs(px))), 1e-300)
    cr = np.maximum(cr1, cr2) / scale
    return OuterLayers(yt, main_u, main_v, yb, -p, v, p, cr)


def reconstruct(state, f, y_bar_levels=(0.0, 0.5, 1.0, 2.0), y_tilde=None, lam=1.0):
    """Sublayer, main deck and upper deck in one bundle."""
    sol = untransform(state, f)
    blasius = blasius_solve(lam=lam)
    outer = outer_layers(state.a, state.grid, y_bar_levels, y_tilde, blasius, lam)
    sol.main = {"y_tilde": outer.y_tilde, "u": outer.main_u, "v": outer.main_v}
    sol.upper = outer
    sol.blasius = blasius
    sol.checks["cauchy_riemann"] = float(np.max(outer.cauchy_riemann)) if outer.y_bar.size else 0.0
    sol.checks["continuity"] = transformed_continuity(sol, state.grid, f)
    sol.checks["matching"] = matching_error(state, f)
    return sol
