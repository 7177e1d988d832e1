"""Independent reference computations used by the tests.

Nothing here imports the package's numerical core; each oracle relies on
scipy, mpmath or a closed form.
"""

import math

import mpmath
import numpy as np
from scipy import integrate, optimize, sparse, special
from scipy.sparse.linalg import spsolve


def airy_reference(z):
    """Unscaled ``Ai, Ai', Bi, Bi'`` at one complex point via mpmath."""
    z = mpmath.mpc(z)
    return tuple(
        complex(v)
        for v in (mpmath.airyai(z), mpmath.airyai(z, 1), mpmath.airybi(z), mpmath.airybi(z, 1))
    )


def airy_scipy(z):
    """Unscaled ``Ai, Ai', Bi, Bi'`` from scipy (moderate ``|z|`` only)."""
    ai, aip, bi, bip = special.airy(np.asarray(z, dtype=complex))
    return ai, aip, bi, bip


def fd_green(xi, h, m_height, n_y):
    """Second-order solve of ``(i xi y - d_y^2) f = h``, ``f'(0) = 0``, ``f(M) = 0``.

    Sparse direct solve with a ghost node at the wall.
    """
    y = np.linspace(0.0, m_height, n_y)
    dy = y[1] - y[0]
    n = n_y - 1
    main = 2.0 / dy**2 + 1j * xi * y[:n]
    off = -np.ones(n - 1) / dy**2
    upper = off.copy().astype(complex)
    upper[0] = -2.0 / dy**2
    mat = sparse.diags([off.astype(complex), main, upper], [-1, 0, 1], format="csc")
    f = np.zeros(n_y, dtype=complex)
    f[:n] = spsolve(mat, np.asarray(h, dtype=complex)[:n])
    return f


def periodic_hilbert_pressure(a_prime, a_second, x, half_period):
    r"""``P(x) = (1/2L) PV int_{-L}^{L} A'(s) cot(pi (x - s) / 2L) ds``.

    The principal value is removed by subtracting ``A'(x)`` (the cotangent
    integrates to zero over a period); the remaining integrand is smooth.
    """
    L = half_period
    k = math.pi / (2 * L)

    def integrand(s):
        d = x - s
        if abs(d) < 1e-9:
            return -a_second(x) / k
        return (a_prime(s) - a_prime(x)) / math.tan(k * d)

    pieces = sorted({-L, L, x})
    total = 0.0
    for lo, hi in zip(pieces, pieces[1:]):
        total += integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
    return total / (2 * L)


def blasius_reference(eta_max=15.0):
    """``f''(0)`` of the Blasius equation by DOP853 shooting and Brent's method."""

    def rhs(_, s):
        return [s[1], s[2], -0.5 * s[0] * s[2]]

    def miss(shear):
        sol = integrate.solve_ivp(rhs, (0, eta_max), [0, 0, shear], method="DOP853",
                                  rtol=1e-12, atol=1e-14)
        return sol.y[1, -1] - 1.0

    return optimize.brentq(miss, 0.2, 0.5, xtol=1e-14)


def single_mode_seminorm(k, power, weight_integral, half_period):
    """``|| |d_x|^power sin(kx) g(y) ||`` on a ``2L`` window given ``int w^2 g^2``."""
    return k**power * math.sqrt(half_period * weight_integral)
