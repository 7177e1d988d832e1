r"""
Complex Airy functions on the sector :math:`|\arg z| \le \pi/3`.

Values are stored with exponential scaling so that nothing overflows for
large arguments.  With :math:`\zeta = \tfrac23 z^{3/2}` (principal branch)
and :math:`r = \mathrm{Re}\,\zeta`, the stored quantities are

.. math::

    e^{r}\,\mathrm{Ai}(z),\quad e^{r}\,\mathrm{Ai}'(z),\quad
    e^{-r}\,\mathrm{Bi}(z),\quad e^{-r}\,\mathrm{Bi}'(z).

``Ai`` is evaluated on the wider sector :math:`|\arg z| \le 2\pi/3` by one
of three routes:

* the Maclaurin series where its cancellation loss is small,
* the asymptotic expansion (smallest-term truncation) for :math:`|z| \ge 9`,
* Taylor continuation of the Airy ODE inward along the ray from
  :math:`|z| = 9` in the intermediate region where the series cancels badly.

``Bi`` on :math:`|\arg z| \le \pi/3` then follows from the connection
formulas :math:`\mathrm{Bi}(z) = \pm i\,\mathrm{Ai}(z) + 2e^{\mp i\pi/6}
\mathrm{Ai}(z e^{\mp 2\pi i/3})`, which involve only scaled ``Ai`` values.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConvergenceError, DomainError, NonFiniteError

__all__ = [
    "AI0",
    "AIP0",
    "BI0",
    "BIP0",
    "AirySample",
    "SectorPoint",
    "eval_airy",
    "airy_ai_scaled",
    "airy_antiderivative",
    "ray_antiderivative",
    "t_function",
    "bessel_j",
    "bessel_j_zeros",
    "zero_ray_check",
    "wronskian",
    "c_function",
    "refine_zero",
    "selftest",
]

SQRT3 = math.sqrt(3.0)
AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
BI0 = SQRT3 * AI0
BIP0 = -SQRT3 * AIP0

ASYMPTOTIC_RADIUS = 9.0
SECTOR_SLACK = 0.01
_SERIES_LOSS = 7.0
_ASYM_TERMS = 20
_TAYLOR_STEP = 0.5
_TAYLOR_TERMS = 32
_SQRT_PI = math.sqrt(math.pi)


def _asymptotic_coefficients(n):
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        u[k] = math.exp(
            math.lgamma(3 * k + 0.5)
            - k * math.log(54.0)
            - math.lgamma(k + 1)
            - math.lgamma(k + 0.5)
        )
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _asymptotic_coefficients(_ASYM_TERMS)


@dataclass(frozen=True)
class AirySample:
    """Scaled Airy values at one point or an array of points.

    Attributes
    ----------
    z : complex or ndarray
        Argument(s).
    ai, ai_prime : complex or ndarray
        ``exp(+scale_exp) * Ai(z)`` and the same for ``Ai'``.
    bi, bi_prime : complex or ndarray
        ``exp(-scale_exp) * Bi(z)`` and the same for ``Bi'``.
    scale_exp : float or ndarray
        ``Re(2/3 z**1.5)``.
    """

    z: complex
    ai: complex
    bi: complex
    ai_prime: complex
    bi_prime: complex
    scale_exp: float

    def unscaled(self):
        """Return the true ``(Ai, Ai', Bi, Bi')`` (may overflow for large ``|z|``)."""
        down = np.exp(-np.asarray(self.scale_exp))
        up = np.exp(np.asarray(self.scale_exp))
        return (self.ai * down, self.ai_prime * down, self.bi * up, self.bi_prime * up)


@dataclass(frozen=True)
class SectorPoint:
    """A point of the closed sector in polar form."""

    modulus: float
    arg: float

    def __post_init__(self):
        if not (math.isfinite(self.modulus) and self.modulus >= 0):
            raise DomainError(f"modulus must be finite and nonnegative, got {self.modulus}")
        if abs(self.arg) > math.pi / 3 + 1e-12:
            raise DomainError(f"arg {self.arg} outside [-pi/3, pi/3]")

    @property
    def z(self):
        return self.modulus * complex(math.cos(self.arg), math.sin(self.arg))


def _zeta_re(z):
    return np.real((2.0 / 3.0) * z**1.5)


def _series(z):
    """Unscaled Maclaurin evaluation of Ai and Ai'."""
    z = np.asarray(z, dtype=complex)
    z3 = z**3
    f = np.ones_like(z)
    fp = np.zeros_like(z)
    g = z.copy()
    gp = np.ones_like(z)
    tf = np.ones_like(z)
    tfp = z**2 / 2.0
    tg = z.copy()
    tgp = np.ones_like(z)
    fp = fp + tfp
    for k in range(1, 200):
        tf = tf * z3 / ((3 * k - 1) * (3 * k))
        tg = tg * z3 / ((3 * k) * (3 * k + 1))
        tgp = tgp * z3 / ((3 * k) * (3 * k - 2))
        f = f + tf
        g = g + tg
        gp = gp + tgp
        if k > 1:
            tfp = tfp * z3 / ((3 * k - 3) * (3 * k - 1))
            fp = fp + tfp
        size = np.abs(tf) + np.abs(tg) + np.abs(tgp) + np.abs(tfp)
        ref = np.abs(f) + np.abs(g) + np.abs(gp) + np.abs(fp)
        if k > 2 and np.all(size <= 1e-17 * ref):
            break
    ai = AI0 * f + AIP0 * g
    aip = AI0 * fp + AIP0 * gp
    return ai, aip


def _asymptotic_scaled(z):
    """Scaled Ai and Ai' from the large-argument expansion."""
    z = np.asarray(z, dtype=complex)
    zeta = (2.0 / 3.0) * z**1.5
    w = -1.0 / zeta
    s = np.ones_like(z)
    t = np.ones_like(z)
    term_u = np.ones_like(z)
    term_v = np.ones_like(z)
    last = np.ones(z.shape)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, _ASYM_TERMS):
        term_u = (_U[k] / _U[k - 1]) * term_u * w
        term_v = (_V[k] / _V[k - 1]) * term_v * w if k > 1 else _V[1] * w * np.ones_like(z)
        size = np.abs(term_u)
        active &= size < last
        s = np.where(active, s + term_u, s)
        t = np.where(active, t + term_v, t)
        last = np.where(active, size, last)
        if not active.any():
            break
    phase = np.exp(-1j * np.imag(zeta))
    quarter = z**0.25
    ai = phase * s / (2.0 * _SQRT_PI * quarter)
    aip = -phase * t * quarter / (2.0 * _SQRT_PI)
    return ai, aip


def _taylor_inward(z):
    """Unscaled Ai, Ai' by integrating w'' = z w inward from radius 9 along the ray."""
    z = np.asarray(z, dtype=complex)
    start = ASYMPTOTIC_RADIUS * z / np.abs(z)
    eai, eaip = _asymptotic_scaled(start)
    down = np.exp(-_zeta_re(start))
    w, wp = eai * down, eaip * down
    n_steps = max(1, int(np.ceil(np.max(np.abs(z - start)) / _TAYLOR_STEP)))
    h = (z - start) / n_steps
    z0 = start
    for _ in range(n_steps):
        c_prev2 = w
        c_prev1 = wp * h
        c = z0 * w * h**2 / 2.0
        val = c_prev2 + c_prev1 + c
        der = c_prev1 + 2.0 * c
        # c_n holds b_n h^n for the local expansion about z0
        cm1, c0, c1 = c_prev2, c_prev1, c
        for n in range(1, _TAYLOR_TERMS):
            c2 = h**2 * (z0 * c0 + h * cm1) / ((n + 2) * (n + 1))
            val = val + c2
            der = der + (n + 2) * c2
            cm1, c0, c1 = c0, c1, c2
        w = val
        wp = der / h
        z0 = z0 + h
    return w, wp


def airy_ai_scaled(z):
    """Scaled ``Ai`` and ``Ai'`` for ``|arg z| <= 2*pi/3``.

    Parameters
    ----------
    z : array_like of complex

    Returns
    -------
    eai, eaip : ndarray
        ``exp(r) Ai(z)`` and ``exp(r) Ai'(z)`` with ``r = Re(2/3 z**1.5)``.
    r : ndarray
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    r = _zeta_re(z)
    mod = np.abs(z)
    eai = np.empty_like(z)
    eaip = np.empty_like(z)

    asym = mod >= ASYMPTOTIC_RADIUS
    loss = (2.0 / 3.0) * mod**1.5 + r
    ser = ~asym & (loss <= _SERIES_LOSS)
    mid = ~asym & ~ser

    if asym.any():
        eai[asym], eaip[asym] = _asymptotic_scaled(z[asym])
    if ser.any():
        a, ap = _series(z[ser])
        up = np.exp(r[ser])
        eai[ser], eaip[ser] = a * up, ap * up
    if mid.any():
        a, ap = _taylor_inward(z[mid])
        up = np.exp(r[mid])
        eai[mid], eaip[mid] = a * up, ap * up
    return eai, eaip, r


def _check_sector(z, limit):
    if not np.all(np.isfinite(z)):
        raise NonFiniteError("Airy argument is not finite")
    arg = np.angle(z)
    bad = (np.abs(arg) > limit + SECTOR_SLACK) & (z != 0)
    if bad.any():
        first = z[bad].flat[0]
        raise DomainError(f"argument {first} outside |arg z| <= {limit:.6f}")


def eval_airy(z):
    """Evaluate scaled ``Ai, Bi, Ai', Bi'`` on the sector ``|arg z| <= pi/3``.

    Parameters
    ----------
    z : complex or array_like of complex
        ``|arg z| <= pi/3 + 0.01`` and ``|z| <= 1e6``.

    Returns
    -------
    AirySample
        Scalar fields for scalar input, arrays otherwise.

    Raises
    ------
    DomainError
        If any argument lies outside the sector.
    NonFiniteError
        If any argument is NaN or infinite, or a result overflows.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_sector(zz, math.pi / 3)
    if np.any(np.abs(zz) > 1e6):
        raise DomainError("|z| must not exceed 1e6")

    # work in the closed upper half plane; the lower half follows by conjugation
    lower = zz.imag < 0
    real = zz.imag == 0
    zu = np.where(lower, zz.conj(), zz)
    eai, eaip, r = airy_ai_scaled(zu)

    rot = np.exp(-2j * math.pi / 3)
    # at the rotated point Re(zeta) = -r, so its scaled Ai equals exp(-r) Ai(z rot)
    rai, raip, _ = airy_ai_scaled(zu * rot)
    with np.errstate(over="ignore", invalid="ignore"):
        damp = np.exp(-2.0 * r)
        ebi = 1j * eai * damp + 2.0 * np.exp(-1j * math.pi / 6) * rai
        ebip = 1j * eaip * damp + 2.0 * np.exp(-1j * math.pi / 6) * rot * raip

    out = []
    for v in (eai, ebi, eaip, ebip):
        v = np.where(lower, v.conj(), v)
        out.append(np.where(real, v.real + 0j, v))
    eai, ebi, eaip, ebip = out
    if not all(np.all(np.isfinite(v)) for v in out):
        raise NonFiniteError("Airy evaluation overflowed")
    if scalar:
        return AirySample(
            complex(zz[0]), complex(eai[0]), complex(ebi[0]),
            complex(eaip[0]), complex(ebip[0]), float(r[0]),
        )
    shape = np.shape(z)
    return AirySample(
        zz.reshape(shape), eai.reshape(shape), ebi.reshape(shape),
        eaip.reshape(shape), ebip.reshape(shape), r.reshape(shape),
    )


def wronskian(sample):
    """``Ai Bi' - Ai' Bi`` from a scaled sample (the scale factors cancel)."""
    return sample.ai * sample.bi_prime - sample.ai_prime * sample.bi


def t_function(z):
    r"""Return :math:`t(z) = \mathrm{Ai}(z)/\mathrm{Bi}(z) + 1/\sqrt3`.

    Computed from scaled values, so large ``|z|`` is safe; ``t -> 1/sqrt(3)``
    as ``|z| -> inf`` in the sector.

    Raises
    ------
    DomainError
        Outside ``|arg z| <= pi/3``.
    """
    scalar = np.ndim(z) == 0
    smp = eval_airy(z)
    r = np.asarray(smp.scale_exp)
    with np.errstate(under="ignore"):
        t = np.asarray(smp.ai) / np.asarray(smp.bi) * np.exp(-2.0 * r) + 1.0 / SQRT3
    return complex(t) if scalar else t


# Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_GL10_X, _GL10_W = np.polynomial.legendre.leggauss(10)
_GL10_X = 0.5 * (_GL10_X + 1.0)
_GL10_W = 0.5 * _GL10_W


def _ai_unscaled(z):
    eai, _, r = airy_ai_scaled(z)
    with np.errstate(under="ignore"):
        return eai * np.exp(-r)


def _antiderivative_one(z, rtol):
    if z == 0:
        return 0j
    mod = abs(z)
    direction = z / mod
    decay = math.cos(1.5 * math.atan2(z.imag, z.real))
    if decay > 0:
        # beyond this radius |Ai| < 1e-300 and the remaining panels add nothing
        mod_eff = min(mod, (1.5 * 700.0 / decay) ** (2.0 / 3.0))
    else:
        mod_eff = mod
    n0 = max(1, int(math.ceil(mod_eff)))
    stack = [(mod_eff * i / n0, mod_eff * (i + 1) / n0) for i in range(n0)]
    total = 0j
    pieces = []
    depth = 0
    while stack:
        a, b = stack.pop()
        width = b - a
        pts = direction * (a + width * _GL_X)
        vals = _ai_unscaled(pts)
        fine = width * np.dot(_GL_W, vals)
        coarse = width * np.dot(_GL10_W, _ai_unscaled(direction * (a + width * _GL10_X)))
        if abs(fine - coarse) <= max(rtol * abs(fine), 1e-17) or width < 1e-6:
            pieces.append(fine)
        else:
            mid = 0.5 * (a + b)
            stack.append((a, mid))
            stack.append((mid, b))
            depth += 1
            if depth > 10000:
                raise ConvergenceError("adaptive quadrature did not settle")
    total = direction * math.fsum(p.real for p in pieces) + direction * 1j * math.fsum(
        p.imag for p in pieces
    )
    return total


def airy_antiderivative(z, rtol=1e-12):
    r"""Integral :math:`\int_0^z \mathrm{Ai}(\zeta)\,d\zeta` along the straight ray.

    Adaptive Gauss-Legendre panels (20-point rule checked against a 10-point
    rule) over unit-length starting panels.

    Parameters
    ----------
    z : complex or array_like of complex
        Points in the sector ``|arg z| <= pi/3``.
    rtol : float
        Per-panel relative acceptance tolerance.

    Raises
    ------
    DomainError
        Outside the sector.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_sector(zz, math.pi / 3)
    out = np.array([_antiderivative_one(complex(v), rtol) for v in zz.ravel()])
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def ray_antiderivative(theta, radii, panel=0.5):
    r"""Vectorized :math:`\int_0^{\rho e^{i\theta}} \mathrm{Ai}` for many radii on one ray.

    Panels of at most ``panel`` length are laid between the sorted radii and
    integrated with a 20-point Gauss-Legendre rule; a cumulative sum then
    gives every requested radius at once.  Panels beyond the point where
    ``|Ai|`` is below ``1e-300`` contribute nothing and are skipped.

    Parameters
    ----------
    theta : float
        Ray angle with ``|theta| <= pi/3``.
    radii : array_like of float
        Nonnegative radii.

    Returns
    -------
    ndarray of complex
        Same shape as ``radii``.
    """
    if abs(theta) > math.pi / 3 + SECTOR_SLACK:
        raise DomainError(f"ray angle {theta} outside the sector")
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0) or not np.all(np.isfinite(radii)):
        raise DomainError("radii must be finite and nonnegative")
    flat = radii.ravel()
    order = np.argsort(flat)
    sorted_r = flat[order]
    direction = complex(math.cos(theta), math.sin(theta))
    # decay exponent along the ray: Re(2/3 z^1.5) = 2/3 rho^1.5 cos(1.5 theta)
    decay = math.cos(1.5 * theta)
    cutoff = np.inf if decay <= 0 else (1.5 * 700.0 / decay) ** (2.0 / 3.0)

    knots = [0.0]
    for r in sorted_r:
        stop = min(r, cutoff)
        if stop > knots[-1]:
            n = int(math.ceil((stop - knots[-1]) / panel))
            knots.extend(np.linspace(knots[-1], stop, n + 1)[1:].tolist())
    knots = np.asarray(knots)
    a, b = knots[:-1], knots[1:]
    width = b - a
    pts = direction * (a[:, None] + width[:, None] * _GL_X[None, :])
    vals = _ai_unscaled(pts.ravel()).reshape(pts.shape)
    panel_int = direction * width * (vals @ _GL_W)
    cum = np.concatenate([[0j], np.cumsum(panel_int)])
    idx = np.searchsorted(knots, np.minimum(sorted_r, cutoff))
    res = np.empty(flat.shape, dtype=complex)
    res[order] = cum[idx]
    return res.reshape(radii.shape)


def _gamma_ratio_terms(nu, x, n):
    half = 0.5 * x
    terms = []
    term = half**nu / math.gamma(nu + 1.0)
    for k in range(n):
        terms.append(term)
        term *= -(half * half) / ((k + 1) * (k + 1 + nu))
    return terms


def bessel_j(nu, x):
    r"""Bessel function :math:`J_\nu(x)` for real ``x > 0`` and real order ``nu``.

    Power series for ``x <= 12``; Hankel asymptotic expansion beyond, with
    smallest-term truncation.
    """
    x = float(x)
    if not x > 0:
        raise DomainError("bessel_j requires x > 0")
    if x <= 12.0:
        return math.fsum(_gamma_ratio_terms(nu, x, 80))
    mu = 4.0 * nu * nu
    p = q = 0.0
    a = 1.0
    last = math.inf
    for k in range(60):
        if k > 0:
            a *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(a) >= last:
            break
        last = abs(a)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * a
        else:
            q += sign * a
    omega = x - 0.5 * nu * math.pi - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(omega) - q * math.sin(omega))


def bessel_j_zeros(nu, k_max, tol=1e-14, max_newton=50):
    """First ``k_max`` positive zeros of ``J_nu`` (``-1 < nu``).

    McMahon's expansion gives the starting guess; Newton's method with
    ``J_nu' = (nu/x) J_nu - J_{nu+1}`` refines it.

    Raises
    ------
    ConvergenceError
        If Newton's method fails or zeros come out out of order.
    """
    mu = 4.0 * nu * nu
    zeros = []
    for k in range(1, k_max + 1):
        beta = (k + 0.5 * nu - 0.25) * math.pi
        x = (
            beta
            - (mu - 1) / (8 * beta)
            - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * beta) ** 3)
        )
        for _ in range(max_newton):
            j = bessel_j(nu, x)
            dj = nu / x * j - bessel_j(nu + 1.0, x)
            step = j / dj
            x -= step
            if abs(step) <= tol * x:
                break
        else:
            raise ConvergenceError(f"Newton iteration failed for zero {k} of J_{nu}")
        if zeros and not x > zeros[-1] + 1.0:
            raise ConvergenceError(f"zero {k} of J_{nu} not separated from its predecessor")
        zeros.append(x)
    return zeros


def zero_ray_check(k_max):
    r"""Locate the first zeros of :math:`\sqrt3\,\mathrm{Ai} + \mathrm{Bi}` on :math:`\arg z = \pi/3`.

    Uses :math:`\sqrt3\mathrm{Ai}(z)+\mathrm{Bi}(z) \propto
    J_{-1/3}(\tfrac23 z^{3/2} e^{i\pi/2})`; a zero ``j`` of ``J_{-1/3}``
    gives :math:`z = (1.5 j)^{2/3} e^{i\pi/3}` (through the root at ``-j``;
    the conjugate zeros sit on :math:`\arg z = -\pi/3`).

    Parameters
    ----------
    k_max : int
        Number of zeros, ``0 <= k_max <= 50``.

    Returns
    -------
    list of SectorPoint
    """
    if int(k_max) != k_max or k_max < 0 or k_max > 50:
        raise DomainError("k_max must be an integer in [0, 50]")
    if k_max == 0:
        return []
    return [
        SectorPoint((1.5 * j) ** (2.0 / 3.0), math.pi / 3)
        for j in bessel_j_zeros(-1.0 / 3.0, int(k_max))
    ]


def c_function(z):
    r"""Unscaled :math:`\sqrt3\,\mathrm{Ai}(z) + \mathrm{Bi}(z)`."""
    ai, _, bi, _ = eval_airy(z).unscaled()
    return SQRT3 * ai + bi


def refine_zero(z, tol=1e-14, max_iter=30):
    r"""Newton refinement of a zero of :math:`\sqrt3\,\mathrm{Ai} + \mathrm{Bi}` in the plane.

    No constraint keeps the iterate on a ray, so the returned argument is an
    independent check of where the zero lies.
    """
    z = complex(z)
    for _ in range(max_iter):
        ai, aip, bi, bip = eval_airy(z).unscaled()
        c = SQRT3 * ai + bi
        dc = SQRT3 * aip + bip
        step = c / dc
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    raise ConvergenceError(f"Newton refinement stalled near {z}")


def selftest(n_radius=60, n_arg=41, r_max=1e3, n_zeros=10):
    """Wronskian, integral and zero checks over a sector battery.

    Returns
    -------
    dict
        ``wronskian_max_error`` (relative to ``1/pi``), ``integral_error``
        (``|int_0^inf Ai - 1/3|``), ``zero_arg_max_deviation`` (Newton-refined
        zeros vs ``pi/3``), ``zero_max_abs_c`` and ``n_points``.
    """
    radii = np.geomspace(1e-3, r_max, n_radius)
    args = np.linspace(-math.pi / 3, math.pi / 3, n_arg)
    z = (radii[:, None] * np.exp(1j * args[None, :])).ravel()
    w = wronskian(eval_airy(z))
    werr = float(np.max(np.abs(w * math.pi - 1.0)))
    integral = airy_antiderivative(50.0)
    zeros = zero_ray_check(n_zeros)
    refined = [refine_zero(p.z) for p in zeros]
    dev = max((abs(np.angle(r) - math.pi / 3) for r in refined), default=0.0)
    cmax = max((abs(c_function(p.z)) for p in zeros), default=0.0)
    return {
        "wronskian_max_error": werr,
        "integral_error": float(abs(integral - 1.0 / 3.0)),
        "zero_arg_max_deviation": float(dev),
        "zero_max_abs_c": float(cmax),
        "zeros": [[float(r.real), float(r.imag)] for r in refined],
        "n_points": int(z.size),
    }
