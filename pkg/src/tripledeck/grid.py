r"""
Discrete domain, Fourier conventions and y-integration.

The strip :math:`\mathbb{R}\times[0, M]` is periodized in ``x`` on
``[-L, L)`` with ``n_x`` equispaced points and sampled uniformly in ``y``
with ``n_y`` points.  The continuous transform

.. math::

    \hat f(\xi) = \int f(x)\, e^{-i\xi x}\,dx

is approximated by ``dx * (-1)**j * fft(f)[j]`` at :math:`\xi_j = \pi j/L`,
and Parseval reads :math:`\int |f|^2 dx = \frac{1}{2L}\sum_j |\hat f_j|^2`.
Mode arrays are kept in FFT order along axis 0.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math
import warnings

import numpy as np
import scipy.fft

from .errors import DegenerateModeError, DomainError, NonFiniteError, ShapeError

__all__ = [
    "Grid",
    "SpectralField",
    "RoughnessProfile",
    "forward",
    "inverse",
    "frac_multiplier",
    "hilbert_pressure",
    "integrate_y",
    "simpson_weights",
    "cumulative_simpson",
    "cumulative_panels",
    "panel_stencils",
    "diff_y",
    "fd_weights",
]


def simpson_weights(n, h):
    """Composite Simpson weights for ``n`` (odd) equispaced points."""
    if n < 3 or n % 2 == 0:
        raise DomainError("Simpson's rule needs an odd number of points >= 3")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def cumulative_simpson(f, h, axis=-1):
    """Cumulative integral from the first node, composite Simpson at even nodes.

    Odd nodes use the three-point rule ``h/12 (5 f0 + 8 f1 - f2)`` on the
    half panel, so the result is exact for quadratics at every node and the
    value at the last node equals the full composite Simpson sum.
    """
    f = np.moveaxis(np.asarray(f), axis, -1)
    n = f.shape[-1]
    if n < 3 or n % 2 == 0:
        raise DomainError("cumulative Simpson needs an odd number of points >= 3")
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    pair = h / 3.0 * (f[..., 0:-2:2] + 4.0 * f[..., 1:-1:2] + f[..., 2::2])
    out[..., 2::2] = np.cumsum(pair, axis=-1)
    half = h / 12.0 * (5.0 * f[..., 0:-2:2] + 8.0 * f[..., 1:-1:2] - f[..., 2::2])
    out[..., 1::2] = out[..., 0:-2:2] + half
    return np.moveaxis(out, -1, axis)


_STENCIL = 6


def _stencil_table(width):
    """Weights integrating the degree ``width-1`` interpolant over panel ``[o, o+1]``
    of a ``width``-node stencil, for every offset ``o``."""
    nodes = np.arange(width, dtype=float)
    vander = np.vander(nodes, width, increasing=True).T
    table = np.empty((width - 1, width))
    for o in range(width - 1):
        moments = np.array([((o + 1) ** (m + 1) - o ** (m + 1)) / (m + 1) for m in range(width)])
        table[o] = np.linalg.solve(vander, moments)
    return table


_TABLE = _stencil_table(_STENCIL)


def panel_stencils(n, width=_STENCIL):
    """Node indices ``(n-1, width)`` and unit-spacing weights for each panel."""
    if n < width:
        raise ShapeError(f"need at least {width} nodes, got {n}")
    p = np.arange(n - 1)
    first = np.clip(p - (width // 2 - 1), 0, n - width)
    nodes = first[:, None] + np.arange(width)[None, :]
    return nodes, _TABLE[p - first]


def _panel_weights(g, h):
    """Integrals of a sampled function over each panel (exact for quintics).

    ``g`` has the node index on its last axis; the result has one entry
    fewer.
    """
    nodes, weights = panel_stencils(g.shape[-1])
    return h * np.einsum("...pm,pm->...p", g[..., nodes], weights)


def cumulative_panels(g, h):
    """Cumulative integral from the first node with the six-point panel rule."""
    g = np.asarray(g)
    panels = _panel_weights(g, h)
    out = np.zeros(g.shape, dtype=panels.dtype)
    out[..., 1:] = np.cumsum(panels, axis=-1)
    return out


def fd_weights(offsets, deriv):
    """Finite-difference weights (unit spacing) for the given node offsets."""
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


def diff_y(f, h, deriv=1, accuracy=4):
    """Derivative along the last axis of uniformly spaced samples.

    Central stencils of ``accuracy + 1`` nodes in the interior and one-sided
    stencils of ``accuracy + deriv`` nodes near the ends, so the formal order
    is ``accuracy`` everywhere.
    """
    f = np.asarray(f)
    n = f.shape[-1]
    half = accuracy // 2
    width = accuracy + deriv
    if n < width:
        raise ShapeError(f"need at least {width} points for this stencil")
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    central = fd_weights(np.arange(-half, half + 1), deriv)
    for i, c in enumerate(central):
        out[..., half : n - half] += c * f[..., i : n - 2 * half + i]
    for k in range(half):
        w = fd_weights(np.arange(width) - k, deriv)
        out[..., k] = f[..., :width] @ w
        w = fd_weights(np.arange(width) - (width - 1 - k), deriv)
        out[..., n - 1 - k] = f[..., n - width :] @ w
    return out / h**deriv


@dataclass(frozen=True)
class Grid:
    """Periodized strip lattice.

    Parameters
    ----------
    L : float
        Half period; ``x`` runs over ``[-L, L)``.
    n_x : int
        Even number of x points (and Fourier modes).
    m_height : float
        Strip height ``M``.
    n_y : int
        Odd number of y points, spacing ``M/(n_y - 1)``.
    workers : int
        Threads handed to the FFT backend.
    """

    L: float = 40.0
    n_x: int = 512
    m_height: float = 30.0
    n_y: int = 513
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        problems = []
        if not (self.L > 0 and math.isfinite(self.L)):
            problems.append(f"L must be positive, got {self.L}")
        if not (self.m_height > 0 and math.isfinite(self.m_height)):
            problems.append(f"M must be positive, got {self.m_height}")
        if int(self.n_x) != self.n_x or self.n_x < 2 or self.n_x % 2:
            problems.append(f"n_x must be an even integer >= 2, got {self.n_x}")
        if int(self.n_y) != self.n_y or self.n_y < 5 or self.n_y % 2 == 0:
            problems.append(f"n_y must be an odd integer >= 5, got {self.n_y}")
        if problems:
            raise DomainError("; ".join(problems))

    @property
    def M(self):
        return self.m_height

    @cached_property
    def dx(self):
        return 2.0 * self.L / self.n_x

    @cached_property
    def hy(self):
        return self.m_height / (self.n_y - 1)

    @cached_property
    def x(self):
        return -self.L + self.dx * np.arange(self.n_x)

    @cached_property
    def y(self):
        return np.linspace(0.0, self.m_height, self.n_y)

    @cached_property
    def xi(self):
        """Angular frequencies in FFT order."""
        return np.pi / self.L * np.fft.fftfreq(self.n_x, 1.0 / self.n_x)

    @cached_property
    def nyquist(self):
        return self.n_x // 2

    @cached_property
    def _phase(self):
        # (-1)^j turns the FFT of samples starting at x = -L into the line transform
        return self.dx * np.where(np.arange(self.n_x) % 2 == 0, 1.0, -1.0)

    @cached_property
    def simpson(self):
        return simpson_weights(self.n_y, self.hy)

    def with_height(self, m_height, n_y=None):
        return Grid(self.L, self.n_x, m_height, self.n_y if n_y is None else n_y, self.workers)

    def refined(self, factor=2):
        """Grid with ``factor`` times the x modes and y panels."""
        return Grid(
            self.L, self.n_x * factor, self.m_height, (self.n_y - 1) * factor + 1, self.workers
        )

    def check_x(self, f):
        f = np.asarray(f)
        if f.ndim not in (1, 2) or f.shape[0] != self.n_x:
            raise ShapeError(f"expected leading dimension {self.n_x}, got shape {f.shape}")
        if f.ndim == 2 and f.shape[1] != self.n_y:
            raise ShapeError(f"expected {self.n_y} y points, got shape {f.shape}")
        return f

    def fft(self, f):
        """Line-transform approximation of real or complex samples along axis 0."""
        f = self.check_x(f)
        out = scipy.fft.fft(f, axis=0, workers=self.workers)
        return out * self._phase.reshape((-1,) + (1,) * (f.ndim - 1))

    def ifft(self, fh, real=True):
        fh = self.check_x(fh)
        scaled = fh / self._phase.reshape((-1,) + (1,) * (fh.ndim - 1))
        out = scipy.fft.ifft(scaled, axis=0, workers=self.workers)
        return out.real if real else out

    def symbol(self, s, signed=False):
        """Per-mode symbol ``|xi|^s`` or ``i xi |xi|^s`` (zero at xi = 0 unless s == 0)."""
        a = np.abs(self.xi)
        with np.errstate(divide="ignore"):
            mag = np.where(a > 0, a ** float(s), 0.0 if s != 0 else 1.0)
        if signed:
            out = 1j * np.sign(self.xi) * a * mag
            out[self.nyquist] = 0.0
            return out
        return mag.astype(complex)

    def _bcast(self, v, ndim):
        return v.reshape((-1,) + (1,) * (ndim - 1))

    def dx_spectral(self, f):
        """Spectral ``d/dx`` of real samples (Nyquist mode dropped)."""
        return self.ifft(self.fft(f) * self._bcast(self.symbol(0, signed=True), np.ndim(f)))

    def dealias_mask(self):
        """Modes kept by the 2/3 rule."""
        j = np.abs(np.fft.fftfreq(self.n_x, 1.0 / self.n_x))
        return j < self.n_x / 3.0

    def l2_x(self, fh):
        """``L2(R)`` norm of a function from its mode vector (Parseval)."""
        return math.sqrt(float(np.sum(np.abs(fh) ** 2)) / (2.0 * self.L))

    def integrate(self, f, axis=-1):
        """Composite Simpson integral over ``[0, M]``."""
        f = np.moveaxis(np.asarray(f), axis, -1)
        return f @ self.simpson

    @cached_property
    def panel6(self):
        """Weights of the sixth-order rule over ``[0, M]``."""
        nodes, weights = panel_stencils(self.n_y)
        w = np.zeros(self.n_y)
        np.add.at(w, nodes.ravel(), weights.ravel())
        return w * self.hy

    def integrate_high(self, f, axis=-1):
        """Sixth-order integral over ``[0, M]``."""
        f = np.moveaxis(np.asarray(f), axis, -1)
        return f @ self.panel6


@dataclass
class SpectralField:
    """Mode array ``f_hat(xi_j, y_k)`` in FFT order along axis 0."""

    grid: Grid
    modes: np.ndarray

    def __post_init__(self):
        self.modes = np.asarray(self.modes, dtype=complex)
        self.grid.check_x(self.modes)

    def to_physical(self):
        return inverse(self)

    def is_hermitian(self, atol=1e-12):
        j = np.arange(self.grid.n_x)
        mirror = self.modes[(-j) % self.grid.n_x]
        scale = max(1.0, float(np.max(np.abs(self.modes))) if self.modes.size else 1.0)
        return bool(np.max(np.abs(mirror - np.conj(self.modes))) <= atol * scale)

    def __add__(self, other):
        return SpectralField(self.grid, self.modes + other.modes)

    def __sub__(self, other):
        return SpectralField(self.grid, self.modes - other.modes)

    def __mul__(self, c):
        return SpectralField(self.grid, self.modes * c)

    __rmul__ = __mul__


def forward(f, grid):
    """Transform a real physical field (``(n_x,)`` or ``(n_x, n_y)``) to modes."""
    f = np.asarray(f)
    if not np.all(np.isfinite(f)):
        raise NonFiniteError("field contains non-finite samples")
    return SpectralField(grid, grid.fft(f))


def inverse(field, real=True):
    """Back to physical samples; real part only unless ``real=False``."""
    return field.grid.ifft(field.modes, real=real)


def frac_multiplier(field, s, signed=False):
    r"""Apply :math:`|\partial_x|^s` (symbol :math:`|\xi|^s`) or, when ``signed``,
    the operator with symbol :math:`i\xi|\xi|^s`.

    Parameters
    ----------
    field : SpectralField
    s : float
        Order, ``s >= -1``.  For ``s < 0`` the mean mode must vanish.
    signed : bool
        Use the odd symbol; the Nyquist mode is then zeroed to keep real
        fields real.

    Raises
    ------
    DegenerateModeError
        If ``s < 0`` and the ``xi = 0`` column is nonzero.
    """
    if s < -1:
        raise DomainError(f"order must be >= -1, got {s}")
    grid = field.grid
    if s < 0 and np.any(field.modes[0] != 0):
        raise DegenerateModeError("negative-order multiplier applied to nonzero mean mode")
    sym = grid.symbol(s, signed=signed)
    return SpectralField(grid, field.modes * grid._bcast(sym, field.modes.ndim))


def hilbert_pressure(a, grid):
    """Pressure ``P = |d/dx| A`` of a displacement (mean mode dropped)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (grid.n_x,):
        raise ShapeError(f"expected shape ({grid.n_x},), got {a.shape}")
    return grid.ifft(grid.fft(a) * grid.symbol(1.0))


def integrate_y(f, grid, upper=None, rule="simpson"):
    """Integrate in ``y`` from 0.

    Parameters
    ----------
    f : ndarray or SpectralField
        Values on the y grid along the last axis.
    upper : None, float or "M"
        ``None`` gives the cumulative integral at every node; a number gives
        the integral up to that height (cubic Hermite interpolation of the
        cumulative integral between nodes); ``"M"`` gives the full-column sum.
    rule : {"simpson", "panel6"}
        Composite Simpson, or the sixth-order rule that integrates the local
        quintic interpolant over each panel.

    Returns
    -------
    ndarray or SpectralField
    """
    if isinstance(f, SpectralField):
        data = f.modes
        if data.ndim != 2:
            raise ShapeError("y integration needs a two-dimensional field")
        res = integrate_y(data, grid, upper, rule)
        return SpectralField(grid, res) if upper is None else res
    f = np.asarray(f)
    if f.shape[-1] != grid.n_y:
        raise ShapeError(f"last axis must have {grid.n_y} points, got {f.shape}")
    if rule == "simpson":
        cumulate = cumulative_simpson
    elif rule == "panel6":
        cumulate = cumulative_panels
    else:
        raise DomainError(f"unknown integration rule {rule!r}")
    if upper is None:
        return cumulate(f, grid.hy)
    if isinstance(upper, str):
        if upper != "M":
            raise DomainError(f"unknown upper limit {upper!r}")
        return grid.integrate(f) if rule == "simpson" else cumulate(f, grid.hy)[..., -1]
    upper = float(upper)
    if not 0.0 <= upper <= grid.m_height:
        raise DomainError(f"upper limit {upper} outside [0, {grid.m_height}]")
    cum = cumulate(f, grid.hy)
    k = min(int(upper // grid.hy), grid.n_y - 2)
    t = (upper - grid.y[k]) / grid.hy
    if t == 0.0:
        return cum[..., k]
    h = grid.hy
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    return h00 * cum[..., k] + h10 * h * f[..., k] + h01 * cum[..., k + 1] + h11 * h * f[..., k + 1]


class RoughnessProfile:
    """Wall roughness samples on the x grid.

    Parameters
    ----------
    samples : array_like
        Real values of ``F`` at ``grid.x``.
    grid : Grid
    strict : bool
        Raise instead of warning when the profile has not decayed to
        ``1e-8`` of its peak in the outer tenth of the window.
    """

    DECAY_TOL = 1e-8

    def __init__(self, samples, grid, strict=False, name="custom"):
        samples = np.asarray(samples)
        if np.iscomplexobj(samples):
            raise DomainError("roughness samples must be real")
        samples = samples.astype(float)
        if samples.shape != (grid.n_x,):
            raise ShapeError(f"expected shape ({grid.n_x},), got {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise NonFiniteError("roughness samples must be finite")
        self.samples = samples
        self.grid = grid
        self.name = name
        self.hat = grid.fft(samples)
        if self.tail_ratio > self.DECAY_TOL:
            msg = (
                f"roughness tail/peak ratio {self.tail_ratio:.3g} exceeds {self.DECAY_TOL:g}; "
                "the periodized problem is not a faithful copy of the line problem"
            )
            if strict:
                raise DomainError(msg)
            warnings.warn(msg, stacklevel=2)

    @property
    def tail_ratio(self):
        peak = float(np.max(np.abs(self.samples)))
        if peak == 0.0:
            return 0.0
        outer = np.abs(self.grid.x) >= 0.9 * self.grid.L
        return float(np.max(np.abs(self.samples[outer]))) / peak

    @property
    def tail_energy(self):
        """Fraction of ``L2`` energy carried by the outer tenth of the window."""
        total = float(np.sum(self.samples**2))
        if total == 0.0:
            return 0.0
        outer = np.abs(self.grid.x) >= 0.9 * self.grid.L
        return float(np.sum(self.samples[outer] ** 2)) / total

    @property
    def h2_norm(self):
        """Periodized ``H^2`` norm computed from the modes."""
        w = (1.0 + self.grid.xi**2) ** 2
        return math.sqrt(float(np.sum(w * np.abs(self.hat) ** 2)) / (2.0 * self.grid.L))

    @property
    def derivative(self):
        return self.grid.dx_spectral(self.samples)

    def scaled(self, c):
        return RoughnessProfile(c * self.samples, self.grid, name=self.name)

    @classmethod
    def gaussian(cls, grid, amplitude=1.0, width=1.0, **kw):
        x = grid.x
        return cls(amplitude * np.exp(-((x / width) ** 2)), grid, name="gaussian", **kw)

    @classmethod
    def agnesi(cls, grid, amplitude=1.0, width=1.0, **kw):
        x = grid.x
        return cls(amplitude / (1.0 + (x / width) ** 2), grid, name="agnesi", **kw)

    @classmethod
    def wavepacket(cls, grid, amplitude=1.0, width=1.0, k0=2.0, **kw):
        x = grid.x
        vals = amplitude * np.exp(-((x / width) ** 2)) * np.cos(k0 * x)
        return cls(vals, grid, name="wavepacket", **kw)

    @classmethod
    def preset(cls, name, grid, amplitude=1.0, width=1.0, k0=2.0, **kw):
        if name == "gaussian":
            return cls.gaussian(grid, amplitude, width, **kw)
        if name == "agnesi":
            return cls.agnesi(grid, amplitude, width, **kw)
        if name == "wavepacket":
            return cls.wavepacket(grid, amplitude, width, k0, **kw)
        raise DomainError(f"unknown roughness preset {name!r}")
