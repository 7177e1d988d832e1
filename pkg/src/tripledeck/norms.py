r"""
Weighted norms of vorticity and displacement fields, and inequality-ratio
diagnostics.

For a field :math:`f(x, y)` on the strip,

.. math::

    \|f\|_{X_{\bar\alpha}} = \|f\|_{L^2} + \||\partial_x|^{1/18} y^{1/6} f\|_{L^2}
        + \|f\|_{Y_{\bar\alpha}},

    \|f\|_{Y_{\bar\alpha}} = \|y|\partial_x|^{\bar\alpha/2}\partial_x f\|
        + \||\partial_x|^{2/3+\bar\alpha/2} f\|
        + \||\partial_x|^{1/3+\bar\alpha/2}\partial_y f\|
        + \||\partial_x|^{\bar\alpha/2}\partial_y^2 f\|
        + \||\partial_x|^{(1+\bar\alpha)/2} y^{1/2}\partial_y f\|,

and for a displacement
:math:`\|A\|_{X_{\alpha,\infty}} = \||\partial_x|^{5/6}A\|_{H^{4/3+\alpha/2}} + \|A\|_{L^\infty}`.

Every term is a Parseval sum over modes of :math:`|\xi|^{2s}` times a
y-weighted sixth-order integral; y-derivatives use fourth-order differences.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .errors import DomainError, ShapeError
from .grid import diff_y

__all__ = [
    "NormBundle",
    "vorticity_norms",
    "x_norm",
    "y_norm",
    "displacement_norm",
    "solution_norm",
    "proposition_ratios",
    "standard_battery",
    "ALPHA_RANGE",
]

ALPHA_RANGE = (2.0 / 3.0, 7.0 / 3.0)


@dataclass
class NormBundle:
    """Norms of one field.

    Attributes
    ----------
    x0, x_alpha, y0, y_alpha : float
    x_alpha_inf : float or None
        Displacement norm, when a displacement was supplied.
    components : dict
        Every constituent seminorm keyed by ``"<space>: <label>"``.
    """

    x0: float
    x_alpha: float
    y0: float
    y_alpha: float
    x_alpha_inf: float = None
    components: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "x0": self.x0,
            "x_alpha": self.x_alpha,
            "y0": self.y0,
            "y_alpha": self.y_alpha,
            "x_alpha_inf": self.x_alpha_inf,
            "components": dict(self.components),
        }


class _Profiles:
    """Mode profiles of a field and its y-derivatives, computed once."""

    def __init__(self, f, grid, accuracy):
        f = np.asarray(f, dtype=float)
        if f.shape != (grid.n_x, grid.n_y):
            raise ShapeError(f"expected field shape ({grid.n_x}, {grid.n_y}), got {f.shape}")
        self.grid = grid
        self.hat = grid.fft(f)
        self.dy = diff_y(self.hat, grid.hy, 1, accuracy)
        self.dyy = diff_y(self.hat, grid.hy, 2, accuracy)
        self.absxi = np.abs(grid.xi)

    def seminorm(self, s, which="f", weight=None, extra_xi=0.0):
        """``|| w(y) |dx|^s (d_y^k f) ||_{L2}`` with an optional extra ``|xi|`` power."""
        prof = {"f": self.hat, "dy": self.dy, "dyy": self.dyy}[which]
        power = s + extra_xi
        with np.errstate(divide="ignore"):
            sym = np.where(self.absxi > 0, self.absxi ** power, 0.0 if power != 0 else 1.0)
        dens = np.abs(prof) ** 2
        if weight is not None:
            dens = dens * weight[None, :] ** 2
        col = self.grid.integrate_high(dens)
        return math.sqrt(max(float(np.sum(sym**2 * col)) / (2.0 * self.grid.L), 0.0))


def _y_terms(p, abar):
    y = p.grid.y
    a2 = abar / 2.0
    return {
        "y|dx|^{a/2} dx f": p.seminorm(a2, "f", weight=y, extra_xi=1.0),
        "|dx|^{2/3+a/2} f": p.seminorm(2.0 / 3.0 + a2, "f"),
        "|dx|^{1/3+a/2} dy f": p.seminorm(1.0 / 3.0 + a2, "dy"),
        "|dx|^{a/2} dy^2 f": p.seminorm(a2, "dyy"),
        "|dx|^{(1+a)/2} y^{1/2} dy f": p.seminorm(0.5 + a2, "dy", weight=np.sqrt(y)),
    }


def _x_extra(p):
    return {
        "L2": p.seminorm(0.0, "f"),
        "|dx|^{1/18} y^{1/6} f": p.seminorm(1.0 / 18.0, "f", weight=p.grid.y ** (1.0 / 6.0)),
    }


def _check_alpha(alpha):
    lo, hi = ALPHA_RANGE
    if not (lo < alpha <= hi):
        warnings.warn(
            f"alpha = {alpha} lies outside ({lo:.4f}, {hi:.4f}]; norms are computed anyway",
            stacklevel=3,
        )


def y_norm(f, abar, grid, accuracy=4):
    """``||f||_{Y_abar}``."""
    return sum(_y_terms(_Profiles(f, grid, accuracy), abar).values())


def x_norm(f, abar, grid, accuracy=4):
    """``||f||_{X_abar}``."""
    p = _Profiles(f, grid, accuracy)
    return sum(_x_extra(p).values()) + sum(_y_terms(p, abar).values())


def vorticity_norms(f, alpha, grid, accuracy=4, a=None):
    """All vorticity norms (and optionally the displacement norm) of one field.

    Parameters
    ----------
    f : ndarray, shape (n_x, n_y)
        Physical field.
    alpha : float
        Regularity index; values outside ``(2/3, 7/3]`` are accepted with a
        warning.
    grid : Grid
    a : ndarray, optional
        Displacement samples; fills ``x_alpha_inf``.

    Returns
    -------
    NormBundle
    """
    _check_alpha(alpha)
    p = _Profiles(f, grid, accuracy)
    base = _x_extra(p)
    y0 = _y_terms(p, 0.0)
    ya = _y_terms(p, alpha)
    comps = {}
    for k, v in base.items():
        comps[f"X: {k}"] = v
    for k, v in y0.items():
        comps[f"Y0: {k}"] = v
    for k, v in ya.items():
        comps[f"Ya: {k}"] = v
    y0n = sum(y0.values())
    yan = sum(ya.values())
    extra = sum(base.values())
    x_inf = displacement_norm(a, alpha, grid) if a is not None else None
    return NormBundle(extra + y0n, extra + yan, y0n, yan, x_inf, comps)


def displacement_norm(a, alpha, grid):
    r"""``||A||_{X_{alpha,inf}}``: periodized ``H^{4/3+alpha/2}`` norm of
    ``|dx|^{5/6} A`` plus the grid maximum of ``|A|``."""
    a = np.asarray(a, dtype=float)
    if a.shape != (grid.n_x,):
        raise ShapeError(f"expected shape ({grid.n_x},), got {a.shape}")
    ah = grid.fft(a)
    xi = grid.xi
    s = 4.0 / 3.0 + alpha / 2.0
    w = np.abs(xi) ** (5.0 / 3.0) * (1.0 + xi**2) ** s
    sob = math.sqrt(float(np.sum(w * np.abs(ah) ** 2)) / (2.0 * grid.L))
    return sob + float(np.max(np.abs(a)))


def solution_norm(omega, a, alpha, grid, accuracy=4):
    """``||omega||_{X_0} + ||omega||_{X_alpha} + ||A||_{X_{alpha,inf}}``."""
    b = vorticity_norms(omega, alpha, grid, accuracy, a=a)
    return b.x0 + b.x_alpha + b.x_alpha_inf


# ---------------------------------------------------------------- inequalities


def _embedding_lhs(f, p, grid, eps):
    y = grid.y
    t1 = math.sqrt(grid.dx * float(np.sum(np.max(np.abs(f), axis=1) ** 2)))
    t2 = p.seminorm(0.5 - eps, "dy", weight=y ** (0.5 - 3 * eps))
    fy = grid.ifft(p.dy)
    col = grid.integrate_high(fy**2)
    t3 = (grid.dx * float(np.sum(col**3))) ** (1.0 / 6.0)
    t4 = float(grid.integrate_high(np.max(np.abs(f), axis=0)))
    return t1 + t2 + t3 + t4


def _weighted_sup_lhs(f, p, grid, eps):
    y = grid.y
    fy = grid.ifft(p.dy)
    wmax = np.max(np.abs(fy), axis=0) * y ** ((1 - 3 * eps) / 2)
    t1 = math.sqrt(max(float(grid.integrate_high(wmax**2)), 0.0))
    return t1 + float(np.max(np.abs(f)))


def _trace_lhs(p, grid, abar):
    im = grid.integrate_high(p.hat)
    xi = np.abs(grid.xi)
    s = 5.0 / 6.0 + abar / 2.0
    return math.sqrt(float(np.sum(xi ** (2 * s) * np.abs(im) ** 2)) / (2.0 * grid.L))


def _ratios_for(f, grid, alpha, eps, accuracy):
    p = _Profiles(f, grid, accuracy)
    base = sum(_x_extra(p).values())
    y0 = sum(_y_terms(p, 0.0).values())
    ya = sum(_y_terms(p, alpha).values())
    x0, xa = base + y0, base + ya
    if x0 == 0.0:
        return None
    out = {}
    out["embedding"] = _embedding_lhs(f, p, grid, eps) / x0
    const = math.sqrt(1.0 + alpha) / alpha + 1.0 / math.sqrt(eps)
    out["weighted_sup"] = _weighted_sup_lhs(f, p, grid, eps) / (const * (x0 + xa))
    r4 = []
    for abar, ynorm in ((0.0, y0), (alpha, ya)):
        if ynorm > 0:
            r4.append(_trace_lhs(p, grid, abar) / ynorm)
    out["trace"] = max(r4) if r4 else 0.0
    return out


def _sample(member, grid):
    if callable(member):
        x, y = np.meshgrid(grid.x, grid.y, indexing="ij")
        return np.asarray(member(x, y), dtype=float)
    return np.asarray(member, dtype=float)


def proposition_ratios(battery, grid, alpha=1.0, epsilon=1.0 / 6.0, refine=False,
                       accuracy=4, growth_tol=0.1):
    """Largest left/right ratio of each inequality over a battery of fields.

    Inequality ids:

    ``embedding``
        ``||f||_{L2_x Linf_y} + |||dx|^{1/2-eps} y^{1/2-3eps} dy f||
        + ||dy f||_{L6_x L2_y} + ||f||_{L1_y Linf_x}`` against ``||f||_{X0}``.
    ``weighted_sup``
        ``||y^{(1-3eps)/2} dy f||_{L2_y Linf_x} + ||f||_{Linf}`` against
        ``(sqrt(1+alpha)/alpha + 1/sqrt(eps)) (||f||_{X0} + ||f||_{X_alpha})``.
    ``trace``
        ``|||dx|^{5/6+abar/2} I_M f||`` against ``||f||_{Y_abar}``, worst of
        ``abar`` in ``{0, alpha}``.

    Parameters
    ----------
    battery : dict or list
        ``name -> field`` (or a list of fields).  A field is either an
        ``(n_x, n_y)`` array or a callable ``f(x, y)``; callables can be
        resampled on a refined grid.
    grid : Grid
    alpha, epsilon : float
        ``epsilon`` must not exceed ``min(1/6, alpha/2)``.
    refine : bool
        Repeat on ``grid.refined()`` (callables only) and flag inequalities
        whose maximum ratio grows by more than ``growth_tol``.

    Returns
    -------
    dict
        ``{"rows": [(inequality, field, ratio)], "max": {...}, "skipped": [...],
        "refined_max": {...}, "flags": [...]}``.
    """
    if not battery:
        raise DomainError("battery must not be empty")
    if not 0 < epsilon <= min(1.0 / 6.0, alpha / 2.0):
        raise DomainError("epsilon must lie in (0, min(1/6, alpha/2)]")
    items = battery.items() if isinstance(battery, dict) else enumerate(battery)
    items = list(items)

    def run(g):
        rows, skipped, best = [], [], {}
        for name, member in items:
            r = _ratios_for(_sample(member, g), g, alpha, epsilon, accuracy)
            if r is None:
                skipped.append(name)
                continue
            for key, val in r.items():
                rows.append((key, name, val))
                best[key] = max(best.get(key, 0.0), val)
        return rows, skipped, best

    rows, skipped, best = run(grid)
    report = {"rows": rows, "max": best, "skipped": skipped, "flags": []}
    if refine:
        if not all(callable(m) for _, m in items):
            raise DomainError("refinement needs callable battery members")
        _, _, fine = run(grid.refined())
        report["refined_max"] = fine
        for key, val in best.items():
            if val > 0 and (fine.get(key, 0.0) - val) / val > growth_tol:
                report["flags"].append(key)
    return report


def standard_battery(k0=2.0):
    """Tensor products of x-shapes and algebraically decaying y-profiles.

    x-shapes: Gaussian, Witch of Agnesi, Gaussian wave packet.
    y-profiles: ``(1+y)^-3``, ``y (1+y)^-4``, ``(1 + y^2)^-2``.
    """
    xs = {
        "gaussian": lambda x: np.exp(-(x**2)),
        "agnesi": lambda x: 1.0 / (1.0 + x**2),
        "wavepacket": lambda x: np.exp(-(x**2)) * np.cos(k0 * x),
    }
    ys = {
        "inv_cube": lambda y: (1.0 + y) ** -3,
        "y_inv_quartic": lambda y: y * (1.0 + y) ** -4,
        "lorentz_sq": lambda y: (1.0 + y**2) ** -2,
    }
    out = {}
    for xn, fx in xs.items():
        for yn, fy in ys.items():
            out[f"{xn}*{yn}"] = (lambda fx, fy: lambda x, y: fx(x) * fy(y))(fx, fy)
    return out
