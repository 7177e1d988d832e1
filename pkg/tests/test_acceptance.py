"""Acceptance criteria 1-8.

Each ``criterion_N`` measures its quantities once (cached) and returns
``{"checks": {name: (value, bound, ok)}, "runtime": s, "limit": s}``.  The
tests assert every check; the PASS/FAIL summary is printed at the end of the
pytest run, or by running this file directly.
"""

import functools
import math
import time

import numpy as np
import pytest

from oracles import blasius_reference, fd_green, periodic_hilbert_pressure
from tripledeck.airy import selftest
from tripledeck.fields import blasius_solve, reconstruct
from tripledeck.grid import Grid, RoughnessProfile, hilbert_pressure
from tripledeck.kernel import apply_green, build_mode_kernel
from tripledeck.linear import build_multiplier, multiplier_report, solve_linear, sublayer_residual
from tripledeck.nonlinear import solve_nonlinear, uniqueness_probe
from tripledeck.norms import proposition_ratios, standard_battery

TITLES = {
    1: "Airy suite",
    2: "multiplier positivity and |m| >= 1/4",
    3: "Green kernel vs finite differences",
    4: "linear solve residual and laws",
    5: "nonlinear convergence and scaling",
    6: "uniqueness probe",
    7: "inequality ratios stable",
    8: "reconstruction",
}
RESULTS = {}


def _below(value, bound):
    return (float(value), bound, bool(value < bound))


def _within(value, target, tol):
    return (float(value), f"{target} +/- {tol}", bool(abs(value - target) <= tol))


def _record(n, checks, runtime, limit):
    checks = dict(checks)
    checks["runtime [s]"] = _below(runtime, limit)
    RESULTS[n] = checks
    return checks


def summary_lines():
    lines = []
    for n in sorted(RESULTS):
        checks = RESULTS[n]
        ok = all(c[2] for c in checks.values())
        failed = [k for k, c in checks.items() if not c[2]]
        detail = "" if ok else " (failed: " + "; ".join(
            f"{k} = {checks[k][0]:.3e}, need {checks[k][1]}" for k in failed) + ")"
        lines.append(f"criterion {n} [{TITLES[n]}]: {'PASS' if ok else 'FAIL'}{detail}")
    return lines


# ---------------------------------------------------------------- shared setup


@functools.lru_cache(maxsize=None)
def _m20():
    grid = Grid(L=40.0, n_x=512, m_height=20.0, n_y=513)
    table = build_multiplier(grid)
    kernel = build_mode_kernel(grid.xi, grid)
    unit = RoughnessProfile.gaussian(grid)
    return grid, table, kernel, unit.scaled(1e-3 / unit.h2_norm)


@functools.lru_cache(maxsize=None)
def _state20():
    grid, table, kernel, bump = _m20()
    return solve_nonlinear(bump, grid, table=table, kernel=kernel)


def _smooth_profile(rng, y, m_height):
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    t = y / m_height
    return (c[0] + c[1] * t + c[2] * t**2) * np.exp(-rng.uniform(1.0, 4.0) * t)


def _rel(f, ref):
    return float(np.max(np.abs(f - ref)) / np.max(np.abs(ref)))


# ---------------------------------------------------------------- criteria


@functools.lru_cache(maxsize=None)
def criterion_1():
    t0 = time.perf_counter()
    res = selftest()
    runtime = time.perf_counter() - t0
    return _record(1, {
        "Wronskian error": _below(res["wronskian_max_error"], 1e-10),
        "|int Ai - 1/3|": _below(res["integral_error"], 1e-10),
        "zero arg deviation": _below(res["zero_arg_max_deviation"], 1e-8),
        "max |C(zero)|": _below(res["zero_max_abs_c"], 1e-6),
        "zeros found": (len(res["zeros"]), ">= 10", len(res["zeros"]) >= 10),
    }, runtime, 5.0)


@functools.lru_cache(maxsize=None)
def criterion_2():
    t0 = time.perf_counter()
    checks = {}
    for m_height in (10.0, 30.0, 50.0):
        rep = multiplier_report(build_multiplier(Grid(L=40.0, n_x=512, m_height=m_height, n_y=513)))
        low = min(rep["min_re_p_rotated_scan"], rep["min_re_p_rotated_modes"])
        checks[f"M={m_height:g} min Re(p/rot)"] = (low, "> 0", bool(rep["positivity_holds"] and low > 0))
        checks[f"M={m_height:g} min |m| below a0"] = (
            rep["min_abs_m_below_a0"], ">= 0.25", bool(rep["quarter_bound_holds"]))
    return _record(2, checks, time.perf_counter() - t0, 10.0)


@functools.lru_cache(maxsize=None)
def criterion_3():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    m_height = 0.5
    grid = Grid(m_height=m_height, n_y=513)
    worst = 0.0
    for xi in 10.0 ** rng.uniform(-6.0, 3.0, size=50):
        h = _smooth_profile(rng, grid.y, m_height)
        f = apply_green(build_mode_kernel(xi, grid), h).f_hat
        worst = max(worst, _rel(f, fd_green(xi, h, m_height, grid.n_y)))

    slopes = []
    sizes = np.array([129, 257, 513, 1025])
    for xi in (1e-3, 1.0, 1e3):
        errs = []
        for n in sizes:
            g = Grid(m_height=m_height, n_y=int(n))
            h = _smooth_profile(np.random.default_rng(7), g.y, m_height)
            errs.append(_rel(apply_green(build_mode_kernel(xi, g), h).f_hat,
                             fd_green(xi, h, m_height, g.n_y)))
        slopes.append(np.polyfit(np.log(sizes), np.log(errs), 1)[0])
    worst_slope = max(slopes, key=lambda s: abs(s + 2.0))

    g1 = Grid(m_height=1.0, n_y=513)
    h = _smooth_profile(np.random.default_rng(11), g1.y, 1.0)
    sizes_low = [float(np.linalg.norm(apply_green(build_mode_kernel(xi, g1), h).f_hat))
                 for xi in np.geomspace(1e-8, 1e-2, 25)]
    spread = max(sizes_low) / min(sizes_low) - 1.0
    return _record(3, {
        "max rel error (50 pairs, M=0.5)": _below(worst, 1e-5),
        "refinement slope": _within(worst_slope, -2.0, 0.2),
        "low-frequency spread": _below(spread, 0.01),
    }, time.perf_counter() - t0, 30.0)


@functools.lru_cache(maxsize=None)
def criterion_4():
    t0 = time.perf_counter()
    grid = Grid(L=40.0, n_x=512, m_height=30.0, n_y=513)
    table = build_multiplier(grid)
    kernel = build_mode_kernel(grid.xi, grid)
    f = RoughnessProfile.gaussian(grid, amplitude=1e-3)
    sol = solve_linear(f, grid, table, kernel)
    res, scale = sublayer_residual(sol.omega_physical(), grid)
    f2 = RoughnessProfile.wavepacket(grid, amplitude=1e-3, width=2.0)
    a, b = 0.3, -1.7
    s2 = solve_linear(f2, grid, table, kernel)
    s12 = solve_linear(RoughnessProfile(a * f.samples + b * f2.samples, grid), grid, table, kernel)
    comb = a * sol.omega0.modes + b * s2.omega0.modes
    lin = float(np.max(np.abs(s12.omega0.modes - comb)) / np.max(np.abs(comb)))
    return _record(4, {
        "PDE residual (relative)": _below(float(np.max(np.abs(res)) / scale), 1e-5),
        "wall law error": (sol.checks["wall_law_error"], "<= 1e-6",
                           sol.checks["wall_law_error"] <= 1e-6),
        "integral law error": (sol.checks["integral_law_error"], "<= 1e-6",
                               sol.checks["integral_law_error"] <= 1e-6),
        "linearity": (lin, "<= 1e-10", lin <= 1e-10),
    }, time.perf_counter() - t0, 20.0)


@functools.lru_cache(maxsize=None)
def criterion_5():
    t0 = time.perf_counter()
    grid, table, kernel, bump = _m20()
    st = _state20()
    ratios = st.diagnostics["increment_ratios"]
    amps = np.array([0.5, 1.0, 2.0])
    a_bar = [np.max(np.abs(solve_nonlinear(bump.scaled(c), grid, table=table, kernel=kernel).a_bar))
             for c in amps]
    slope = np.polyfit(np.log(amps), np.log(a_bar), 1)[0]
    zero = solve_nonlinear(RoughnessProfile(np.zeros(grid.n_x), grid), grid, table=table,
                           kernel=kernel)
    nonzero = int(np.count_nonzero(zero.omega) + np.count_nonzero(zero.a))
    return _record(5, {
        "converged": (int(st.converged), "1", bool(st.converged)),
        "max increment ratio": _below(max(ratios), 0.9),
        "full residual": _below(st.diagnostics["residual"], 1e-6),
        "slope of |A_bar| vs amplitude": _within(slope, 2.0, 0.2),
        "nonzero entries for F = 0": (nonzero, "0", nonzero == 0),
    }, time.perf_counter() - t0, 180.0)


@functools.lru_cache(maxsize=None)
def criterion_6():
    grid, table, kernel, bump = _m20()
    base = _state20()
    t0 = time.perf_counter()
    rep = uniqueness_probe(bump, grid, 5, seed=0, base=base, table=table, kernel=kernel)
    return _record(6, {
        "all starts converged": (int(rep["all_converged"]), "1", bool(rep["all_converged"])),
        "starts": (len(rep["starts"]), "5", len(rep["starts"]) == 5),
        "max pairwise distance": _below(rep["max_pairwise_distance"], 1e-6),
    }, time.perf_counter() - t0, 300.0)


@functools.lru_cache(maxsize=None)
def criterion_7():
    t0 = time.perf_counter()
    per_m = {}
    checks = {}
    for m_height in (20.0, 30.0, 50.0):
        rep = proposition_ratios(standard_battery(),
                                 Grid(L=40.0, n_x=512, m_height=m_height, n_y=513), refine=True)
        per_m[m_height] = rep["max"]
        for key, val in rep["max"].items():
            change = abs(rep["refined_max"][key] - val) / val
            checks[f"{key} doubling change, M={m_height:g}"] = _below(change, 0.1)
    for key in per_m[20.0]:
        vals = [per_m[m][key] for m in per_m]
        checks[f"{key} finite"] = (max(vals), "finite", bool(np.all(np.isfinite(vals))))
        checks[f"{key} spread over M"] = _below(max(vals) / min(vals) - 1.0, 0.1)
    return _record(7, checks, time.perf_counter() - t0, 60.0)


@functools.lru_cache(maxsize=None)
def criterion_8():
    grid, _, _, bump = _m20()
    st = _state20()
    t0 = time.perf_counter()
    sol = reconstruct(st, bump)

    g = Grid(L=20.0, n_x=512, m_height=10.0, n_y=129)
    p = hilbert_pressure(np.exp(-g.x**2), g)

    def a1(s):
        return -2 * s * math.exp(-s * s)

    def a2(s):
        return (4 * s * s - 2) * math.exp(-s * s)

    hil = max(abs(p[j] - periodic_hilbert_pressure(a1, a2, g.x[j], g.L))
              for j in range(0, g.n_x, 16))
    b = blasius_solve()
    return _record(8, {
        "Cauchy-Riemann residual": _below(sol.checks["cauchy_riemann"], 1e-6),
        "Hilbert vs P.V. quadrature": _below(hil, 1e-4),
        "Blasius f''(0)": _within(b.wall_shear, 0.332057, 1e-5),
        "Blasius f''(0) vs DOP853 shooting": _below(abs(b.wall_shear - blasius_reference()), 1e-5),
        "near-wall exponent": (b.near_wall_exponent(), ">= 3.5", b.near_wall_exponent() >= 3.5),
    }, time.perf_counter() - t0, 10.0)


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 9)}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    checks = CRITERIA[n]()
    failed = {k: c for k, c in checks.items() if not c[2]}
    assert not failed, f"criterion {n}: {failed}"


def test_kernel_matches_extrapolated_finite_differences():
    """The kernel against a Richardson-extrapolated finite-difference solution."""
    m_height = 0.5
    for xi in (1e-3, 1.0, 1e3):
        sols = []
        for n in (513, 1025, 2049):
            y = np.linspace(0.0, m_height, n)
            h = _smooth_profile(np.random.default_rng(7), y, m_height)
            sols.append(fd_green(xi, h, m_height, n)[:: (n - 1) // 512])
        r1 = (4 * sols[1] - sols[0]) / 3
        r2 = (4 * sols[2] - sols[1]) / 3
        ref = (16 * r2 - r1) / 15
        g = Grid(m_height=m_height, n_y=513)
        h = _smooth_profile(np.random.default_rng(7), g.y, m_height)
        assert _rel(apply_green(build_mode_kernel(xi, g), h).f_hat, ref) < 1e-10


def test_sustained_decay_at_larger_amplitude():
    grid, table, kernel, bump = _m20()
    st = solve_nonlinear(bump.scaled(1000.0), grid, table=table, kernel=kernel)
    ratios = st.diagnostics["increment_ratios"]
    assert st.converged and len(ratios) >= 5 and max(ratios) < 0.9


if __name__ == "__main__":
    for fn in CRITERIA.values():
        fn()
    print("\n".join(summary_lines()))
