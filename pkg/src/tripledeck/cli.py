"""
Command-line front end.

Usage::

    tripledeck --config run.json --out results/
    tripledeck --mode airy-selftest --out selftest/

Writes ``fields.csv``, ``displacement.csv``, ``history.csv`` and
``report.json`` (plus ``scan.csv`` or ``ratios.csv`` for the diagnostic
modes).  Exit codes: 0 success, 1 configuration error, 2 divergence,
3 near-singular multiplier, 4 any other solver failure.
"""

import argparse
from dataclasses import asdict, dataclass, field, fields
import json
import logging
import math
import os
from pathlib import Path
import sys
import time
import warnings

import numpy as np

from .errors import ConfigError, DivergenceError, NearSingularMultiplierError, TripleDeckError

__all__ = ["RunConfig", "RunReport", "parse_config", "run", "main", "MODES", "PRESETS"]

log = logging.getLogger(__name__)

MODES = ("linear", "nonlinear", "multiplier-scan", "airy-selftest", "norms-battery")
PRESETS = ("gaussian", "agnesi", "wavepacket")
EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_SINGULAR, EXIT_FAILED = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    """Validated run parameters; keys match the config file."""

    mode: str = "linear"
    L: float = 40.0
    n_x: int = 512
    M: float = 30.0
    n_y: int = 513
    roughness: str = "gaussian"
    amplitude: float = 1e-3
    width: float = 1.0
    k0: float = 2.0
    samples: str = None
    tol: float = 1e-8
    max_iter: int = 50
    alpha: float = 1.0
    epsilon: float = 1.0 / 6.0
    damping: float = 1.0
    lam: float = 1.0
    n_starts: int = 0
    seed: int = 0
    threads: int = 1
    out: str = "tripledeck-out"

    def grid(self):
        from .grid import Grid

        return Grid(self.L, self.n_x, self.M, self.n_y, self.threads)


_INT_KEYS = {"n_x", "n_y", "max_iter", "n_starts", "seed", "threads"}
_STR_KEYS = {"mode", "roughness", "samples", "out"}


def _coerce(key, value):
    if key in _STR_KEYS:
        return None if value is None else str(value)
    if key in _INT_KEYS:
        if isinstance(value, bool):
            raise ValueError("expected an integer")
        if isinstance(value, float) and not value.is_integer():
            raise ValueError("expected an integer")
        return int(value)
    if isinstance(value, bool):
        raise ValueError("expected a number")
    out = float(value)
    if not math.isfinite(out):
        raise ValueError("expected a finite number")
    return out


def _read_pairs(text):
    """``key = value`` lines; ``#`` starts a comment.  Returns ``[(line, key, value)]``."""
    pairs, errors = [], []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {no}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        pairs.append((f"line {no}", key, value))
    return pairs, errors


def parse_config(source="", overrides=None):
    """Build a :class:`RunConfig` from a path or inline text.

    Parameters
    ----------
    source : str or Path
        A file path, or the document itself: JSON (an object) or
        ``key = value`` lines.  Empty text gives all defaults.
    overrides : dict, optional
        Applied after the document (command-line flags).

    Raises
    ------
    ConfigError
        Listing every malformed value, unknown key and violated constraint.
    """
    text = str(source)
    if isinstance(source, Path) or ("\n" not in text and os.path.isfile(text)):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError([f"cannot read {source}: {exc}"]) from exc
    errors = []
    if text.strip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"line {exc.lineno}: invalid JSON ({exc.msg})"]) from exc
        if not isinstance(doc, dict):
            raise ConfigError(["top-level JSON value must be an object"])
        pairs = [(f"key {k!r}", k, v) for k, v in doc.items()]
    else:
        pairs, errors = _read_pairs(text)
    pairs += [("override", k, v) for k, v in (overrides or {}).items() if v is not None]

    known = {f.name for f in fields(RunConfig)}
    values = {}
    for where, key, value in pairs:
        if key not in known:
            errors.append(f"{where}: unknown key {key!r}")
            continue
        try:
            values[key] = _coerce(key, value)
        except (TypeError, ValueError) as exc:
            errors.append(f"{where}: bad value {value!r} for {key!r} ({exc})")
    cfg = RunConfig(**values)
    errors += _validate(cfg)
    if errors:
        raise ConfigError(errors)
    lo, hi = 2.0 / 3.0, 7.0 / 3.0
    if not lo < cfg.alpha <= hi:
        warnings.warn(f"alpha = {cfg.alpha} is outside ({lo:.4f}, {hi:.4f}]", stacklevel=2)
    return cfg


def _validate(cfg):
    errs = []
    if cfg.mode not in MODES:
        errs.append(f"mode must be one of {', '.join(MODES)}; got {cfg.mode!r}")
    if cfg.n_x <= 0 or cfg.n_x % 2:
        errs.append(f"n_x must be even and positive; got {cfg.n_x}")
    if cfg.n_y < 3 or cfg.n_y % 2 == 0:
        errs.append(f"n_y must be odd and at least 3; got {cfg.n_y}")
    for key in ("L", "M", "width", "tol", "lam", "epsilon"):
        if getattr(cfg, key) <= 0:
            errs.append(f"{key} must be positive; got {getattr(cfg, key)}")
    if cfg.amplitude < 0:
        errs.append(f"amplitude must be nonnegative; got {cfg.amplitude}")
    if cfg.max_iter < 1:
        errs.append(f"max_iter must be at least 1; got {cfg.max_iter}")
    if not 0 < cfg.damping <= 1:
        errs.append(f"damping must lie in (0, 1]; got {cfg.damping}")
    if cfg.alpha <= 0:
        errs.append(f"alpha must be positive; got {cfg.alpha}")
    if cfg.epsilon > min(1.0 / 6.0, cfg.alpha / 2.0) + 1e-15:
        errs.append(f"epsilon must not exceed min(1/6, alpha/2); got {cfg.epsilon}")
    if cfg.threads < 1:
        errs.append(f"threads must be at least 1; got {cfg.threads}")
    if cfg.n_starts < 0:
        errs.append(f"n_starts must be nonnegative; got {cfg.n_starts}")
    if cfg.samples is None and cfg.roughness not in PRESETS:
        errs.append(f"roughness must be one of {', '.join(PRESETS)}; got {cfg.roughness!r}")
    if cfg.samples is not None and not os.path.isfile(cfg.samples):
        errs.append(f"samples file {cfg.samples!r} does not exist")
    return errs


@dataclass
class RunReport:
    """Everything a run produced, JSON-serializable."""

    config: dict
    history: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    status: str = "ok"
    exit_code: int = 0

    def to_json(self):
        return json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ---------------------------------------------------------------- output


def _write_csv(path, header, columns):
    data = np.column_stack([np.asarray(c, dtype=float).ravel() for c in columns]) if columns else np.empty((0, len(header)))
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.16e")


def _write_fields(out, grid, u, v, omega):
    xx, yy = np.meshgrid(grid.x, grid.y, indexing="ij")
    _write_csv(out / "fields.csv", ["x", "y", "u", "v", "omega"], [xx, yy, u, v, omega])


def _write_displacement(out, grid, a, p, f):
    _write_csv(out / "displacement.csv", ["x", "A", "P", "F"], [grid.x, a, p, f])


def _write_history(out, rows):
    cols = list(zip(*rows)) if rows else []
    _write_csv(out / "history.csv", ["k", "increment", "residual", "wall_time"], cols)


# ---------------------------------------------------------------- pipelines


def _roughness(cfg, grid):
    from .grid import RoughnessProfile

    if cfg.samples is not None:
        data = np.loadtxt(cfg.samples, delimiter=",", ndmin=1)
        if data.ndim == 2:
            data = data[:, -1]
        return RoughnessProfile(data, grid, name="samples")
    return RoughnessProfile.preset(cfg.roughness, grid, cfg.amplitude, cfg.width, cfg.k0)


def _norm_dict(omega, a, cfg, grid):
    from .norms import vorticity_norms

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return vorticity_norms(omega, cfg.alpha, grid, a=a).to_dict()


def _run_linear(cfg, out, rep, clock):
    from .kernel import build_mode_kernel
    from .linear import build_multiplier, multiplier_report, solve_linear, sublayer_residual

    grid = cfg.grid()
    f = _roughness(cfg, grid)
    table = clock("multiplier", build_multiplier, grid)
    kernel = clock("kernel", build_mode_kernel, grid.xi, grid)
    sol = clock("solve", solve_linear, f, grid, table, kernel)
    omega = sol.omega_physical()
    u, v = sol.velocities()
    res, scale = sublayer_residual(omega, grid)
    rep.diagnostics.update(sol.checks)
    rep.diagnostics["pde_residual"] = float(np.max(np.abs(res)) / scale) if scale > 0 else 0.0
    rep.diagnostics["f_h2"] = f.h2_norm
    rep.diagnostics["f_tail_energy"] = f.tail_energy
    rep.diagnostics["multiplier"] = multiplier_report(table).to_dict()
    rep.norms = _norm_dict(omega, sol.a0, cfg, grid)
    clock("write", _write_fields, out, grid, u, v, omega)
    _write_displacement(out, grid, sol.a0, sol.pressure(), f.samples)
    _write_history(out, [])


def _run_nonlinear(cfg, out, rep, clock):
    from .fields import reconstruct
    from .kernel import build_mode_kernel
    from .linear import build_multiplier
    from .nonlinear import SolverOptions, solve_nonlinear, uniqueness_probe

    grid = cfg.grid()
    f = _roughness(cfg, grid)
    table = clock("multiplier", build_multiplier, grid)
    kernel = clock("kernel", build_mode_kernel, grid.xi, grid)
    opts = SolverOptions(cfg.tol, cfg.max_iter, cfg.alpha, cfg.epsilon, cfg.damping)
    try:
        st = clock("solve", solve_nonlinear, f, grid, opts, table, kernel)
    except DivergenceError as exc:
        rep.history = [list(r) for r in (exc.history or [])]
        _write_history(out, exc.history or [])
        raise
    rep.history = [list(r) for r in st.history]
    rep.diagnostics.update(st.diagnostics)
    if np.any(f.samples):
        phys = clock("reconstruct", reconstruct, st, f, lam=cfg.lam)
        rep.diagnostics["reconstruction"] = dict(phys.checks)
    if cfg.n_starts > 0:
        rep.diagnostics["uniqueness"] = clock(
            "uniqueness", uniqueness_probe, f, grid, cfg.n_starts, cfg.seed, opts, st, table, kernel
        )
    rep.norms = _norm_dict(st.omega, st.a, cfg, grid)
    clock("write", _write_fields, out, grid, st.u, st.v, st.omega)
    _write_displacement(out, grid, st.a, st.p, f.samples)
    _write_history(out, st.history)


def _run_scan(cfg, out, rep, clock):
    from .linear import build_multiplier, multiplier_report, multiplier_scan

    grid = cfg.grid()
    table = clock("multiplier", build_multiplier, grid)
    rep.diagnostics.update(clock("report", multiplier_report, table).to_dict())
    r = np.linspace(0.0, 50.0, 2001)[1:]
    _write_csv(out / "scan.csv", ["r", "re_p_rotated"], [r, multiplier_scan(r)])
    _write_csv(
        out / "multiplier.csv",
        ["xi", "re_m", "im_m", "abs_m", "inv_m_bound_ratio"],
        [table.xi, table.m.real, table.m.imag, np.abs(table.m), table.inv_m_bound_ratio],
    )


def _run_selftest(cfg, out, rep, clock):
    from .airy import selftest

    res = clock("selftest", selftest)
    rep.diagnostics.update(res)
    rep.diagnostics["passed"] = bool(
        res["wronskian_max_error"] < 1e-10
        and res["integral_error"] < 1e-10
        and res["zero_arg_max_deviation"] < 1e-8
        and res["zero_max_abs_c"] < 1e-6
    )


def _run_battery(cfg, out, rep, clock):
    from .norms import proposition_ratios, standard_battery

    grid = cfg.grid()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = clock("battery", proposition_ratios, standard_battery(cfg.k0), grid, cfg.alpha,
                    cfg.epsilon, True)
    rep.diagnostics.update({k: v for k, v in res.items() if k != "rows"})
    with open(out / "ratios.csv", "w", encoding="utf-8") as fh:
        fh.write("inequality,field,ratio\n")
        for ineq, name, val in res["rows"]:
            fh.write(f"{ineq},{name},{val:.16e}\n")


_PIPELINES = {
    "linear": _run_linear,
    "nonlinear": _run_nonlinear,
    "multiplier-scan": _run_scan,
    "airy-selftest": _run_selftest,
    "norms-battery": _run_battery,
}


def run(cfg):
    """Execute one mode and write its artifacts.

    Returns
    -------
    RunReport
        ``exit_code`` follows the module-level contract; the report is
        written to ``report.json`` even when the solver fails.
    """
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rep = RunReport(config=asdict(cfg))

    def clock(name, fn, *args, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kw)
        finally:
            rep.timings[name] = rep.timings.get(name, 0.0) + time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        _PIPELINES[cfg.mode](cfg, out, rep, clock)
    except DivergenceError as exc:
        rep.status, rep.exit_code = f"diverged: {exc}", EXIT_DIVERGED
        rep.diagnostics["smallness_margin"] = exc.margin
    except NearSingularMultiplierError as exc:
        rep.status, rep.exit_code = f"near-singular multiplier: {exc}", EXIT_SINGULAR
        rep.diagnostics["singular_mode"] = exc.index
    except TripleDeckError as exc:
        rep.status, rep.exit_code = f"failed: {type(exc).__name__}: {exc}", EXIT_FAILED
    rep.timings["total"] = time.perf_counter() - t0
    (out / "report.json").write_text(rep.to_json(), encoding="utf-8")
    return rep


def _build_parser():
    p = argparse.ArgumentParser(prog="tripledeck", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("--config", help="JSON or key=value config file")
    p.add_argument("--mode", choices=MODES, help="override the config mode")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="FFT worker threads (env TRIPLEDECK_THREADS)")
    p.add_argument("--seed", type=int, help="seed for randomized restarts")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return p


def main(argv=None):
    """Entry point; returns the process exit code."""
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = args.threads
    if threads is None and os.environ.get("TRIPLEDECK_THREADS"):
        threads = os.environ["TRIPLEDECK_THREADS"]
    overrides = {"mode": args.mode, "out": args.out, "threads": threads, "seed": args.seed}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = parse_config(Path(args.config) if args.config else "", overrides)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = run(cfg)
    if rep.exit_code:
        print(rep.status, file=sys.stderr)
    else:
        print(f"{cfg.mode}: ok -> {Path(cfg.out) / 'report.json'}")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
