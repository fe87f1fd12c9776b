"""Command-line front end.

::

    kerrkitten compute QUANTITY --config FILE
    kerrkitten reproduce TARGET [--fine] [--report FILE]

``compute`` writes CSV files and a ``manifest.txt`` of ``key=value`` lines
into the configured output directory.  Density matrices of evolved states
are cached there (``cache/*.rho``) unless ``cache = off``.

Exit codes: 0 success, 1 failed reproduction check or other library error,
2 configuration error, 3 under-resolved grid, 4 degenerate state.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys

import numpy as np

from . import __version__, kernels
from .config import RunConfig, load_config
from .decoherence import asymptotic_rho_phase, damped_rho
from .errors import ConfigError, DegenerateState, KerrKittenError, UnderResolvedGrid
from .fock_state import DensityMatrix, build_state, density, evolve, load_density, save_density
from .kitten import hs_scan, kitten_selection, scan_times, write_scan_csv
from .phase_space import (
    BOUNDARY_RATIO,
    append_manifest,
    default_grid,
    negativity_w,
    polar_q,
    supported_field,
    wehrl_entropy,
    write_field_csv,
)
from .quad_engine import PhaseSpaceGrid
from .reproduce import TARGETS, format_report, run_target
from .tomography import default_x_grid, tomogram_surface, write_tomogram_csv

__all__ = ["main", "cmd_compute", "cmd_reproduce", "QUANTITIES", "EXIT_CODES"]

QUANTITIES = ("wigner", "husimi", "polarq", "wehrl", "negativity", "rdist", "negativity_r", "tomogram", "hs_scan")
EXIT_CODES = {ConfigError: 2, UnderResolvedGrid: 3, DegenerateState: 4}
POLAR_POINTS = 360


# --------------------------------------------------------------------------
# states and cache


def _cache_key(cfg: RunConfig, t: float) -> str:
    p = cfg.params
    d = cfg.damping
    text = "|".join([
        repr(p.alpha), repr(p.r), repr(p.theta_sq), repr(p.c), str(p.kappa), repr(p.omega), repr(p.lambda_kerr),
        d.kind if d else "none", repr(d.gamma) if d else "0", repr(t), repr(cfg.eps_trunc),
    ])
    return hashlib.sha256(text.encode()).hexdigest()[:24]


def _compute_rho(cfg: RunConfig, t: float):
    p = cfg.params
    if math.isinf(t):
        if cfg.damping.kind == "phase":
            return asymptotic_rho_phase(p, cfg.eps_trunc)
        e = np.zeros((1, 1), dtype=complex)
        e[0, 0] = 1.0
        return DensityMatrix(e, {"channel": "amplitude", "t": "inf"})
    state = build_state(p, cfg.eps_trunc)
    if cfg.damping is None or cfg.damping.gamma == 0:
        return evolve(state, p, t / p.lambda_kerr) if t else state
    return damped_rho(density(state), p, cfg.damping, t / p.lambda_kerr)


def state_at(cfg: RunConfig, t: float):
    """State or density matrix at ``λt = t``, through the on-disk cache.

    With the cache enabled the result is always the density matrix as
    stored (hex floats, so a cache hit is bit-identical to a fresh
    computation).  With ``cache = off`` pure states stay pure.
    """
    if cfg.cache == "off":
        return _compute_rho(cfg, t)
    path = os.path.join(cfg.output_dir, "cache", _cache_key(cfg, t) + ".rho")
    if cfg.cache == "use" and os.path.exists(path):
        rho, _ = load_density(path)
        return rho
    src = _compute_rho(cfg, t)
    rho = density(src) if not isinstance(src, DensityMatrix) else src
    os.makedirs(os.path.dirname(path), exist_ok=True)
    save_density(path, rho, {"lambda_t": float(t), "eps_trunc": cfg.eps_trunc})
    return rho


# --------------------------------------------------------------------------
# compute


def _grid(cfg: RunConfig) -> PhaseSpaceGrid:
    if cfg.half_width is not None:
        return PhaseSpaceGrid(cfg.half_width, cfg.points_per_axis)
    return default_grid(cfg.params, cfg.points_per_axis)


def _tname(t: float) -> str:
    return "inf" if math.isinf(t) else f"{t:.6f}"


def _key(name: str, k: int, n: int) -> str:
    return name if n == 1 else f"{name}[{k}]"


def cmd_compute(quantity: str, cfg: RunConfig) -> dict:
    """Run one quantity for every configured time; returns the manifest entries."""
    if quantity not in QUANTITIES:
        raise ConfigError(f"unknown quantity {quantity!r}")
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    res: dict = {}
    meta = {"quantity": quantity, "config_hash": cfg.digest()}
    nt = len(cfg.times)

    if quantity == "hs_scan":
        spec = kitten_selection(cfg.kitten_p, cfg.params)
        t0, t1, ppp = cfg.scan
        ts = scan_times(t0, t1, ppp)
        d = hs_scan(cfg.params, spec, ts, cfg.eps_trunc)
        path = os.path.join(out, "hs_scan.csv")
        write_scan_csv(path, ts, d, meta)
        k = int(np.argmin(d))
        res.update({"d_hs_min": float(d[k]), "lambda_t_min": float(ts[k]), "scan_points": int(ts.size),
                    "theta_rot": spec.theta_rot, "files": path})
    elif quantity == "tomogram":
        x = default_x_grid(cfg.params, cfg.x_points)
        phi = np.linspace(0.0, 2.0 * math.pi, cfg.phi_points, endpoint=False)
        files = []
        for k, t in enumerate(cfg.times):
            tomo = tomogram_surface(state_at(cfg, t), x, phi)
            path = os.path.join(out, f"tomogram_t{_tname(t)}.csv")
            write_tomogram_csv(path, tomo, {**meta, "lambda_t": float(t)})
            files.append(path)
            norm = tomo.normalization()
            res[_key("lambda_t", k, nt)] = float(t)
            res[_key("tomogram_norm_max_dev", k, nt)] = float(np.max(np.abs(norm - 1.0)))
        res["files"] = ",".join(files)
    elif quantity == "polarq":
        th = np.linspace(0.0, 2.0 * math.pi, POLAR_POINTS, endpoint=False)
        files = []
        for k, t in enumerate(cfg.times):
            q = polar_q(state_at(cfg, t), th)
            path = os.path.join(out, f"polarq_t{_tname(t)}.csv")
            with open(path, "w") as fh:
                for key, v in {**meta, "lambda_t": float(t)}.items():
                    fh.write(f"# {key}={v!r}\n")
                fh.write("theta, q\n")
                for a, v in zip(th, q):
                    fh.write(f"{a!r}, {v!r}\n")
            files.append(path)
            res[_key("lambda_t", k, nt)] = float(t)
            res[_key("polarq_integral", k, nt)] = float(np.sum(q) * 2.0 * math.pi / POLAR_POINTS)
        res["files"] = ",".join(files)
    else:
        grid = _grid(cfg)
        rows, files = [], []
        for k, t in enumerate(cfg.times):
            src = state_at(cfg, t)
            res[_key("lambda_t", k, nt)] = float(t)
            if quantity in ("wigner", "negativity"):
                f = supported_field(src, "W", grid, workers=cfg.workers)
                res[_key("delta_w", k, nt)] = negativity_w(f)
                fields = [("wigner", f)] if quantity == "wigner" else []
            elif quantity in ("husimi", "wehrl"):
                f = supported_field(src, "Q", grid, workers=cfg.workers)
                res[_key("s_q", k, nt)] = wehrl_entropy(f)
                fields = [("husimi", f)] if quantity == "husimi" else []
            else:
                fields = []
                for s in cfg.sigmas:
                    f = supported_field(src, "R", grid, sigma=s, workers=cfg.workers)
                    res[_key(f"delta_r[sigma={s!r}]", k, nt)] = f.abs_integral() - 1.0
                    if quantity == "rdist":
                        fields.append((f"rdist_sigma{s:g}", f))
            res[_key("grid_half_width", k, nt)] = f.grid.half_width
            res[_key("grid_points_per_axis", k, nt)] = f.grid.points_per_axis
            for name, fld in fields:
                path = os.path.join(out, f"{name}_t{_tname(t)}.csv")
                write_field_csv(path, fld, {**meta, "lambda_t": float(t)})
                files.append(path)
            if quantity in ("wehrl", "negativity"):
                rows.append(t)
        if quantity in ("wehrl", "negativity"):
            path = os.path.join(out, f"{quantity}.csv")
            with open(path, "w") as fh:
                for key, v in meta.items():
                    fh.write(f"# {key}={v!r}\n")
                col = "s_q" if quantity == "wehrl" else "delta_w"
                fh.write(f"lambda_t, {col}\n")
                for k, t in enumerate(rows):
                    fh.write(f"{float(t)!r}, {res[_key(col, k, nt)]!r}\n")
            files.append(path)
        res["files"] = ",".join(files)

    manifest = os.path.join(out, "manifest.txt")
    entries = {"version": __version__, "backend": kernels.BACKEND, **meta,
               **{f"config.{k}": v for k, v in sorted(cfg.canonical().items())},
               "config.cache": cfg.cache, "boundary_ratio": BOUNDARY_RATIO, **res}
    if os.path.exists(manifest):
        os.unlink(manifest)
    append_manifest(manifest, entries)
    return entries


# --------------------------------------------------------------------------
# reproduce


def cmd_reproduce(target: str, fine: bool = False, report: str | None = None, workers: int = 1) -> int:
    """Run ``target`` (or ``all``), print and write the report; returns the exit status."""
    import time

    names = list(TARGETS) if target == "all" else [target]
    checks = []
    t0 = time.perf_counter()
    for name in names:
        checks += run_target(name, fine, workers)
    text = format_report(checks, time.perf_counter() - t0, __version__)
    sys.stdout.write(text)
    path = report or f"reproduce_{target}.txt"
    with open(path, "w") as fh:
        fh.write(text)
    return 0 if all(c.passed for c in checks) else 1


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kerrkitten", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"kerrkitten {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("compute", help="compute one quantity from a config file")
    c.add_argument("quantity", choices=QUANTITIES)
    c.add_argument("--config", required=True, help="key=value configuration file")
    r = sub.add_parser("reproduce", help="recompute reference values and compare")
    r.add_argument("target", choices=[*TARGETS, "all"])
    r.add_argument("--fine", action="store_true", help="801 instead of 401 points per axis")
    r.add_argument("--report", help="report file (default reproduce_TARGET.txt)")
    r.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "compute":
            entries = cmd_compute(args.quantity, load_config(args.config))
            for k, v in entries.items():
                if not k.startswith("config."):
                    print(f"{k}={v}")
            return 0
        return cmd_reproduce(args.target, args.fine, args.report, args.workers)
    except KerrKittenError as exc:
        print(f"kerrkitten: {type(exc).__name__}: {exc}", file=sys.stderr)
        for cls, code in EXIT_CODES.items():
            if isinstance(exc, cls):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
