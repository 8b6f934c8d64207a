"""Experiment orchestration: run a RunConfig, write CSV tables and a JSON manifest."""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, serialize
from .errors import G2KitError
from .forms import omega0, tau, tau_from_table
from .frames import random_frames, verify_frames
from .octonion import basis, cross

__all__ = ["RunResult", "run", "write_atomic", "format_value", "EXIT_OK", "EXIT_PARTIAL", "EXIT_FAILED"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_PARTIAL = 0, 1, 2

SPECTRUM_COLUMNS = ("epsilon", "lambda_minus", "lambda_plus", "bound", "norm_estimate", "slope_fit")
SWEEP_COLUMNS = ("epsilon", "newton_iters", "final_residual", "trace_distance_C0", "trace_distance_C1",
                 "fitted_order")
CALIBRATION_TOL = 1e-14
AXIOM_TOL = 1e-12
FRAME_TOL = 1e-11


def format_value(x) -> str:
    """CSV cell text: 12 significant digits for floats, '' for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"
    return format(x, ".12g")


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(v) for v in r])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def write_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the same directory and rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


@dataclass
class RunResult:
    exit_code: int
    files: list
    manifest: dict
    tables: dict = field(default_factory=dict)


@dataclass
class _Cell:
    key: str
    status: str = "ok"
    detail: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# commands


def _algebra_check(cfg: RunConfig, executor):
    om = omega0()
    rows, cells = [], []
    for i, j, k in itertools.combinations(range(1, 8), 3):
        lhs = float(cross(basis(i), basis(j)) @ basis(k))
        rhs = float(om(basis(i), basis(j), basis(k)))
        err = abs(lhs - rhs)
        ok = err <= CALIBRATION_TOL
        rows.append((i, j, k, lhs, rhs, err, ok))
        cells.append(_Cell(f"{i}{j}{k}", "ok" if ok else "failed"))

    rng = np.random.default_rng(cfg.seed)
    n = cfg["samples"]
    # unit vectors, so the absolute tolerance is scale free
    u, v, w = (a / np.linalg.norm(a, axis=1, keepdims=True) for a in rng.standard_normal((3, n, 7)))
    uv = cross(u, v)
    orth = max(np.abs(np.einsum("ni,ni->n", uv, u)).max(), np.abs(np.einsum("ni,ni->n", uv, v)).max())
    gram = (np.einsum("ni,ni->n", u, u) * np.einsum("ni,ni->n", v, v) - np.einsum("ni,ni->n", u, v) ** 2)
    area = np.abs(np.einsum("ni,ni->n", uv, uv) - gram).max()
    two_path = float(np.abs(tau(u, v, w) - tau_from_table(u, v, w)).max())
    summary = {"orthogonality": float(orth), "area": float(area), "tau_two_path": two_path}
    for name, val in summary.items():
        cells.append(_Cell(name, "ok" if val <= AXIOM_TOL else "failed", {"max_error": val}))
    if cfg["frames"]:
        errs = verify_frames(np.stack([f.vectors for f in random_frames(rng, cfg["frames"])]))
        worst = float(np.max(errs))
        summary["frames"] = worst
        cells.append(_Cell("frames", "ok" if worst <= FRAME_TOL else "failed", {"max_error": worst}))
    table = _csv_text(("i", "j", "k", "cross_product", "omega0", "abs_error", "pass"), rows)
    return {"calibration.csv": table}, cells, {"summary": summary}


def _domain(eps, cfg, n1, n2, n3):
    from .thin.domain import ThinDomain

    warp = cfg["warp"]
    twist = cfg["twist"]
    if warp.is_flat:
        return ThinDomain(eps, n1, n2, n3, twist=twist)
    return ThinDomain.with_warp(eps, n1, n2, n3, warp, twist=twist)


def _spectrum_cell(eps, cfg, n1, n2, n3):
    from .thin.operator import first_eigenvalue, lambda_dbar

    d = _domain(eps, cfg, n1, n2, n3)
    lam_d, lam_ds = lambda_dbar(d)
    cap = 2.0 / eps ** 2
    lm = first_eigenvalue(d, "minus")
    lp = first_eigenvalue(d, "plus")
    bound = min(lam_d, lam_ds, cap)
    tol = 1e-4 * max(1.0, 1.0 / eps ** 2)
    holds = lm >= min(lam_d, cap) - tol and lp >= min(lam_ds, cap) - tol
    return (lm, lp, bound), {"lambda_dbar": lam_d, "lambda_dbar_adjoint": lam_ds, "bound_holds": bool(holds)}


def _map_cells(executor, fn, items):
    """Run fn over items, turning library errors into failed cells; order follows items."""

    def guarded(item):
        try:
            return fn(item), None
        except (G2KitError, ArithmeticError, np.linalg.LinAlgError) as exc:
            log.warning("cell %r failed: %s", item, exc)
            return None, f"{type(exc).__name__}: {exc}"

    return list(executor.map(guarded, items) if executor is not None else map(guarded, items))


def _spectrum(cfg: RunConfig, executor):
    grid = cfg["epsilon_grid"]
    out = _map_cells(executor, lambda e: _spectrum_cell(e, cfg, cfg["n1"], cfg["n2"], cfg["n3"]), grid)
    rows, cells = [], []
    for eps, (res, err) in zip(grid, out):
        if err is not None:
            rows.append((eps, float("nan"), float("nan"), float("nan"), None, None))
            cells.append(_Cell(f"epsilon={eps!r}", "failed", {"error": err}))
            continue
        (lm, lp, bound), detail = res
        rows.append((eps, lm, lp, bound, None, None))
        cells.append(_Cell(f"epsilon={eps!r}", "ok", detail))
    return {"spectrum.csv": _csv_text(SPECTRUM_COLUMNS, rows)}, cells, {}


def _scaling(cfg: RunConfig, executor):
    from .thin.study import fit_slope, inverse_norm_cell

    grid = cfg["epsilon_grid"]
    n1, n2, n3 = cfg["n1"], cfg["n2"], cfg["n3"]

    def cell(item):
        index, eps = item
        d = _domain(eps, cfg, n1, n2, n3)
        rng = np.random.default_rng([cfg.seed, index])
        row = inverse_norm_cell(d, cfg["norm"], cfg["alpha"], cfg["probes"], rng)
        eig, detail = _spectrum_cell(eps, cfg, n1, n2, n3)
        detail["best_family"] = row.best_family
        return eig, row.norm_estimate, detail

    out = _map_cells(executor, cell, list(enumerate(grid)))
    good = [(eps, r[1]) for eps, (r, err) in zip(grid, out) if err is None]
    slope = fit_slope(*zip(*good))[0] if len(good) > 1 else float("nan")
    rows, cells = [], []
    for eps, (res, err) in zip(grid, out):
        if err is not None:
            rows.append((eps, float("nan"), float("nan"), float("nan"), float("nan"), slope))
            cells.append(_Cell(f"epsilon={eps!r}", "failed", {"error": err}))
            continue
        (lm, lp, bound), est, detail = res
        rows.append((eps, lm, lp, bound, est, slope))
        cells.append(_Cell(f"epsilon={eps!r}", "ok", detail))
    extra = {"norm": cfg["norm"], "slope_fit": slope,
             "notes": ["norm estimates are maxima over random probes (lower bounds)"]}
    return {"scaling.csv": _csv_text(SPECTRUM_COLUMNS, rows)}, cells, extra


def _gamma(cfg):
    from .instanton.newton import GammaPath

    return GammaPath(cfg["gamma"], cfg["amplitude"])


TRACE_COLUMNS = ("iteration", "residual_c0", "step", "gmres_iterations", "increment_c0", "cokernel_mu",
                 "boundary_deviation", "plane_coassociative_residual")


def _newton(cfg: RunConfig, executor):
    from .errors import SolverError
    from .instanton.newton import almost_instanton, newton_solve, trace_distances
    from .thin.domain import ThinDomain

    gamma = _gamma(cfg)
    d = ThinDomain(cfg["epsilon"], cfg["n1"], cfg["n2"], cfg["n3"])
    init = almost_instanton(d, gamma)
    try:
        result = newton_solve(init, tol=cfg["tol"], max_iter=cfg["max_iter"], gamma=gamma)
        trace, cell = result.trace, _Cell(f"epsilon={cfg['epsilon']!r}", "ok")
        c0, c1 = trace_distances(result.graph, gamma)
        cell.detail.update(trace_distance_C0=c0, trace_distance_C1=c1, iterations=result.iterations)
    except SolverError as exc:
        trace = list(exc.trace or [])
        cell = _Cell(f"epsilon={cfg['epsilon']!r}", "failed", {"error": str(exc)})
    rows = [tuple(t[c] for c in TRACE_COLUMNS) for t in trace]
    files = {
        "newton_trace.csv": _csv_text(TRACE_COLUMNS, rows),
        "newton_trace.json": json.dumps(_jsonable({"epsilon": cfg["epsilon"], "trace": trace}),
                                        indent=2, sort_keys=True) + "\n",
    }
    return files, [cell], {}


def _sweep(cfg: RunConfig, executor):
    from .instanton.newton import correspondence_sweep

    report = correspondence_sweep(cfg["epsilon_grid"], _gamma(cfg), cfg["n1"], cfg["n2"], cfg["n3"],
                                  cfg["tol"], cfg["max_iter"], executor)
    rows, cells = [], []
    for r in report.rows:
        rows.append((r.epsilon, r.newton_iters, r.final_residual, r.trace_distance_c0, r.trace_distance_c1,
                     report.fitted_order))
        cells.append(_Cell(f"epsilon={r.epsilon!r}", "ok" if r.status == "ok" else "failed", {
            "status": r.status,
            "boundary_deviation": r.boundary_deviation,
            "plane_coassociative_residual": r.plane_coassociative_residual,
            "quadratic_degraded": r.quadratic_degraded,
        }))
    traces = {format_value(r.epsilon): t for r, t in zip(report.rows, report.traces)}
    files = {
        "sweep.csv": _csv_text(SWEEP_COLUMNS, rows),
        "sweep_traces.json": json.dumps(_jsonable(traces), indent=2, sort_keys=True) + "\n",
    }
    extra = {"fitted_order": report.fitted_order, "discretization_error": report.discretization_error,
             "notes": list(report.notes)}
    return files, cells, extra


_COMMANDS = {
    "algebra-check": _algebra_check,
    "spectrum": _spectrum,
    "scaling": _scaling,
    "newton": _newton,
    "sweep": _sweep,
}


def run(cfg: RunConfig, out_dir=None, threads: int = 1) -> RunResult:
    """Execute ``cfg`` and write its files plus ``manifest.json`` into ``out_dir``.

    Exit code 0 when every cell succeeded, 2 when some failed.  Configuration
    and I/O problems surface as exceptions (the CLI maps them to 1).
    """
    out = Path(out_dir if out_dir is not None else (cfg.out or "."))
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    with pool if pool is not None else nullcontext():
        files, cells, extra = _COMMANDS[cfg.command](cfg, pool)
    elapsed = time.perf_counter() - start

    written = []
    for name in sorted(files):
        write_atomic(out / name, files[name])
        data = files[name].encode("utf-8")
        written.append({"path": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
    failed = [c for c in cells if c.status != "ok"]
    code = EXIT_PARTIAL if failed else EXIT_OK
    config_text = serialize(cfg)
    manifest = {
        "config": cfg.echo(),
        "config_hash": _git_blob_hash(config_text.encode("utf-8")),
        "wall_clock_seconds": elapsed,
        "threads": threads,
        "exit_code": code,
        "cells": [{"key": c.key, "status": c.status, **c.detail} for c in cells],
        "files": written,
        **extra,
    }
    manifest = _jsonable(manifest)
    write_atomic(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return RunResult(code, [w["path"] for w in written] + ["manifest.json"], manifest, files)
