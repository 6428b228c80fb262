"""Experiment orchestration and CSV output.

Numbers are written with Python's shortest round-trip float formatting
(``repr``), which reproduces every double exactly on re-reading; integers
are written as integers.
"""

from __future__ import annotations

import logging
import os
import warnings
from dataclasses import replace
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis
from .backward import BackwardResult, Termination, TrajectoryRecord, run_backward
from .config import Kind, RunConfig
from .errors import ChevronError, NonFiniteStateError
from .forward import AdmissibilityWarning, make_state, measure_decay_rate, run_forward, v1_norm
from .spectral import Grid1D

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

TRAJECTORY_HEADER = ("t", "tau", "l2_A", "h1_A", "l2_phi", "h1_phi", "energy", "max_abs_A")
SWEEP_HEADER = ("epsilon", "t_blow", "steps", "final_max_abs")
SNAPSHOT_HEADER = ("x", "re_A", "im_A", "phi")


def _num(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows) -> None:
    rows = list(rows)
    if not rows:
        raise ValueError(f"refusing to write {path} without data rows")
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        lines.append(",".join(_num(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _trajectory_row(r: TrajectoryRecord):
    return (r.t, r.tau_used, r.l2_A, r.h1_A, r.l2_phi, r.h1_phi, r.energy_F, r.max_abs_A)


def emit_plot_data(records, path) -> None:
    """Write trajectory records, or sweep rows ``(eps, t_blow, steps, final_max_abs)``, as CSV."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    if isinstance(records[0], TrajectoryRecord):
        write_csv(path, TRAJECTORY_HEADER, (_trajectory_row(r) for r in records))
    else:
        write_csv(path, SWEEP_HEADER, records)


def write_snapshot(path, grid: Grid1D, A: np.ndarray, phi: np.ndarray | None = None) -> None:
    phi = np.zeros(grid.n) if phi is None else phi
    write_csv(path, SNAPSHOT_HEADER, zip(grid.x, A.real, A.imag, phi))


def write_summary(path, items: dict) -> None:
    lines = []
    for k, v in items.items():
        if isinstance(v, float):
            v = repr(v)
        lines.append(f"{k} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- experiments


def _backward(cfg: RunConfig, out: Path) -> int:
    A0 = cfg.ic.evaluate(cfg.grid)
    res = run_backward(A0, cfg.grid, cfg.backward)
    emit_plot_data(res.records, out / "trajectory.csv")
    for i, (step, _t, A) in enumerate(res.snapshots):
        write_snapshot(out / f"snap_{i}.csv", cfg.grid, A)
    rep = res.report
    summary = {
        "terminated_by": rep.terminated_by.value,
        "t_blow": rep.t_blow,
        "steps_taken": rep.steps_taken,
        "final_max_abs": rep.final_max_abs,
        "final_l2": rep.final_l2,
        "last_tau": rep.last_tau,
        "energy_violations": rep.energy_violations,
    }
    write_summary(out / "summary.txt", summary)
    if rep.terminated_by is Termination.NON_FINITE:
        write_summary(out / "diagnostic.txt", {"error": "non-finite field during backward run", **summary})
        return EXIT_NUMERICAL
    return EXIT_OK


def run_sweep(cfg: RunConfig, threads: int = 1) -> tuple[analysis.SweepResult, dict[float, BackwardResult]]:
    A0 = cfg.ic.evaluate(cfg.grid)

    def one(eps):
        return eps, run_backward(A0, cfg.grid, replace(cfg.backward, eps=eps))

    eps_list = sorted(cfg.sweep_eps)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(one, eps_list))
    else:
        results = dict(map(one, eps_list))

    rows = []
    for eps in eps_list:
        rep = results[eps].report
        rows.append((eps, rep.t_blow, rep.steps_taken, rep.final_max_abs))
    sweep = analysis.SweepResult(rows)
    blown = [(e, t) for e, t, _, _ in rows if results[e].report.terminated_by is Termination.BLOW_UP]
    count = cfg.sweep_fit_count or len(blown)
    if len(blown) >= 3:
        sweep.fit = analysis.fit_blowup_scaling(blown[: max(count, 3)])
    return sweep, results


def _sweep(cfg: RunConfig, out: Path, threads: int) -> int:
    sweep, results = run_sweep(cfg, threads)
    emit_plot_data(sweep.rows, out / "sweep.csv")
    for i, (eps, *_rest) in enumerate(sweep.rows):
        emit_plot_data(results[eps].records, out / f"trajectory_{i}.csv")
    summary = {"runs": len(sweep.rows)}
    for i, (eps, *_rest) in enumerate(sweep.rows):
        summary[f"run_{i}.epsilon"] = eps
        summary[f"run_{i}.terminated_by"] = results[eps].report.terminated_by.value
    if sweep.fit is not None:
        summary["fit.exponent"] = sweep.fit.exponent
        summary["fit.intercept"] = sweep.fit.intercept
        summary["fit.residual"] = sweep.fit.residual
    write_summary(out / "summary.txt", summary)
    if any(r.report.terminated_by is Termination.NON_FINITE for r in results.values()):
        write_summary(out / "diagnostic.txt", {"error": "non-finite field in at least one sweep run"})
        return EXIT_NUMERICAL
    return EXIT_OK


def _forward_like(cfg: RunConfig, out: Path, stabilize: bool) -> int:
    grid = cfg.grid
    state = make_state(cfg.ic.evaluate(grid), cfg.phi_ic.evaluate(grid, "phi"), grid)
    summary = {}
    N = cfg.feedback_N
    if stabilize:
        summary["delta0"] = analysis.stabilization_delta0(cfg.chevron.c1, cfg.chevron.c2)
        if N is None:
            N = analysis.stabilization_mode_count(cfg.chevron.c1, cfg.chevron.c2, grid)
        summary["N"] = N
    elif N is None:
        N = 0
    fp = cfg.feedback(N)
    if stabilize and fp.mu == 0:
        fp = replace(fp, mu=1.0)
    summary["mu"] = fp.mu
    fw = cfg.forward
    if not cfg.chevron.admissible:
        warnings.warn("chevron parameters outside the known well-posed range", AdmissibilityWarning, stacklevel=2)
    try:
        records, final = run_forward(state, cfg.chevron, fp, fw.dt, fw.t_end, grid, fw.record_every, return_state=True)
    except NonFiniteStateError as exc:
        write_summary(out / "diagnostic.txt", {"error": str(exc)})
        return EXIT_NUMERICAL
    emit_plot_data(records, out / "trajectory.csv")
    if grid.ndim == 1:
        write_snapshot(out / "snap_final.csv", grid, final.A, final.phi)
    summary["t_end"] = records[-1].t
    summary["v1_initial"] = v1_norm(records[0])
    summary["v1_final"] = v1_norm(records[-1])
    summary["max_l2_A"] = max(r.l2_A for r in records)
    summary["max_l2_phi"] = max(r.l2_phi for r in records)
    if len(records) >= 10:
        try:
            summary["decay_rate"] = measure_decay_rate(records)
        except ChevronError:
            summary["decay_rate"] = "undefined"
    write_summary(out / "summary.txt", summary)
    return EXIT_OK


def _determining(cfg: RunConfig, out: Path) -> int:
    grid = cfg.grid
    pair = (
        (cfg.ic.evaluate(grid), cfg.phi_ic.evaluate(grid, "phi")),
        (cfg.ic2.evaluate(grid), cfg.phi_ic2.evaluate(grid, "phi")),
    )
    d = cfg.determining
    try:
        rep = analysis.determining_modes_experiment(pair, cfg.chevron, d.N, cfg.forward.dt, cfg.forward.t_end, grid, d.window)
    except NonFiniteStateError as exc:
        write_summary(out / "diagnostic.txt", {"error": str(exc)})
        return EXIT_NUMERICAL
    header = ("t", "full_distance", *(f"mode_{j}" for j in range(1, d.N + 1)))
    rows = [(t, dist, *modes) for t, dist, modes in zip(rep.window_ends, rep.full_distance, rep.mode_integrals)]
    write_csv(out / "determining.csv", header, rows)
    write_summary(out / "summary.txt", {
        "N": d.N,
        "window": d.window,
        "initial_distance": rep.initial_distance,
        "final_distance": rep.full_distance[-1] if rep.full_distance else rep.initial_distance,
        "modes_decay": rep.modes_decay,
        "full_decay": rep.full_decay,
        "consistent": rep.consistent,
    })
    return EXIT_OK


def analyze(cfg: RunConfig) -> dict:
    grid = cfg.grid
    L = grid.L if grid.ndim == 1 else grid.Lx
    res = {"L": float(L), "blowup_threshold": analysis.blowup_threshold(L)}
    psi0 = cfg.analyze.psi0
    if psi0 is not None:
        res["psi0"] = psi0
        try:
            res["T0_closed_form"] = analysis.blowup_lower_bound_time(psi0, L)
            res["T0_quadrature"] = analysis.blowup_lower_bound_time_quadrature(psi0, L)
        except ChevronError as exc:
            res["T0_closed_form"] = f"undefined ({exc})"
    c1, c2 = cfg.chevron.c1, cfg.chevron.c2
    if c1 < 1:
        res["delta0"] = analysis.stabilization_delta0(c1, c2)
        try:
            res["stabilization_N"] = analysis.stabilization_mode_count(c1, c2, grid)
        except ChevronError as exc:
            res["stabilization_N"] = f"unresolved ({exc})"
    d = analysis.DeterminingInputs(cfg.analyze.gamma, cfg.analyze.M_R, cfg.analyze.R)
    res["determining_threshold"] = analysis.determining_threshold(d)
    try:
        res["min_determining_modes"] = analysis.min_determining_modes(d, grid)
    except ChevronError as exc:
        res["min_determining_modes"] = f"unresolved ({exc})"
    return res


def run_experiment(cfg: RunConfig, out_dir: str | os.PathLike | None = None, threads: int = 1) -> int:
    """Run the configured experiment, write its files and return an exit code."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if cfg.kind is Kind.BACKWARD:
            return _backward(cfg, out)
        if cfg.kind is Kind.SWEEP:
            return _sweep(cfg, out, threads)
        if cfg.kind is Kind.FORWARD:
            return _forward_like(cfg, out, stabilize=False)
        if cfg.kind is Kind.STABILIZE:
            return _forward_like(cfg, out, stabilize=True)
        if cfg.kind is Kind.DETERMINING:
            return _determining(cfg, out)
        res = analyze(cfg)
        write_summary(out / "summary.txt", res)
        for k, v in res.items():
            print(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}")
        return EXIT_OK
    except OSError as exc:
        log.error("%s", exc)
        print(f"I/O error: {exc}")
        return EXIT_IO
    except ChevronError as exc:
        # parameter problems only detectable once the run is set up (e.g. unresolved mode counts)
        print(f"config error: {exc}")
        return EXIT_CONFIG
