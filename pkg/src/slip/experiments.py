"""Desk-scale experiment harness: strategy grids, oracle checks, sensitivity.

Three experiment kinds are supported:

 - strategies: the four variant combinations of radius strategy (R = reset,
   D = doubling) and initialization (0 = zero start per N, P = mesh
   sequencing) over a list of working grids; emits a variant-by-N summary.
 - slip_vs_oracle: reset/zero runs per grid, and for grids small enough to
   enumerate, the r-optimality gaps of the final iterates for r in {1,2,3,4}.
 - sensitivity: random initial controls (per-cell i.i.d. uniform over the
   levels) across a seed count and a list of alphas; per-run final objective,
   TV and stationarity measure.

Every run writes its own subdirectory (iteration log CSV, final control
JSON, stationarity-vs-iteration CSV, and for the first and last grid also
control/trajectory CSVs); summary.csv and manifest.json land at the top.
Runs are independent and executed by a thread pool; files are written by the
worker that owns the run and the summary is assembled after the join, in
spec order, so reruns with the same spec and seed reproduce every emitted
number except wall-clock columns.  The random generator is numpy's PCG64,
seeded per run from SeedSequence([seed, n_cells, alpha_index, sample]).
"""

from __future__ import annotations

import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .controls import Control, save_control, write_control_csv
from .driver import (InitStrategy, RadiusStrategy, SlipConfig, SlipResult,
                     run, run_mesh_sequenced, write_iteration_log, zero_control)
from .model import CosineTarget, ProblemInstance, cosine_tracking_instance, write_trajectory_csv
from .stationarity import verify_r_optimality

__all__ = [
    "ExperimentSpec",
    "run_experiment",
    "oracle_compare",
    "load_spec",
]

EXPERIMENT_IDS = ("strategies", "slip_vs_oracle", "sensitivity")
VARIANTS = ("R0", "RP", "D0", "DP")
DEFAULT_N_CAP = 512
ORACLE_N_CAP = 16

SUMMARY_COLUMNS = ["experiment", "variant", "n_cells", "alpha", "sample",
                   "objective", "F_val", "tv", "stationarity", "termination",
                   "n_outer", "n_records", "time_s"]
ORACLE_COLUMNS = ["n_cells", "alpha", "sample", "final_J", "r_units",
                  "best_J", "gap", "rel_gap", "optimal"]


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    n_values: tuple[int, ...]
    alphas: tuple[float, ...]
    variants: tuple[str, ...] = VARIANTS
    seed: int = 0
    samples: int = 1
    delta0: float = 0.125
    sigma: float = 1e-3
    max_outer_iterations: int = 10000
    levels: tuple[int, ...] = (-2, -1, 0, 1, 2)
    t0: float = -1.0
    tf: float = 1.0
    omega0: float = float(np.pi)
    target_amplitude: float = 0.4
    finest_cells: int = 2048
    quad_order: int = 5
    allow_large: bool = False
    oracle_r_units: tuple[int, ...] = (1, 2, 3, 4)
    gap_floor: float = 1e-4
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.n_values:
            raise ValueError("need at least one working grid size")
        for n in self.n_values:
            if self.finest_cells % n != 0:
                raise ValueError(f"N={n} does not divide the finest grid "
                                 f"({self.finest_cells})")
        if max(self.n_values) > DEFAULT_N_CAP and not self.allow_large:
            raise ValueError(
                f"N={max(self.n_values)} exceeds the desk-scale cap "
                f"{DEFAULT_N_CAP}; set allow_large = true to opt in")
        if not self.alphas:
            raise ValueError("need at least one alpha")
        if self.samples < 1:
            raise ValueError("sample count must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise ValueError(f"unknown variants {bad}; choose from {VARIANTS}")


def load_spec(path) -> ExperimentSpec:
    """Read an ExperimentSpec from a TOML file."""
    if sys.version_info >= (3, 11):
        import tomllib as toml
    else:
        import tomli as toml
    with open(path, "rb") as fh:
        data = toml.load(fh)
    known = ExperimentSpec.__dataclass_fields__
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    for key in ("n_values", "alphas", "variants", "levels", "oracle_r_units"):
        if key in data:
            data[key] = tuple(data[key])
    return ExperimentSpec(**data)


def _instance(spec: ExperimentSpec, alpha: float) -> ProblemInstance:
    return cosine_tracking_instance(
        alpha=alpha, levels=spec.levels, omega0=spec.omega0,
        t0=spec.t0, tf=spec.tf, finest_cells=spec.finest_cells,
        quad_order=spec.quad_order,
        target=CosineTarget(amplitude=spec.target_amplitude),
    )


def _config(spec: ExperimentSpec, n_cells: int, variant: str) -> SlipConfig:
    return SlipConfig(
        n_cells=n_cells,
        delta0=spec.delta0,
        sigma=spec.sigma,
        radius_strategy=RadiusStrategy.RESET if variant[0] == "R" else RadiusStrategy.DOUBLING,
        init_strategy=InitStrategy.MESH_SEQUENCING if variant[1] == "P" else InitStrategy.ZERO,
        max_outer_iterations=spec.max_outer_iterations,
    )


def random_control(spec: ExperimentSpec, model: ProblemInstance, n_cells: int,
                   alpha_index: int, sample: int) -> Control:
    """Per-cell i.i.d. uniform draw over the levels, seeded per run."""
    seq = np.random.SeedSequence([spec.seed, n_cells, alpha_index, sample])
    rng = np.random.Generator(np.random.PCG64(seq))
    lev = model.levels.as_array()
    values = lev[rng.integers(0, lev.shape[0], size=n_cells)]
    return Control(model.working_grid(n_cells), values, model.levels)


def _final_measure(result: SlipResult) -> float:
    accepted = result.accepted_records
    if accepted:
        return accepted[-1].stationarity
    return result.log[-1].stationarity if result.log else 0.0


def _write_run_dir(run_dir: Path, model: ProblemInstance, result: SlipResult,
                   trajectories: bool) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    write_iteration_log(result.log, run_dir / "iterations.csv")
    save_control(result.final, run_dir / "final_control.json")
    with open(run_dir / "stationarity.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "stationarity"])
        for rec in result.accepted_records:
            writer.writerow([rec.n, repr(rec.stationarity)])
    if trajectories:
        write_control_csv(result.final, run_dir / "control.csv")
        write_trajectory_csv(model, result.final, run_dir / "trajectory.csv")


def _summary_row(spec: ExperimentSpec, variant: str, n_cells: int, alpha: float,
                 sample, result: SlipResult, time_s: float) -> dict:
    return {
        "experiment": spec.experiment,
        "variant": variant,
        "n_cells": n_cells,
        "alpha": repr(alpha),
        "sample": sample if sample is not None else "",
        "objective": repr(result.final_J),
        "F_val": repr(result.final_F),
        "tv": result.final_tv,
        "stationarity": repr(_final_measure(result)),
        "termination": result.termination.value,
        "n_outer": result.log[-1].n if result.log else 0,
        "n_records": len(result.log),
        "time_s": f"{time_s:.3g}",
    }


def _strategies_tasks(spec: ExperimentSpec, out: Path):
    """One task per independent unit: a zero-init run, or a whole mesh chain."""
    alpha = spec.alphas[0]
    model = _instance(spec, alpha)
    traj_ns = {spec.n_values[0], spec.n_values[-1]}

    def zero_task(variant: str, n_cells: int):
        def work():
            cfg = _config(spec, n_cells, variant)
            result = run(model, cfg, zero_control(model, n_cells))
            _write_run_dir(out / "runs" / f"{variant}_N{n_cells}", model, result,
                           n_cells in traj_ns)
            return [_summary_row(spec, variant, n_cells, alpha, None, result,
                                 result.total_time_s)]
        return work

    def chain_task(variant: str):
        def work():
            cfg = _config(spec, spec.n_values[0], variant)
            results = run_mesh_sequenced(model, cfg, list(spec.n_values))
            rows = []
            elapsed = 0.0
            for n_cells, result in zip(spec.n_values, results):
                elapsed += result.total_time_s
                _write_run_dir(out / "runs" / f"{variant}_N{n_cells}", model, result,
                               n_cells in traj_ns)
                rows.append(_summary_row(spec, variant, n_cells, alpha, None,
                                         result, elapsed))
            return rows
        return work

    tasks = []
    for variant in spec.variants:
        if variant[1] == "P":
            tasks.append(chain_task(variant))
        else:
            tasks.extend(zero_task(variant, n) for n in spec.n_values)
    return tasks


def _oracle_rows(spec: ExperimentSpec, model: ProblemInstance, n_cells: int,
                 alpha: float, sample, result: SlipResult) -> list[dict]:
    rows = []
    final_j = result.final_J
    for r_units in spec.oracle_r_units:
        check = verify_r_optimality(result.final, model, r_units)
        gap = check.gap
        if check.best_J != 0.0:
            rel = gap / abs(check.best_J)
        else:
            rel = 0.0 if gap == 0.0 else float("inf")
        rows.append({
            "n_cells": n_cells,
            "alpha": repr(alpha),
            "sample": sample if sample is not None else "",
            "final_J": repr(final_j),
            "r_units": r_units,
            "best_J": repr(check.best_J),
            "gap": repr(gap),
            "rel_gap": repr(max(rel, spec.gap_floor)),
            "optimal": int(check.optimal_in_neighborhood),
        })
    return rows


def _slip_vs_oracle_tasks(spec: ExperimentSpec, out: Path):
    traj_ns = {spec.n_values[0], spec.n_values[-1]}
    models = {alpha: _instance(spec, alpha) for alpha in spec.alphas}

    def task(n_cells: int, alpha: float):
        def work():
            model = models[alpha]
            cfg = _config(spec, n_cells, "R0")
            result = run(model, cfg, zero_control(model, n_cells))
            run_dir = out / "runs" / f"N{n_cells}_alpha{alpha:g}"
            _write_run_dir(run_dir, model, result, n_cells in traj_ns)
            rows = [_summary_row(spec, "R0", n_cells, alpha, None, result,
                                 result.total_time_s)]
            oracle = (_oracle_rows(spec, model, n_cells, alpha, None, result)
                      if n_cells <= ORACLE_N_CAP else [])
            return rows, oracle
        return work

    return [task(n, a) for n in spec.n_values for a in spec.alphas]


def _sensitivity_tasks(spec: ExperimentSpec, out: Path):
    traj_ns = {spec.n_values[0], spec.n_values[-1]}
    models = {alpha: _instance(spec, alpha) for alpha in spec.alphas}

    def task(n_cells: int, alpha_index: int, sample: int):
        def work():
            alpha = spec.alphas[alpha_index]
            model = models[alpha]
            v0 = random_control(spec, model, n_cells, alpha_index, sample)
            cfg = _config(spec, n_cells, "R0")
            result = run(model, cfg, v0)
            run_dir = out / "runs" / f"N{n_cells}_alpha{alpha:g}_s{sample}"
            _write_run_dir(run_dir, model, result, n_cells in traj_ns)
            save_control(v0, run_dir / "initial_control.json")
            return [_summary_row(spec, "R0", n_cells, alpha, sample, result,
                                 result.total_time_s)]
        return work

    return [task(n, ai, s)
            for n in spec.n_values
            for ai in range(len(spec.alphas))
            for s in range(spec.samples)]


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _write_manifest(spec: ExperimentSpec, out: Path) -> None:
    manifest = {
        "experiment": spec.experiment,
        "spec": asdict(spec),
        "seed": spec.seed,
        "rng": "numpy PCG64, SeedSequence([seed, n_cells, alpha_index, sample]) per run",
        "versions": {
            "slip": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(spec: ExperimentSpec, out_dir=None, workers: int = 1) -> Path:
    """Execute the spec's run grid; returns the output directory."""
    target = out_dir if out_dir is not None else spec.out_dir
    if target is None:
        raise ValueError("an output directory is required (spec.out_dir or out_dir)")
    out = Path(target)
    out.mkdir(parents=True, exist_ok=True)
    _write_manifest(spec, out)

    if spec.experiment == "strategies":
        tasks = _strategies_tasks(spec, out)
    elif spec.experiment == "slip_vs_oracle":
        tasks = _slip_vs_oracle_tasks(spec, out)
    else:
        tasks = _sensitivity_tasks(spec, out)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = [f.result() for f in [pool.submit(t) for t in tasks]]
    else:
        outcomes = [t() for t in tasks]

    summary_rows: list[dict] = []
    oracle_rows: list[dict] = []
    for outcome in outcomes:
        if isinstance(outcome, tuple):
            rows, oracle = outcome
            summary_rows.extend(rows)
            oracle_rows.extend(oracle)
        else:
            summary_rows.extend(outcome)

    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary_rows)
    if spec.experiment == "slip_vs_oracle":
        _write_csv(out / "oracle.csv", ORACLE_COLUMNS, oracle_rows)
    return out


def oracle_compare(spec: ExperimentSpec, out_dir=None) -> list[dict]:
    """r-optimality gaps of SLIP final iterates on enumerable grids.

    Runs one reset-strategy solve per (N, alpha, sample), from random initial
    controls when spec.samples > 1 and from the zero control otherwise, then
    enumerates the L1 ball for each r in spec.oracle_r_units.  Relative gaps
    are reported clamped below at spec.gap_floor.
    """
    for n in spec.n_values:
        if n > ORACLE_N_CAP:
            raise ValueError(f"N={n} too large to enumerate (cap {ORACLE_N_CAP})")
    rows: list[dict] = []
    for n_cells in spec.n_values:
        for alpha_index, alpha in enumerate(spec.alphas):
            model = _instance(spec, alpha)
            cfg = _config(spec, n_cells, "R0")
            for sample in range(spec.samples):
                if spec.samples > 1:
                    v0 = random_control(spec, model, n_cells, alpha_index, sample)
                else:
                    v0 = zero_control(model, n_cells)
                result = run(model, cfg, v0)
                rows.extend(_oracle_rows(spec, model, n_cells, alpha, sample, result))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "oracle.csv", ORACLE_COLUMNS, rows)
    return rows
