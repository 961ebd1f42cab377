"""Trust-region outer/inner loop over the linearized integer subproblem.

Each outer iteration linearizes the smooth part at the current iterate and
repeatedly solves the L1 trust-region subproblem: terminate when the
predicted reduction is nonpositive (for convex F this certifies optimality
within the final radius), halve the radius when the actual reduction misses
sigma times the prediction, accept otherwise.  The radius is reset to
delta0 each outer iteration (reset strategy) or started at twice the last
accepted radius (doubling strategy, capped where the L1 ball covers the
whole feasible box).  A run also stops when the radius falls below the
working cell width: no smaller integer step exists, so sufficient decrease
cannot be satisfied there.

The gradient is evaluated once per outer iteration.  Acceptance uses
ared >= sigma * pred (accept on equality), and ared is formed from the same
finest-grid quadrature objective that the subproblem coefficients come from,
so predicted and actual reductions are consistent to round-off.
"""

from __future__ import annotations

import csv
import enum
import time
from dataclasses import dataclass, replace

import numpy as np

from .controls import Control, refine, total_variation, to_step_representation
from .model import ProblemInstance
from .trip import TripInstance, solve_dp

__all__ = [
    "RadiusStrategy",
    "InitStrategy",
    "Termination",
    "SlipConfig",
    "IterationRecord",
    "SlipResult",
    "run",
    "run_mesh_sequenced",
    "write_iteration_log",
    "LOG_COLUMNS",
]


class RadiusStrategy(enum.Enum):
    RESET = "reset"
    DOUBLING = "doubling"


class InitStrategy(enum.Enum):
    ZERO = "zero"
    MESH_SEQUENCING = "mesh_sequencing"


class Termination(enum.Enum):
    PRED_NONPOSITIVE = "PredNonpositive"
    RADIUS_BELOW_GRID = "RadiusBelowGrid"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class SlipConfig:
    n_cells: int
    delta0: float = 0.125
    sigma: float = 1e-3
    radius_strategy: RadiusStrategy = RadiusStrategy.RESET
    init_strategy: InitStrategy = InitStrategy.ZERO
    max_outer_iterations: int = 10000

    def __post_init__(self) -> None:
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be positive")
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")


@dataclass(frozen=True)
class IterationRecord:
    n: int
    k: int
    delta: float
    pred: float
    ared: float
    accepted: bool
    J: float
    F_val: float
    tv: int
    time_s: float
    stationarity: float


@dataclass(frozen=True)
class SlipResult:
    final: Control
    log: tuple[IterationRecord, ...]
    termination: Termination
    final_J: float
    final_F: float
    final_tv: int
    total_time_s: float

    @property
    def accepted_records(self) -> tuple[IterationRecord, ...]:
        return tuple(r for r in self.log if r.accepted)


class NonFiniteValueError(RuntimeError):
    """Objective or gradient became non-finite; carries the offending iterate."""


def _switch_measure(model: ProblemInstance, c: Control, residual: np.ndarray) -> float:
    """l2 norm of the gradient at the switch times of c (0 if constant)."""
    times = to_step_representation(c).switch_times
    if not times:
        return 0.0
    vals = model.crosscorr_at(residual, np.asarray(times))
    return float(np.sqrt(np.dot(vals, vals)))


def run(model: ProblemInstance, config: SlipConfig, v0: Control,
        on_record=None) -> SlipResult:
    """Run the trust-region loop from v0 on the working grid of the config."""
    if v0.grid.n_cells != config.n_cells:
        raise ValueError("v0 does not live on the configured working grid")
    if not np.isin(v0.values, model.levels.as_array()).all():
        raise ValueError("v0 is not feasible for the model's level set")

    grid = v0.grid
    h = grid.h
    delta_max = (model.tf - model.t0) * model.levels.span
    sigma = config.sigma
    alpha = model.alpha
    start = time.monotonic()

    records: list[IterationRecord] = []

    def emit(rec: IterationRecord) -> None:
        records.append(rec)
        if on_record is not None:
            on_record(rec)

    v = v0
    state = model.apply_K(v)
    residual = state - model.f_nodes
    f_v = 0.5 * float(np.dot(model.node_weights, residual * residual))
    tv_v = total_variation(v)
    j_v = f_v + alpha * tv_v
    measure_v = _switch_measure(model, v, residual)
    if not np.isfinite(j_v):
        raise NonFiniteValueError(f"objective not finite at the initial iterate: J={j_v}")

    termination = Termination.MAX_ITERATIONS
    delta_start = config.delta0

    for n in range(1, config.max_outer_iterations + 1):
        gradient = model.adjoint_nodes(residual)
        if not np.isfinite(gradient).all():
            raise NonFiniteValueError(f"gradient not finite at outer iteration {n}")
        coeff = model.cell_integrals(gradient, grid.n_cells)

        delta = delta_start
        k = 0
        accepted = False
        while True:
            if delta < h:
                termination = Termination.RADIUS_BELOW_GRID
                break

            sol = solve_dp(TripInstance(v, coeff, delta, alpha, model.levels))
            pred = sol.pred
            cand = sol.minimizer
            cand_state = model.apply_K(cand)
            cand_residual = cand_state - model.f_nodes
            f_c = 0.5 * float(np.dot(model.node_weights, cand_residual * cand_residual))
            tv_c = total_variation(cand)
            j_c = f_c + alpha * tv_c
            if not np.isfinite(j_c):
                raise NonFiniteValueError(
                    f"objective not finite at candidate of iteration {n},{k}: J={j_c}")
            ared = j_v - j_c

            if pred <= 0.0:
                emit(IterationRecord(n, k, delta, pred, ared, False, j_v, f_v, tv_v,
                                     time.monotonic() - start, measure_v))
                termination = Termination.PRED_NONPOSITIVE
                break

            if ared >= sigma * pred:
                measure_c = _switch_measure(model, cand, cand_residual)
                emit(IterationRecord(n, k, delta, pred, ared, True, j_c, f_c, tv_c,
                                     time.monotonic() - start, measure_c))
                v, residual, f_v, tv_v, j_v, measure_v = (
                    cand, cand_residual, f_c, tv_c, j_c, measure_c)
                accepted = True
                if config.radius_strategy is RadiusStrategy.DOUBLING:
                    delta_start = min(2.0 * delta, delta_max)
                break

            emit(IterationRecord(n, k, delta, pred, ared, False, j_v, f_v, tv_v,
                                 time.monotonic() - start, measure_v))
            delta /= 2.0
            k += 1

        if not accepted:
            break

    return SlipResult(
        final=v,
        log=tuple(records),
        termination=termination,
        final_J=j_v,
        final_F=f_v,
        final_tv=tv_v,
        total_time_s=time.monotonic() - start,
    )


def zero_control(model: ProblemInstance, n_cells: int) -> Control:
    """The all-zero control, or the lowest feasible level if 0 is not a level."""
    fill = 0 if 0 in model.levels else model.levels.values[0]
    return Control(model.working_grid(n_cells), np.full(n_cells, fill, dtype=np.int64),
                   model.levels)


def run_mesh_sequenced(model: ProblemInstance, config: SlipConfig,
                       n_list: list[int], on_record=None) -> list[SlipResult]:
    """Run on each N in turn, initializing from the refined previous final."""
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly ascending")
    results: list[SlipResult] = []
    v = None
    for n_cells in n_list:
        stage_cfg = replace(config, n_cells=n_cells)
        if v is None:
            v = zero_control(model, n_cells)
        else:
            factor, rem = divmod(n_cells, v.grid.n_cells)
            if rem:
                raise ValueError("each N must be a multiple of its predecessor")
            v = refine(v, factor)
        result = run(model, stage_cfg, v, on_record=on_record)
        results.append(result)
        v = result.final
    return results


LOG_COLUMNS = ["n", "k", "delta", "pred", "ared", "accepted", "J", "F_val", "tv",
               "time_s", "stationarity"]


def write_iteration_log(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for r in records:
            writer.writerow([r.n, r.k, repr(r.delta), repr(r.pred), repr(r.ared),
                             int(r.accepted), repr(r.J), repr(r.F_val), r.tv,
                             f"{r.time_s:.6f}", repr(r.stationarity)])
