"""Stationarity diagnostics for piecewise-constant integer controls.

A local minimizer with switch times t_i must have one-sided Dini derivatives
of t -> int gradient with the right signs at every switch; for this model the
gradient is continuous, so all four Dini values coincide with the pointwise
gradient at the switch and the scalar measure is simply the l2 norm of
(grad F(v)(t_i))_i.  The Dini values are still reported as one-sided window
averages (1/h') int over windows h' in {h, h/2, h/4} of the finest grid, as a
diagnostic for the sign conditions.

verify_r_optimality certifies local optimality the hard way: it enumerates
every feasible control within an L1 ball of integer radius (in units of the
working cell width), evaluates the full objective on each, and reports the
gap to the neighborhood optimum.  This is the oracle used to check the
convexity certificate of nonpositive predicted reduction at a given radius.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .controls import Control, total_variation, to_step_representation
from .model import ProblemInstance

__all__ = [
    "SwitchDiagnostics",
    "StationarityReport",
    "sl_measure",
    "switch_gradient",
    "count_ball",
    "enumerate_ball",
    "verify_r_optimality",
    "RValidation",
]

ENUMERATION_LIMIT = 10**7
WINDOW_DIVISORS = (1, 2, 4)


@dataclass(frozen=True)
class SwitchDiagnostics:
    """Per-switch gradient value and one-sided window averages.

    window_averages maps window width h' to (backward, forward) averages
    (1/h') int_{t-h'}^{t} and (1/h') int_{t}^{t+h'} of the gradient.
    """

    time: float
    gradient: float
    window_averages: dict[float, tuple[float, float]]


@dataclass(frozen=True)
class StationarityReport:
    switches: tuple[SwitchDiagnostics, ...]
    measure: float

    def to_json(self) -> dict:
        return {
            "measure": self.measure,
            "switches": [
                {
                    "time": s.time,
                    "gradient": s.gradient,
                    "window_averages": {
                        repr(w): list(v) for w, v in sorted(s.window_averages.items())
                    },
                }
                for s in self.switches
            ],
        }


def switch_gradient(c: Control, model: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """Switch times of c and the gradient of F evaluated at them."""
    times = np.asarray(to_step_representation(c).switch_times)
    if times.size == 0:
        return times, np.empty(0)
    residual = model.residual_nodes(c)
    return times, model.crosscorr_at(residual, times)


def _window_average(model: ProblemInstance, residual: np.ndarray,
                    lo: float, hi: float) -> float:
    """(1/(hi-lo)) int_lo^hi of the gradient, by Gauss-Legendre on the window."""
    y, w = np.polynomial.legendre.leggauss(5)
    pts = lo + (y + 1.0) / 2.0 * (hi - lo)
    vals = model.crosscorr_at(residual, pts)
    return float(np.dot(w / 2.0, vals))


def sl_measure(c: Control, model: ProblemInstance,
               windows: bool = True) -> StationarityReport:
    """Stationarity report at the switches of c; measure is the l2 norm."""
    times = np.asarray(to_step_representation(c).switch_times)
    if times.size == 0:
        return StationarityReport((), 0.0)
    residual = model.residual_nodes(c)
    grads = model.crosscorr_at(residual, times)
    diagnostics = []
    for t, g in zip(times, grads):
        averages: dict[float, tuple[float, float]] = {}
        if windows:
            for div in WINDOW_DIVISORS:
                width = model.h_fine / div
                lo = max(model.t0, t - width)
                hi = min(model.tf, t + width)
                averages[width] = (
                    _window_average(model, residual, lo, t),
                    _window_average(model, residual, t, hi),
                )
        diagnostics.append(SwitchDiagnostics(float(t), float(g), averages))
    measure = float(np.sqrt(np.dot(grads, grads)))
    return StationarityReport(tuple(diagnostics), measure)


def count_ball(c: Control, levels, r_units: int) -> int:
    """Number of feasible controls within sum_i |v_i - c_i| <= r_units."""
    lev = np.asarray(tuple(levels), dtype=np.int64)
    counts = np.zeros(r_units + 1, dtype=np.int64)
    counts[0] = 1
    for ci in c.values:
        nxt = np.zeros_like(counts)
        for lv in lev:
            d = abs(int(lv) - int(ci))
            if d <= r_units:
                nxt[d:] += counts[: r_units + 1 - d]
        counts = nxt
        if counts.sum() > ENUMERATION_LIMIT:
            break
    return int(counts.sum())


def enumerate_ball(c: Control, levels, r_units: int):
    """Yield every feasible value vector with sum_i |v_i - c_i| <= r_units."""
    lev = tuple(int(v) for v in levels)
    center = [int(v) for v in c.values]
    n = len(center)
    vals = np.empty(n, dtype=np.int64)

    def rec(i: int, left: int):
        if i == n:
            yield vals.copy()
            return
        ci = center[i]
        for lv in lev:
            d = abs(lv - ci)
            if d <= left:
                vals[i] = lv
                yield from rec(i + 1, left - d)

    yield from rec(0, int(r_units))


@dataclass(frozen=True)
class RValidation:
    optimal_in_neighborhood: bool
    best_neighbor: Control
    best_J: float
    center_J: float

    @property
    def gap(self) -> float:
        return self.center_J - self.best_J


def verify_r_optimality(c: Control, model: ProblemInstance, r_units: int,
                        tol: float = 1e-12) -> RValidation:
    """Exhaustively check c against every feasible control in its L1 ball.

    The ball has radius r_units * h in L1, i.e. total integer deviation at
    most r_units.  Optimality is declared when no neighbor improves J by more
    than tol (slack for round-off in the quadrature objective).
    """
    if r_units < 0:
        raise ValueError("r_units must be nonnegative")
    size = count_ball(c, model.levels, int(r_units))
    if size > ENUMERATION_LIMIT:
        raise ValueError(f"neighborhood too large to enumerate ({size} controls)")

    center_j = model.objective_J(c)
    best_vals = c.values
    best_j = center_j
    for vals in enumerate_ball(c, model.levels, int(r_units)):
        if np.array_equal(vals, c.values):
            continue
        cand = Control(c.grid, vals, model.levels)
        j = model.objective_J(cand)
        if j < best_j:
            best_j = j
            best_vals = vals
    best = Control(c.grid, best_vals, model.levels)
    return RValidation(
        optimal_in_neighborhood=bool(best_j >= center_j - tol),
        best_neighbor=best,
        best_J=float(min(best_j, center_j)),
        center_J=center_j,
    )


def report_to_json_file(report: StationarityReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")
