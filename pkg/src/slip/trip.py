"""Exact solver for the linearized trust-region integer subproblem.

The subproblem minimizes sum_i c_i (v_i - vt_i) + alpha TV(v) - alpha TV(vt)
over integer level assignments v subject to the L1 budget
h * sum_i |v_i - vt_i| <= Delta.  Because per-cell deviations are integers,
the budget is equivalent to an integer unit budget B = floor(Delta/h), and
the problem is a resource-constrained shortest path over states (cell, level,
units used): solved exactly by dynamic programming in O(N M^2 B), no IP
solver involved.  A brute-force enumerator with the identical tie-breaking
serves as the verification oracle on small instances.

Tie-breaking (shared by both solvers): among minimizers of the objective,
prefer the smaller total unit budget, then compare cells from the last to the
first by (|v_i - vt_i|, level index), smaller first.  The DP realizes this
with backpointers (the choice at cell i fixes cell i-1's tie-break); the
brute force sorts on the same key, accumulating the objective float-for-float
in the DP's order so that ties are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .controls import Control, LevelSet, UniformGrid, control_from_json, control_to_json, total_variation

__all__ = [
    "TripInstance",
    "TripSolution",
    "budget_units",
    "solve_dp",
    "solve_bruteforce",
    "assemble",
    "trip_instance_to_json",
    "trip_instance_from_json",
    "trip_solution_to_json",
]

BRUTEFORCE_LIMIT = 10**7


@dataclass(frozen=True)
class TripInstance:
    """Center control, linear coefficients c_T, radius, alpha and levels."""

    center: Control
    coefficients: np.ndarray
    delta: float
    alpha: float
    levels: LevelSet

    def __post_init__(self) -> None:
        coeff = np.asarray(self.coefficients, dtype=float)
        if coeff.shape != (self.center.grid.n_cells,):
            raise ValueError("need one coefficient per grid cell")
        if self.delta < 0:
            raise ValueError("radius must be nonnegative")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not np.isin(self.center.values, self.levels.as_array()).all():
            raise ValueError("center is not feasible for the level set")
        coeff.setflags(write=False)
        object.__setattr__(self, "coefficients", coeff)

    @property
    def budget(self) -> int:
        return budget_units(self.delta, self.center.grid.h)


@dataclass(frozen=True)
class TripSolution:
    """Minimizer with its objective value; pred = -objective >= 0."""

    minimizer: Control
    objective: float

    @property
    def pred(self) -> float:
        return -self.objective


def budget_units(delta: float, h: float) -> int:
    """Integer unit budget floor(delta/h), tolerant of radii just below a multiple of h."""
    if delta < 0:
        raise ValueError("radius must be nonnegative")
    if not h > 0:
        raise ValueError("cell width must be positive")
    ratio = delta / h
    return int(math.floor(ratio + 1e-12 * max(1.0, ratio)))


def _reported_objective(inst: TripInstance, values: np.ndarray) -> float:
    """Objective recomputed from a minimizer: linear part + alpha * integer TV change."""
    vt = inst.center.values
    lin = float(np.dot(inst.coefficients, (values - vt).astype(float)))
    tv_new = int(np.abs(np.diff(values)).sum())
    tv_old = total_variation(inst.center)
    return lin + inst.alpha * (tv_new - tv_old)


def _solution(inst: TripInstance, values: np.ndarray) -> TripSolution:
    minimizer = Control(inst.center.grid, values, inst.levels)
    return TripSolution(minimizer, _reported_objective(inst, values))


def solve_dp(inst: TripInstance) -> TripSolution:
    """Exact global minimizer by DP over (cell, level, units used)."""
    levels = inst.levels.as_array()
    vt = inst.center.values
    c = inst.coefficients
    alpha = inst.alpha
    n, m = vt.shape[0], levels.shape[0]
    budget = min(inst.budget, int(n * inst.levels.span))

    dev = np.abs(levels[:, None] - vt[None, :])          # (m, n) units per (level, cell)
    lin = c[None, :] * (levels[:, None] - vt[None, :])   # (m, n) linear cost per (level, cell)
    trans = alpha * np.abs(levels[:, None] - levels[None, :]).astype(float)  # (to, from)

    inf = np.inf
    value = np.full((m, budget + 1), inf)
    parent = np.full((n, m, budget + 1), -1, dtype=np.int16)
    for lev in range(m):
        d = dev[lev, 0]
        if d <= budget:
            value[lev, d] = lin[lev, 0]

    for i in range(1, n):
        # scan predecessors in tie-break order: (units at cell i-1, level index)
        order = np.lexsort((np.arange(m), dev[:, i - 1]))
        prev = value[order]
        nxt = np.full((m, budget + 1), inf)
        for lev in range(m):
            d = dev[lev, i]
            if d > budget:
                continue
            cand = prev + trans[lev, order][:, None]
            sub = cand[:, : budget + 1 - d]
            pick = np.argmin(sub, axis=0)  # first minimum = tie-break winner
            best = sub[pick, np.arange(sub.shape[1])]
            nxt[lev, d:] = best + lin[lev, i]
            parent[i, lev, d:] = order[pick]
        value = nxt

    best_key = None
    best_state = None
    for used in range(budget + 1):
        for lev in range(m):
            val = value[lev, used]
            if not np.isfinite(val):
                continue
            key = (val, used, dev[lev, n - 1], lev)
            if best_key is None or key < best_key:
                best_key = key
                best_state = (lev, used)

    lev, used = best_state
    picks = np.empty(n, dtype=np.int64)
    picks[n - 1] = lev
    for i in range(n - 1, 0, -1):
        prev_lev = int(parent[i, lev, used])
        used -= int(dev[lev, i])
        picks[i - 1] = prev_lev
        lev = prev_lev
    return _solution(inst, levels[picks])


def solve_bruteforce(inst: TripInstance) -> TripSolution:
    """Enumerate all M^N level assignments; oracle for solve_dp."""
    levels = inst.levels.as_array()
    vt = inst.center.values
    c = inst.coefficients
    alpha = inst.alpha
    n, m = vt.shape[0], levels.shape[0]
    if m**n > BRUTEFORCE_LIMIT:
        raise ValueError("instance too large for brute force")
    budget = inst.budget

    idx = np.indices((m,) * n).reshape(n, -1).T.astype(np.int64)  # (m^n, n)
    vals = levels[idx]
    dev = np.abs(vals - vt[None, :])
    feasible = dev.sum(axis=1) <= budget
    idx, vals, dev = idx[feasible], vals[feasible], dev[feasible]

    # accumulate the objective in exactly the DP's float order
    obj = c[0] * (vals[:, 0] - vt[0]).astype(float)
    for i in range(1, n):
        obj = (obj + alpha * np.abs(vals[:, i] - vals[:, i - 1]).astype(float)) \
            + c[i] * (vals[:, i] - vt[i]).astype(float)

    # key: objective, total units, then (units, level index) from last cell to first
    keys = []
    for i in range(n):
        keys.append(idx[:, i])
        keys.append(dev[:, i])
    keys.append(dev.sum(axis=1))
    keys.append(obj)
    winner = np.lexsort(tuple(keys))[0]
    return _solution(inst, vals[winner])


def assemble(center: Control, model, delta: float) -> TripInstance:
    """Package the subproblem at a center: c_T from the model's gradient."""
    _, coeff = model.gradient_field(center)
    return TripInstance(center, coeff, float(delta), model.alpha, model.levels)


def trip_instance_to_json(inst: TripInstance) -> dict:
    return {
        "center": control_to_json(inst.center),
        "coefficients": [float(x) for x in inst.coefficients],
        "delta": inst.delta,
        "alpha": inst.alpha,
        "levels": list(inst.levels.values),
    }


def trip_instance_from_json(data: dict) -> TripInstance:
    levels = LevelSet(tuple(int(v) for v in data["levels"]))
    center = control_from_json(data["center"], levels)
    return TripInstance(center, np.asarray(data["coefficients"], dtype=float),
                        float(data["delta"]), float(data["alpha"]), levels)


def trip_solution_to_json(sol: TripSolution) -> dict:
    return {
        "minimizer": control_to_json(sol.minimizer),
        "objective": sol.objective,
        "pred": sol.pred,
    }


def load_trip_instance(path) -> TripInstance:
    with open(path, encoding="utf-8") as fh:
        return trip_instance_from_json(json.load(fh))
