"""Convolution tracking objective F(v) = 1/2 ||K v - f||^2 and its gradient.

The control enters through a causal convolution (K v)(t) = int_{t0}^t
k(t - tau) v(tau) dtau with a kernel supported on (0, tf - t0).  All
integrals (objective, gradient, per-cell gradient integrals) are evaluated
with a fixed Gauss-Legendre rule per cell of one finest decomposition, so
objective values are comparable across working grids; coarser controls are
broadcast to the finest grid before evaluation.

On a uniform grid the cell-to-node influence integrals int_cell k(t_node -
tau) dtau depend only on the cell offset and the node's position inside its
cell, so K reduces to a small bank of discrete convolutions; we precompute
the generating rows and their FFTs once per instance and apply K (and its
adjoint, the cross-correlation K*) by FFT.  The gradient nodes are obtained
by applying the same quadrature to the cross-correlation integral, which
makes the per-cell integrals c_T the exact gradient of the discrete
objective with respect to the cell values: the finite-difference and adjoint
identities then hold to round-off rather than quadrature error.

The kernel is treated as zero for arguments <= 0 and >= tf - t0 and cells are
integrated whole; the node whose cell straddles the support boundary sees the
kernel jump, which is the documented quadrature error source of this model.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .controls import Control, LevelSet, UniformGrid, total_variation

__all__ = [
    "ConvolutionKernel",
    "CosineTarget",
    "QuadratureRule",
    "ProblemInstance",
    "cosine_tracking_instance",
    "instance_from_config",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class ConvolutionKernel:
    """Damped oscillating kernel supported on (0, support_length).

    k(s) = -amplitude * omega0 * (exp(-omega0 (s - m)/sqrt(2)) * cos(omega0 (s - m)/sqrt(2) - pi/4)
                                  + exp(-omega0 (s - m)/sqrt(2)) * sin(omega0 (s - m)/sqrt(2) - pi/4))

    with m = support_length / 2, and k(s) = 0 outside (0, support_length).
    """

    amplitude: float = 0.1
    omega0: float = np.pi
    support_length: float = 2.0

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        u = self.omega0 * (s - self.support_length / 2.0) / np.sqrt(2.0)
        body = -self.amplitude * self.omega0 * (
            np.exp(-u) * np.cos(u - np.pi / 4.0) + np.exp(-u) * np.sin(u - np.pi / 4.0)
        )
        inside = (s > 0.0) & (s < self.support_length)
        return np.where(inside, body, 0.0)


@dataclass(frozen=True)
class CosineTarget:
    """Tracking target f(t) = amplitude * cos(angular_frequency * t)."""

    amplitude: float = 0.4
    angular_frequency: float = 2.0 * np.pi

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.cos(self.angular_frequency * t)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule of given order on each of n_cells finest cells."""

    n_cells: int = 2048
    order: int = 5

    def __post_init__(self) -> None:
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")
        if self.order < 1:
            raise ValueError("order must be positive")

    def reference(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes in (0,1) and weights summing to 1 on the reference cell."""
        y, w = np.polynomial.legendre.leggauss(self.order)
        return (y + 1.0) / 2.0, w / 2.0


class ProblemInstance:
    """Immutable bundle of domain, levels, alpha, kernel, target and quadrature.

    Construction precomputes the quadrature nodes, the target samples, and
    the FFT factors of the influence rows; all evaluation methods are pure.
    """

    def __init__(self, t0: float, tf: float, levels: LevelSet, alpha: float,
                 kernel=None, target=None, quadrature: QuadratureRule | None = None):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        if not tf > t0:
            raise ValueError("tf must exceed t0")
        self.t0 = float(t0)
        self.tf = float(tf)
        self.levels = levels
        self.alpha = float(alpha)
        self.kernel = kernel if kernel is not None else ConvolutionKernel(support_length=tf - t0)
        self.target = target if target is not None else CosineTarget()
        self.quadrature = quadrature if quadrature is not None else QuadratureRule()

        nf = self.quadrature.n_cells
        q = self.quadrature.order
        self.finest_cells = nf
        self.h_fine = (self.tf - self.t0) / nf
        x, w = self.quadrature.reference()
        self._ref_nodes = x
        self._ref_weights = w

        cells = np.arange(nf)
        self.node_times = (self.t0 + (cells[:, None] + x[None, :]) * self.h_fine).ravel()
        self.node_weights = np.tile(self.h_fine * w, nf)
        self.f_nodes = np.asarray(self.target(self.node_times), dtype=float)

        # influence rows: G[p, d] = h * sum_{p'} w_{p'} k((d + x_p - x_{p'}) h) is the
        # integral of k(t_node - .) over the cell d offsets to the left of the node
        d = cells
        args_fwd = (d[None, :, None] + x[:, None, None] - x[None, None, :]) * self.h_fine
        self._G = self.h_fine * (self.kernel(args_fwd) * w[None, None, :]).sum(axis=-1)
        # bare kernel rows for the cross-correlation: K2[p, p', d] = k((d + x_{p'} - x_p) h)
        args_adj = (d[None, None, :] + x[None, :, None] - x[:, None, None]) * self.h_fine
        self._K2 = self.kernel(args_adj)

        self._nfft = next_fast_len(2 * nf)
        self._G_fft = np.fft.rfft(self._G, self._nfft, axis=-1)
        self._K2_fft = np.fft.rfft(self._K2, self._nfft, axis=-1)

        for arr in (self.node_times, self.node_weights, self.f_nodes, self._G, self._K2):
            arr.setflags(write=False)

    # -- broadcasting -------------------------------------------------------

    def broadcast_values(self, values) -> np.ndarray:
        """Replicate cell values of a dividing working grid onto the finest grid."""
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("values must be one-dimensional")
        n = vals.shape[0]
        if self.finest_cells % n != 0:
            raise ValueError(
                f"working grid with {n} cells does not divide the finest grid "
                f"({self.finest_cells} cells)")
        return np.repeat(vals, self.finest_cells // n)

    def _values_of(self, c) -> np.ndarray:
        if isinstance(c, Control):
            if (c.grid.t0, c.grid.tf) != (self.t0, self.tf):
                raise ValueError("control domain does not match the instance")
            return self.broadcast_values(c.values)
        return self.broadcast_values(c)

    def working_grid(self, n_cells: int) -> UniformGrid:
        return UniformGrid(self.t0, self.tf, n_cells)

    # -- forward operator and objective -------------------------------------

    def apply_K(self, c) -> np.ndarray:
        """(K v) at every quadrature node, flattened in time order."""
        v = self._values_of(c)
        vf = np.fft.rfft(v, self._nfft)
        s = np.fft.irfft(vf[None, :] * self._G_fft, self._nfft, axis=-1)[:, : self.finest_cells]
        return s.T.ravel()  # (cell, node-in-cell) -> flat time order

    def objective_F(self, c) -> float:
        r = self.apply_K(c) - self.f_nodes
        return 0.5 * float(np.dot(self.node_weights, r * r))

    def objective_J(self, c: Control) -> float:
        return self.objective_F(c) + self.alpha * total_variation(c)

    def state_norm_sq(self, c) -> float:
        """||K v||^2 under the quadrature inner product."""
        s = self.apply_K(c)
        return float(np.dot(self.node_weights, s * s))

    # -- adjoint / gradient --------------------------------------------------

    def adjoint_nodes(self, r_nodes: np.ndarray) -> np.ndarray:
        """(K* r) at every quadrature node for a node-sampled function r."""
        nf, q = self.finest_cells, self.quadrature.order
        r = np.asarray(r_nodes, dtype=float).reshape(nf, q)
        rw = r * (self.h_fine * self._ref_weights)[None, :]
        rw_rev_fft = np.fft.rfft(rw[::-1, :], self._nfft, axis=0)
        g = np.empty((nf, q))
        for p in range(q):
            acc_fft = (rw_rev_fft * self._K2_fft[p].T).sum(axis=1)
            acc = np.fft.irfft(acc_fft, self._nfft)[:nf]
            g[:, p] = acc[::-1]
        return g.ravel()

    def crosscorr_at(self, r_nodes: np.ndarray, t) -> np.ndarray:
        """(K* r)(t) by direct quadrature of the cross-correlation integral."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        args = self.node_times[None, :] - t[:, None]
        vals = self.kernel(args)
        return vals @ (np.asarray(r_nodes, dtype=float) * self.node_weights)

    def cell_integrals(self, g_nodes: np.ndarray, n_cells: int) -> np.ndarray:
        """Integrals of a node-sampled function over each working-grid cell."""
        if self.finest_cells % n_cells != 0:
            raise ValueError("working grid does not divide the finest grid")
        fine = (np.asarray(g_nodes, dtype=float) * self.node_weights)
        fine = fine.reshape(self.finest_cells, self.quadrature.order).sum(axis=1)
        return fine.reshape(n_cells, self.finest_cells // n_cells).sum(axis=1)

    def residual_nodes(self, c) -> np.ndarray:
        return self.apply_K(c) - self.f_nodes

    def gradient_field(self, c: Control) -> tuple[np.ndarray, np.ndarray]:
        """Gradient of F at c: node samples of K*(Kv - f) and per-cell integrals c_T."""
        g = self.adjoint_nodes(self.residual_nodes(c))
        return g, self.cell_integrals(g, c.grid.n_cells)

    def gradient_at(self, c: Control, t):
        """Pointwise gradient K*(Kv - f)(t); t may be a scalar or an array in [t0, tf]."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if (t_arr < self.t0).any() or (t_arr > self.tf).any():
            raise ValueError("evaluation point outside the domain")
        out = self.crosscorr_at(self.residual_nodes(c), t_arr)
        return out if np.ndim(t) else float(out[0])


def cosine_tracking_instance(alpha: float = 1e-4,
                             levels: tuple[int, ...] = (-2, -1, 0, 1, 2),
                             omega0: float = np.pi,
                             amplitude: float = 0.1,
                             t0: float = -1.0,
                             tf: float = 1.0,
                             finest_cells: int = 2048,
                             quad_order: int = 5,
                             target=None) -> ProblemInstance:
    """The default cosine-tracking instance on (-1, 1) with integer levels -2..2."""
    kernel = ConvolutionKernel(amplitude=amplitude, omega0=omega0, support_length=tf - t0)
    return ProblemInstance(
        t0, tf, LevelSet(tuple(levels)), alpha,
        kernel=kernel,
        target=target if target is not None else CosineTarget(),
        quadrature=QuadratureRule(n_cells=finest_cells, order=quad_order),
    )


def instance_from_config(cfg: dict) -> ProblemInstance:
    """Build an instance from a {t0, tf, levels, alpha, omega0, finest_cells, quad_order} mapping."""
    return cosine_tracking_instance(
        alpha=float(cfg.get("alpha", 1e-4)),
        levels=tuple(int(v) for v in cfg.get("levels", (-2, -1, 0, 1, 2))),
        omega0=float(cfg.get("omega0", np.pi)),
        t0=float(cfg.get("t0", -1.0)),
        tf=float(cfg.get("tf", 1.0)),
        finest_cells=int(cfg.get("finest_cells", 2048)),
        quad_order=int(cfg.get("quad_order", 5)),
    )


def write_trajectory_csv(model: ProblemInstance, c: Control, path) -> None:
    """State trajectory K v and target sampled at the quadrature nodes."""
    state = model.apply_K(c)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "state", "target"])
        for t, s, f in zip(model.node_times, state, model.f_nodes):
            writer.writerow([repr(float(t)), repr(float(s)), repr(float(f))])
