"""Tests for the convolution tracking model: kernel, quadrature, F, gradient.

The two oracles here are deliberately independent of the package internals:
scipy.integrate.quad integrates the closed-form kernel adaptively for the
apply_K spot check, and central finite differences validate the adjoint
gradient. Frozen constants: F(v = 0) = 0.08 analytically on the default
instance, since the squared cosine integrates to 1 over two full periods.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from slip.controls import Control, LevelSet, UniformGrid, refine, total_variation
from slip.model import (
    ConvolutionKernel,
    CosineTarget,
    ProblemInstance,
    QuadratureRule,
    cosine_tracking_instance,
    instance_from_config,
    write_trajectory_csv,
)

RNG_SEED = 1729


def reference_kernel(s):
    """The damped oscillator kernel written out longhand, no shared code."""
    if s <= 0.0 or s >= 2.0:
        return 0.0
    u = math.pi * (s - 1.0) / math.sqrt(2.0)
    return -0.1 * math.pi * (math.exp(-u) * math.cos(u - math.pi / 4)
                             + math.exp(-u) * math.sin(u - math.pi / 4))


@pytest.fixture(scope="module")
def default_instance():
    return cosine_tracking_instance()


@pytest.fixture(scope="module")
def small_instance():
    # 256 finest cells keep the oracle comparisons cheap
    return cosine_tracking_instance(finest_cells=256)


def random_feasible(model, n_cells, rng):
    lev = model.levels.as_array()
    values = lev[rng.integers(0, lev.size, n_cells)]
    return Control(model.working_grid(n_cells), values, model.levels)


class TestConvolutionKernel:
    def test_matches_reference_inside_support(self):
        k = ConvolutionKernel()
        pts = np.linspace(0.01, 1.99, 53)
        expected = [reference_kernel(s) for s in pts]
        np.testing.assert_allclose(k(pts), expected, rtol=1e-14)

    def test_zero_outside_support(self):
        k = ConvolutionKernel()
        np.testing.assert_array_equal(k(np.array([-0.5, 0.0, 2.0, 3.7])), 0.0)

    def test_scalar_evaluation(self):
        k = ConvolutionKernel()
        assert k(1.0) == pytest.approx(reference_kernel(1.0), rel=1e-14)

    def test_sign_structure(self):
        # the oscillation starts with a large positive lobe and decays
        k = ConvolutionKernel()
        assert k(0.1) > 0.0
        assert abs(k(1.9)) < abs(k(0.1))


class TestCosineTarget:
    def test_default_profile(self):
        f = CosineTarget()
        t = np.linspace(-1.0, 1.0, 9)
        np.testing.assert_allclose(f(t), 0.4 * np.cos(2 * np.pi * t), rtol=1e-15)


class TestQuadratureRule:
    def test_weights_sum_to_cell_width(self):
        rule = QuadratureRule(n_cells=8, order=5)
        nodes, weights = rule.reference()
        assert weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert np.all(weights > 0)
        assert np.all((nodes > 0) & (nodes < 1))

    def test_integrates_degree_nine_exactly(self):
        # 5-point Gauss-Legendre is exact through degree 9
        nodes, weights = QuadratureRule(order=5).reference()
        for deg in range(10):
            approx = float(np.dot(weights, nodes**deg))
            assert approx == pytest.approx(1.0 / (deg + 1), abs=1e-14)

    def test_degree_ten_not_exact(self):
        nodes, weights = QuadratureRule(order=5).reference()
        approx = float(np.dot(weights, nodes**10))
        assert abs(approx - 1.0 / 11.0) > 1e-10


class TestApplyK:
    def test_zero_control_maps_to_zero(self, small_instance):
        z = Control(small_instance.working_grid(16),
                    np.zeros(16, dtype=int), small_instance.levels)
        np.testing.assert_array_equal(small_instance.apply_K(z), 0.0)

    def test_constant_one_against_adaptive_quadrature(self, default_instance):
        # (K 1)(t) = integral of k over (0, t + 1); quad is the oracle. The
        # only systematic error is the zero-extended kernel in the one cell
        # straddling tau = t, below 1e-3 at the default resolution.
        ones = Control(default_instance.working_grid(16),
                       np.ones(16, dtype=int), default_instance.levels)
        state = default_instance.apply_K(ones)
        times = default_instance.node_times
        for idx in range(0, times.size, times.size // 40):
            t = times[idx]
            expected, err = quad(reference_kernel, 0.0, t + 1.0,
                                 points=[0.0, 2.0], limit=200)
            assert err < 1e-9
            assert state[idx] == pytest.approx(expected, abs=1e-3), f"t = {t}"

    def test_linearity(self, small_instance):
        rng = np.random.default_rng(RNG_SEED)
        a = random_feasible(small_instance, 32, rng)
        b = random_feasible(small_instance, 32, rng)
        lhs = small_instance.apply_K(a.values + b.values)
        rhs = small_instance.apply_K(a) + small_instance.apply_K(b)
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_causality(self, small_instance):
        # nothing arrives before the control can influence it: with the
        # kernel supported on (0, 2), nodes near t0 see almost no mass
        ones = Control(small_instance.working_grid(16),
                       np.ones(16, dtype=int), small_instance.levels)
        state = small_instance.apply_K(ones)
        first_node = small_instance.node_times[0]
        bound = abs(quad(reference_kernel, 0.0, first_node + 1.0)[0])
        assert abs(state[0]) <= bound + 1e-12


class TestObjective:
    def test_zero_control_analytic_value(self, default_instance):
        z = Control(default_instance.working_grid(32),
                    np.zeros(32, dtype=int), default_instance.levels)
        assert abs(default_instance.objective_F(z) - 0.08) <= 1e-10

    def test_j_adds_scaled_tv(self, default_instance):
        z = Control(default_instance.working_grid(32),
                    np.zeros(32, dtype=int), default_instance.levels)
        assert default_instance.objective_J(z) == pytest.approx(0.08, abs=1e-10)
        rng = np.random.default_rng(RNG_SEED)
        c = random_feasible(default_instance, 32, rng)
        expected = default_instance.objective_F(c) + 1e-4 * total_variation(c)
        assert default_instance.objective_J(c) == pytest.approx(expected, abs=0.0)

    def test_nonnegative(self, small_instance):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(5):
            c = random_feasible(small_instance, 64, rng)
            assert small_instance.objective_F(c) >= 0.0

    def test_value_independent_of_working_grid(self, default_instance):
        rng = np.random.default_rng(RNG_SEED)
        c = random_feasible(default_instance, 32, rng)
        fine = refine(c, 4)
        coarse_val = default_instance.objective_F(c)
        fine_val = default_instance.objective_F(fine)
        assert fine_val == pytest.approx(coarse_val, rel=1e-15)

    def test_broadcast_rejects_nondivisor_grid(self, default_instance):
        with pytest.raises(ValueError):
            default_instance.broadcast_values(np.zeros(100))


class TestGradient:
    def test_finite_difference_oracle(self, default_instance):
        # quadratic objective: central differences are exact up to round-off
        rng = np.random.default_rng(RNG_SEED)
        lev = default_instance.levels.as_array()
        eps = 1e-4
        for trial in range(30):
            n = int(rng.choice([16, 32, 64]))
            v = random_feasible(default_instance, n, rng)
            w = lev[rng.integers(0, lev.size, n)].astype(float)
            _, coeffs = default_instance.gradient_field(v)
            analytic = float(np.dot(coeffs, w))
            plus = default_instance.objective_F(v.values + eps * w)
            minus = default_instance.objective_F(v.values - eps * w)
            fd = (plus - minus) / (2 * eps)
            rel = abs(analytic - fd) / max(1.0, abs(analytic))
            assert rel <= 1e-5, f"trial {trial}: rel error {rel}"

    def test_adjoint_identity(self, default_instance):
        rng = np.random.default_rng(RNG_SEED)
        m = default_instance
        for _ in range(10):
            v = random_feasible(m, 64, rng)
            w = random_feasible(m, 64, rng)
            v_nodes = np.repeat(m.broadcast_values(v.values.astype(float)),
                                m.quadrature.order)
            w_nodes = np.repeat(m.broadcast_values(w.values.astype(float)),
                                m.quadrature.order)
            kv_w = float(np.dot(m.node_weights, m.apply_K(v) * w_nodes))
            v_kstar_w = float(np.dot(m.node_weights,
                                     v_nodes * m.adjoint_nodes(w_nodes)))
            assert abs(kv_w - v_kstar_w) <= 1e-8

    def test_zero_residual_gives_zero_gradient(self):
        # f = 0 and v = 0 leave nothing to correlate against
        m = cosine_tracking_instance(finest_cells=256, target=lambda t: 0.0 * t)
        z = Control(m.working_grid(16), np.zeros(16, dtype=int), m.levels)
        g, coeffs = m.gradient_field(z)
        np.testing.assert_array_equal(g, 0.0)
        np.testing.assert_array_equal(coeffs, 0.0)

    def test_cell_integral_consistency(self, small_instance):
        # per-cell quadrature of the pointwise gradient reproduces c_T
        rng = np.random.default_rng(RNG_SEED)
        m = small_instance
        v = random_feasible(m, 16, rng)
        g, coeffs = m.gradient_field(v)
        per_node = m.node_weights * g
        by_cell = per_node.reshape(16, -1).sum(axis=1)
        np.testing.assert_allclose(by_cell, coeffs, atol=1e-10)

    def test_gradient_field_sum_matches_domain_integral(self, small_instance):
        rng = np.random.default_rng(RNG_SEED)
        v = random_feasible(small_instance, 32, rng)
        g, coeffs = small_instance.gradient_field(v)
        total = float(np.dot(small_instance.node_weights, g))
        assert coeffs.sum() == pytest.approx(total, abs=1e-12)

    def test_gradient_at_matches_node_values(self, small_instance):
        rng = np.random.default_rng(RNG_SEED)
        m = small_instance
        v = random_feasible(m, 16, rng)
        g, _ = m.gradient_field(v)
        probe = m.node_times[::97]
        vals = m.gradient_at(v, probe)
        np.testing.assert_allclose(vals, g[::97], atol=1e-12)

    def test_gradient_at_continuity(self, small_instance):
        rng = np.random.default_rng(RNG_SEED)
        v = random_feasible(small_instance, 16, rng)
        t = 0.31
        deltas = np.array([1e-2, 1e-3, 1e-4, 1e-5])
        base = small_instance.gradient_at(v, t)
        gaps = np.abs(small_instance.gradient_at(v, t + deltas) - base)
        assert gaps[-1] < 1e-4
        assert gaps[-1] < gaps[0]

    def test_gradient_at_rejects_outside_domain(self, small_instance):
        v = Control(small_instance.working_grid(16),
                    np.zeros(16, dtype=int), small_instance.levels)
        with pytest.raises(ValueError):
            small_instance.gradient_at(v, 1.5)

    def test_quadratic_expansion(self, small_instance):
        # F(b) = F(a) + (grad F(a), b - a) + 0.5 ||K (b - a)||^2, exactly
        rng = np.random.default_rng(RNG_SEED)
        m = small_instance
        a = random_feasible(m, 32, rng)
        b = random_feasible(m, 32, rng)
        diff = (b.values - a.values).astype(float)
        _, coeffs = m.gradient_field(a)
        expansion = (m.objective_F(a) + float(np.dot(coeffs, diff))
                     + 0.5 * m.state_norm_sq(diff))
        assert m.objective_F(b) == pytest.approx(expansion, abs=1e-12)


class TestConfiguration:
    def test_instance_from_config_round_trip(self):
        cfg = {"t0": -1.0, "tf": 1.0, "levels": [-1, 0, 1], "alpha": 0.01,
               "omega0": math.pi, "finest_cells": 128, "quad_order": 5}
        m = instance_from_config(cfg)
        assert m.alpha == 0.01
        assert m.finest_cells == 128
        assert m.levels.as_array().tolist() == [-1, 0, 1]

    def test_trajectory_csv(self, small_instance, tmp_path):
        c = Control(small_instance.working_grid(16),
                    np.ones(16, dtype=int), small_instance.levels)
        path = tmp_path / "trajectory.csv"
        write_trajectory_csv(small_instance, c, path)
        lines = path.read_text(encoding="utf-8").strip().splitlines()
        assert lines[0] == "t,state,target"
        assert len(lines) == 1 + small_instance.node_times.size
        t, state, target = map(float, lines[1].split(","))
        assert t == pytest.approx(small_instance.node_times[0])
        assert target == pytest.approx(0.4 * math.cos(2 * math.pi * t), rel=1e-12)


class TestProblemInstanceValidation:
    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            cosine_tracking_instance(alpha=0.0)

    def test_rejects_reversed_domain(self):
        with pytest.raises(ValueError):
            ProblemInstance(1.0, -1.0, LevelSet((0, 1)), 1e-4)

    def test_quadrature_rule_validation(self):
        with pytest.raises(ValueError):
            QuadratureRule(n_cells=0)
        with pytest.raises(ValueError):
            QuadratureRule(order=0)
