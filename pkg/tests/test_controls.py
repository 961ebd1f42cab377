"""Tests for integer controls on uniform grids: TV, L1 geometry, refinement.

Hand-computed values are frozen inline; structural invariants (round trips,
refinement isometries) are exercised with hypothesis on random controls.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slip.controls import (
    Control,
    LevelSet,
    StepRepresentation,
    UniformGrid,
    control_from_json,
    control_to_json,
    from_step_representation,
    l1_distance,
    load_control,
    refine,
    save_control,
    to_step_representation,
    total_variation,
    write_control_csv,
)

LEVELS = LevelSet((-2, -1, 0, 1, 2))


def make_control(values, t0=0.0, tf=1.0, levels=LEVELS):
    grid = UniformGrid(t0, tf, len(values))
    return Control(grid, np.asarray(values), levels)


# hypothesis strategy: a feasible control with 1..32 cells over (-1, 1)
@st.composite
def controls(draw):
    n = draw(st.integers(min_value=1, max_value=32))
    vals = draw(st.lists(st.sampled_from(LEVELS.values), min_size=n, max_size=n))
    return make_control(vals, t0=-1.0, tf=1.0)


class TestLevelSet:
    def test_basic_properties(self):
        ls = LevelSet((-2, -1, 0, 1, 2))
        assert ls.span == 4
        np.testing.assert_array_equal(ls.as_array(), [-2, -1, 0, 1, 2])

    def test_rejects_single_level(self):
        with pytest.raises(ValueError):
            LevelSet((3,))

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            LevelSet((1, 0))

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            LevelSet((0, 0, 1))

    def test_rejects_non_integer(self):
        with pytest.raises((ValueError, TypeError)):
            LevelSet((0.0, 0.5))


class TestUniformGrid:
    def test_cell_width(self):
        grid = UniformGrid(-1.0, 1.0, 32)
        assert grid.h == pytest.approx(2.0 / 32, abs=0.0)

    def test_boundaries(self):
        grid = UniformGrid(0.0, 1.0, 4)
        np.testing.assert_allclose(grid.boundaries(), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            UniformGrid(1.0, 1.0, 4)

    def test_rejects_zero_cells(self):
        with pytest.raises(ValueError):
            UniformGrid(0.0, 1.0, 0)


class TestControl:
    def test_rejects_value_outside_levels(self):
        with pytest.raises(ValueError):
            make_control([0, 3, 0])

    def test_rejects_wrong_length(self):
        grid = UniformGrid(0.0, 1.0, 3)
        with pytest.raises(ValueError):
            Control(grid, np.array([0, 1]), LEVELS)

    def test_values_read_only(self):
        c = make_control([0, 1, 0])
        with pytest.raises(ValueError):
            c.values[0] = 2

    def test_equality_ignores_level_metadata(self):
        grid = UniformGrid(0.0, 1.0, 2)
        a = Control(grid, np.array([0, 1]), LEVELS)
        b = Control(grid, np.array([0, 1]), LevelSet((0, 1)))
        assert a == b
        assert hash(a) == hash(b)


class TestTotalVariation:
    def test_constant_control(self):
        assert total_variation(make_control([1, 1, 1, 1])) == 0

    def test_two_unit_jumps(self):
        assert total_variation(make_control([0, 1, 0])) == 2

    def test_alternating_extremes(self):
        # |Δ| = 4 + 4 + 4 across the three interior facets
        assert total_variation(make_control([-2, 2, -2, 2])) == 12

    def test_no_boundary_terms(self):
        # a single cell has no interior facets regardless of its value
        assert total_variation(make_control([2])) == 0

    @given(controls())
    def test_nonnegative_integer(self, c):
        tv = total_variation(c)
        assert isinstance(tv, int)
        assert tv >= 0

    @given(controls())
    def test_agrees_with_step_representation(self, c):
        assert to_step_representation(c).total_variation() == total_variation(c)


class TestL1Distance:
    def test_identical_controls(self):
        c = make_control([0, 1, -1])
        assert l1_distance(c, c) == 0.0

    def test_two_cells(self):
        a = make_control([0, 0])
        b = make_control([1, -1])
        assert l1_distance(a, b) == pytest.approx(1.0)

    def test_single_cell_deviation(self):
        a = make_control([0, 0, 0, 0], t0=-1.0, tf=1.0)
        b = make_control([2, 0, 0, 0], t0=-1.0, tf=1.0)
        assert l1_distance(a, b) == pytest.approx(1.0)

    def test_grid_mismatch_raises(self):
        a = make_control([0, 0])
        b = make_control([0, 0, 0])
        with pytest.raises(ValueError):
            l1_distance(a, b)

    @given(controls(), st.data())
    def test_metric_axioms(self, a, data):
        vals = data.draw(st.lists(st.sampled_from(LEVELS.values),
                                  min_size=a.grid.n_cells, max_size=a.grid.n_cells))
        b = Control(a.grid, np.asarray(vals), LEVELS)
        assert l1_distance(a, b) == l1_distance(b, a)
        assert l1_distance(a, b) >= 0.0
        assert (l1_distance(a, b) == 0.0) == bool(np.array_equal(a.values, b.values))


class TestStepRepresentation:
    def test_simple_split(self):
        rep = to_step_representation(make_control([1, 1, 2, 2]))
        assert rep.switch_times == (0.5,)
        assert rep.heights == (1, 2)

    def test_constant(self):
        rep = to_step_representation(make_control([2, 2, 2]))
        assert rep.switch_times == ()
        assert rep.heights == (2,)

    def test_plateau(self):
        rep = to_step_representation(make_control([0, 1, 1, 0], t0=0.0, tf=2.0))
        assert rep.switch_times == (0.5, 1.5)
        assert rep.heights == (0, 1, 0)

    def test_rejects_equal_adjacent_heights(self):
        with pytest.raises(ValueError):
            StepRepresentation((0.5,), (1, 1))

    def test_rejects_unsorted_switches(self):
        with pytest.raises(ValueError):
            StepRepresentation((0.7, 0.3), (0, 1, 0))

    @given(controls())
    def test_round_trip(self, c):
        rep = to_step_representation(c)
        back = from_step_representation(rep, c.grid, LEVELS)
        np.testing.assert_array_equal(back.values, c.values)
        # re-extracting is idempotent
        assert to_step_representation(back) == rep


class TestRefine:
    def test_duplication(self):
        fine = refine(make_control([1, 2], levels=LevelSet((1, 2))), 2)
        np.testing.assert_array_equal(fine.values, [1, 1, 2, 2])
        assert fine.grid.n_cells == 4
        assert fine.grid.h == pytest.approx(0.25)

    def test_factor_one_is_identity(self):
        c = make_control([0, -1, 2])
        assert refine(c, 1) == c

    def test_rejects_nonpositive_factor(self):
        with pytest.raises(ValueError):
            refine(make_control([0, 1]), 0)

    @given(controls(), st.integers(min_value=1, max_value=4))
    def test_preserves_tv(self, c, k):
        assert total_variation(refine(c, k)) == total_variation(c)

    @given(controls(), st.data(), st.integers(min_value=1, max_value=4))
    @settings(max_examples=50)
    def test_l1_isometry(self, a, data, k):
        vals = data.draw(st.lists(st.sampled_from(LEVELS.values),
                                  min_size=a.grid.n_cells, max_size=a.grid.n_cells))
        b = Control(a.grid, np.asarray(vals), LEVELS)
        d_coarse = l1_distance(a, b)
        d_fine = l1_distance(refine(a, k), refine(b, k))
        assert math.isclose(d_fine, d_coarse, rel_tol=1e-14, abs_tol=1e-14)

    @given(controls())
    def test_switch_times_unchanged(self, c):
        assert to_step_representation(refine(c, 2)) == to_step_representation(c)


class TestSerialization:
    def test_json_round_trip(self):
        c = make_control([0, 1, -2, 2], t0=-1.0, tf=1.0)
        data = control_to_json(c)
        assert data == {"t0": -1.0, "tf": 1.0, "n_cells": 4, "values": [0, 1, -2, 2]}
        assert control_from_json(data, LEVELS) == c

    def test_file_round_trip(self, tmp_path):
        c = make_control([2, -1, 0])
        path = tmp_path / "control.json"
        save_control(c, path)
        assert load_control(path, LEVELS) == c
        # the file is plain JSON
        with open(path, encoding="utf-8") as fh:
            assert json.load(fh)["n_cells"] == 3

    def test_csv_rows(self, tmp_path):
        c = make_control([1, 1, 0], t0=0.0, tf=3.0)
        path = tmp_path / "control.csv"
        write_control_csv(c, path)
        lines = path.read_text(encoding="utf-8").strip().splitlines()
        assert lines[0] == "cell_start,cell_end,value"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == 1.0
        assert int(first[2]) == 1
