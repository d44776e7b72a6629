import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import digamma

from exploration_metrics import InputError, StateSpace
from exploration_metrics.metrics import bin_divisions, x_bbm, x_bin, x_nn, x_urel

LOG2 = math.log(2)


def uniform(n, d, seed):
    return np.random.default_rng(seed).random((n, d))


class TestXUrel:
    @pytest.mark.parametrize("estimator", ["knn", "nnr"])
    def test_uniform_data_is_near_zero(self, estimator):
        res = x_urel(uniform(5000, 2, 0), StateSpace.unit(2), estimator, rng=np.random.default_rng(1))
        assert abs(res.value) <= 0.15
        assert res.metric_id == f"xurel_{estimator}"
        assert res.dataset_size == 5000

    def test_half_box_knn(self):
        # D(Q||U) = log 2 is finite; D(U||Q) is infinite in truth and merely large here
        res = x_urel(0.5 * uniform(5000, 1, 2), StateSpace.unit(1), "knn", rng=np.random.default_rng(3))
        bias = math.log(5) - float(digamma(5))
        assert res.params["backward"] == pytest.approx(LOG2 + bias, abs=0.03)
        assert res.params["forward"] > LOG2
        assert res.value < -2 * LOG2

    def test_half_box_nnr_within_clamp_bounds(self):
        res = x_urel(0.5 * uniform(5000, 1, 4), StateSpace.unit(1), "nnr", rng=np.random.default_rng(5))
        ceiling = 1 / res.params["ratio_floor"]
        assert -2 * math.log(ceiling) <= res.value <= -0.7

    @pytest.mark.parametrize("estimator", ["knn", "nnr"])
    def test_uniform_beats_half_box(self, estimator):
        space = StateSpace.unit(2)
        full = x_urel(uniform(3000, 2, 6), space, estimator, rng=np.random.default_rng(7)).value
        half = x_urel(0.5 * uniform(3000, 2, 6), space, estimator, rng=np.random.default_rng(7)).value
        assert full - half >= 0.5

    def test_requires_points_inside(self):
        with pytest.raises(InputError):
            x_urel(np.array([[1.5]] * 10), StateSpace.unit(1), rng=np.random.default_rng(0))

    def test_requires_enough_points(self):
        with pytest.raises(InputError):
            x_urel(uniform(5, 1, 0), StateSpace.unit(1), "knn", k=5, rng=np.random.default_rng(0))

    def test_unknown_estimator(self):
        with pytest.raises(InputError):
            x_urel(uniform(50, 1, 0), StateSpace.unit(1), "kde", rng=np.random.default_rng(0))

    def test_unreliable_flag_propagates(self):
        data = np.repeat(uniform(4, 1, 0), 25, axis=0)
        res = x_urel(data, StateSpace.unit(1), "knn", rng=np.random.default_rng(0))
        assert res.params["unreliable"]
        assert res.params["excluded_fraction"] > 0.1


class TestXBin:
    def test_divisions_formula(self):
        assert bin_divisions(500, 1) == 100
        assert bin_divisions(5000, 25) == 2
        assert bin_divisions(5000, 3) == 10
        assert bin_divisions(2000, 25) == 2

    def test_evenly_spaced_fills_every_bin(self):
        data = ((np.arange(500) + 0.5) / 500).reshape(-1, 1)
        res = x_bin(data, StateSpace.unit(1))
        assert res.params["divisions"] == 100
        assert res.value == 1.0

    def test_identical_points(self):
        res = x_bin(np.full((500, 2), 0.3), StateSpace.unit(2))
        assert res.value == 1 / min(500, res.params["divisions"] ** 2)

    def test_high_dimension_distinct_cells_saturate(self):
        # 5000 distinct corners of the 2^25 grid
        codes = np.random.default_rng(0).choice(2**25, size=5000, replace=False)
        bits = (codes[:, None] >> np.arange(25)) & 1
        data = 0.25 + 0.5 * bits
        res = x_bin(data, StateSpace.unit(25))
        assert res.params["divisions"] == 2
        assert res.params["denominator"] == 5000
        assert res.value == 1.0

    def test_upper_boundary_in_last_bin(self):
        res = x_bin(np.array([[1.0]] * 10), StateSpace.unit(1))
        assert res.params["occupied"] == 1

    def test_monotone_under_union_with_fixed_denominator(self):
        # N in (405, 500] keeps 10 divisions per axis in d=2, denominator 100
        space = StateSpace.unit(2)
        a = uniform(410, 2, 1) ** 3
        b = uniform(90, 2, 2)
        ra, rab = x_bin(a, space), x_bin(np.vstack([a, b]), space)
        assert ra.params["denominator"] == rab.params["denominator"] == 100
        assert rab.value >= ra.value


class TestXBbm:
    def test_single_point(self):
        assert x_bbm(np.array([[0.2, 0.7]]), StateSpace.unit(2)).value == 0.0

    def test_opposite_corners(self):
        space = StateSpace([-1, 0, 5], [1, 3, 6])
        assert x_bbm(np.vstack([space.lower, space.upper]), space).value == 1.0

    def test_hand_computed(self):
        assert x_bbm(np.array([[0, 0], [0.5, 1]]), StateSpace.unit(2)).value == 0.75

    def test_monotone_under_union(self):
        space = StateSpace.unit(3)
        a, b = 0.5 * uniform(20, 3, 3), uniform(5, 3, 4)
        assert x_bbm(np.vstack([a, b]), space).value >= x_bbm(a, space).value


class TestXNn:
    def test_identical_points(self):
        assert x_nn(np.full((10, 3), 0.4), StateSpace.unit(3)).value == 0.0

    def test_uniform_trace(self):
        res = x_nn(uniform(100_000, 2, 5), StateSpace.unit(2))
        assert res.value == pytest.approx(2 / 12, rel=0.05)

    def test_hand_computed(self):
        assert x_nn(np.array([[0, 0], [1, 1]]), StateSpace.unit(2)).value == pytest.approx(1.0)

    def test_normalized_by_side(self):
        space = StateSpace([0, 0], [2, 4])
        assert x_nn(np.array([[0, 0], [2, 4]]), space).value == pytest.approx(1.0)

    def test_needs_two_points(self):
        with pytest.raises(InputError):
            x_nn(np.array([[0.5]]), StateSpace.unit(1))


def test_value_ranges():
    space = StateSpace.unit(3)
    for seed in range(5):
        data = uniform(300, 3, seed) ** (seed + 1)
        assert 0.0 <= x_bin(data, space).value <= 1.0
        assert 0.0 <= x_bbm(data, space).value <= 1.0
        assert x_nn(data, space).value >= 0.0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    space = StateSpace.unit(3)
    data = rng.random((150, 3)) ** 2
    perm = rng.permutation(150)
    for fn in (x_bin, x_bbm, x_nn):
        assert fn(data, space).value == fn(data[perm], space).value
    for est, k in (("knn", 5), ("nnr", 20)):
        a = x_urel(data, space, est, k, rng=np.random.default_rng(0)).value
        b = x_urel(data[perm], space, est, k, rng=np.random.default_rng(0)).value
        assert a == b


@settings(max_examples=15, deadline=None)
@given(
    st.lists(st.floats(0.01, 100), min_size=3, max_size=3),
    st.lists(st.floats(-50, 50), min_size=3, max_size=3),
    st.integers(0, 2**32 - 1),
)
def test_affine_invariance(factors, shifts, seed):
    data = np.random.default_rng(seed).random((400, 3)) ** 2
    space = StateSpace.unit(3)
    factors, shifts = np.array(factors), np.array(shifts)
    moved = StateSpace(shifts, shifts + factors)
    moved_data = moved.clip(shifts + data * factors)
    for fn in (x_bin, x_bbm, x_nn):
        assert fn(moved_data, moved).value == pytest.approx(fn(data, space).value, rel=1e-9, abs=1e-12)
    for est, k in (("knn", 5), ("nnr", 30)):
        a = x_urel(data, space, est, k, rng=np.random.default_rng(1)).value
        b = x_urel(moved_data, moved, est, k, rng=np.random.default_rng(1)).value
        assert abs(a - b) <= 0.1
