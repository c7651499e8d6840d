import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from condctm.ecdf import (
    GrowingPool,
    build_reference,
    dkw_epsilon,
    ecdf_eval,
    pooled_pvalue_path,
    pvalue_fixed,
    pvalue_fixed_randomized,
    pvalue_pooled_randomized,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_dkw_width_n1000():
    ref = build_reference(np.random.default_rng(0).standard_normal(1000), delta=0.1)
    # sqrt(ln 20 / 2000) to 30 digits: 0.038702275602049...
    assert ref.epsilon == pytest.approx(0.038702275602049, abs=1e-12)
    assert ref.n == 1000


def test_dkw_width_clamped_for_single_point():
    ref = build_reference([5.0], delta=0.1)
    assert ref.epsilon == 1.0
    raw = math.sqrt(math.log(20) / 2)
    assert raw == pytest.approx(1.2238734153, abs=1e-9)


@pytest.mark.parametrize("delta", [1.5, 0.0, 1.0, -0.1])
def test_bad_delta(delta):
    with pytest.raises(ValueError):
        build_reference([1.0, 2.0], delta=delta)


def test_empty_and_nan_reference():
    with pytest.raises(ValueError):
        build_reference([], delta=0.1)
    with pytest.raises(ValueError):
        build_reference([1.0, float("nan")], delta=0.1)
    with pytest.raises(ValueError):
        dkw_epsilon(0, 0.1)


def test_reference_is_sorted_and_frozen():
    ref = build_reference([3.0, -1.0, 2.0, 0.0, 1.0], 0.1)
    assert list(ref.scores) == [-1.0, 0.0, 1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        ref.scores[0] = 10.0


def test_ecdf_hand_counts():
    ref = build_reference([-1, 0, 1, 2], 0.1)
    assert ecdf_eval(ref, 0.5) == 0.5
    assert ecdf_eval(ref, -3.0) == 0.0
    assert ecdf_eval(ref, 2.0) == 1.0
    assert ecdf_eval(ref, 99.0) == 1.0
    # right-continuous at a jump
    assert ecdf_eval(ref, 0.0) == 0.5
    assert ecdf_eval(ref, np.nextafter(0.0, -1)) == 0.25


def test_pvalue_fixed_matches_ecdf():
    ref = build_reference([-1, 0, 1, 2], 0.1)
    assert pvalue_fixed(ref, 0.5) == 0.5
    assert pvalue_fixed(ref, -10) == 0.0
    assert pvalue_fixed(ref, 10) == 1.0
    with pytest.raises(ValueError):
        pvalue_fixed(ref, float("nan"))


def test_pvalue_fixed_randomized_examples():
    ref = build_reference([1, 2, 3], 0.1)
    assert pvalue_fixed_randomized(ref, 2.0, 0.5) == pytest.approx(0.5)
    assert pvalue_fixed_randomized(ref, 0.0, 0.0) == 0.0
    assert pvalue_fixed_randomized(ref, 9.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        pvalue_fixed_randomized(ref, 2.0, 1.5)


def test_pooled_pvalue_examples():
    pool = GrowingPool([-1.0, 0.0, 2.0])
    pool.insert(1.0)
    assert pvalue_pooled_randomized(pool, 1.0, 0.5) == pytest.approx(0.625)

    ties = GrowingPool([3.0, 3.0])
    ties.insert(3.0)
    assert pvalue_pooled_randomized(ties, 3.0, 0.0) == 0.0

    top = GrowingPool([1.0, 2.0, 3.0, 4.0])
    top.insert(5.0)
    assert pvalue_pooled_randomized(top, 5.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        pvalue_pooled_randomized(top, 5.0, -0.1)


def test_pool_size_counts_absorbed_points():
    ref = build_reference([0.0, 1.0, 2.0], 0.1)
    pool = GrowingPool(ref)
    for x in [0.5, 0.5, 7.0]:
        pool.insert(x)
    assert pool.size == 6 and pool.absorbed == 3
    assert pool.count_equal(0.5) == 2
    # the reference itself is untouched
    assert ref.n == 3


def test_pooled_path_matches_stepwise():
    rng = np.random.default_rng(3)
    ref = build_reference(rng.integers(0, 5, 30).astype(float), 0.1)  # many ties
    stream = rng.integers(0, 5, 200).astype(float)
    u = rng.random(200)
    pool = GrowingPool(ref)
    expected = []
    for x, ut in zip(stream, u):
        pool.insert(x)
        expected.append(pvalue_pooled_randomized(pool, x, ut))
    np.testing.assert_array_equal(pooled_pvalue_path(ref, stream, u), expected)


@given(st.lists(finite, min_size=1, max_size=50), st.lists(finite, min_size=2, max_size=20))
def test_ecdf_monotone_and_on_lattice(samples, xs):
    ref = build_reference(samples, 0.1)
    xs = np.sort(xs)
    vals = ecdf_eval(ref, xs)
    assert np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(vals * ref.n, np.round(vals * ref.n), atol=1e-9)
    assert np.all((vals >= 0) & (vals <= 1))


@given(st.lists(finite, min_size=1, max_size=50), finite)
def test_pvalue_fixed_deterministic(samples, x):
    ref = build_reference(samples, 0.2)
    before = ref.scores.copy()
    assert pvalue_fixed(ref, x) == pvalue_fixed(ref, x)
    np.testing.assert_array_equal(ref.scores, before)


@given(st.lists(finite, min_size=1, max_size=50), finite, st.floats(0, 1))
def test_randomized_pvalues_in_unit_interval(samples, x, u):
    ref = build_reference(samples, 0.1)
    assert 0.0 <= pvalue_fixed_randomized(ref, x, u) <= 1.0
    pool = GrowingPool(ref)
    pool.insert(x)
    assert 0.0 <= pvalue_pooled_randomized(pool, x, u) <= 1.0


def test_pooled_pvalues_uniform_ks():
    rng = np.random.default_rng(11)
    ref = build_reference(rng.standard_normal(50), 0.1)
    p = pooled_pvalue_path(ref, rng.standard_normal(10_000), rng.random(10_000))
    assert stats.kstest(p, "uniform").pvalue > 0.01


def _sup_deviation(ref, cdf):
    i = np.arange(1, ref.n + 1)
    F = cdf(ref.scores)
    return max(np.max(i / ref.n - F), np.max(F - (i - 1) / ref.n))


@pytest.mark.slow
def test_dkw_band_coverage():
    # 500 reference draws; coverage >= 1 - delta minus three binomial sds
    rng = np.random.default_rng(5)
    delta, reps = 0.1, 500
    held = [
        _sup_deviation(build_reference(rng.standard_normal(200), delta), stats.norm.cdf)
        <= dkw_epsilon(200, delta)
        for _ in range(reps)
    ]
    slack = 3 * math.sqrt(delta * (1 - delta) / reps)
    assert np.mean(held) >= 1 - delta - slack
