import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sbsize.empirical import (
    EmpiricalCdf, RegressionModel, estimate_sboc, fit_regression, load_model, pearson, pone_quantile,
    save_model, standard_error,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_fit_exact_line():
    m = fit_regression([(x, 2 * x + 1) for x in range(5)])
    assert m.alpha == pytest.approx(2.0) and m.beta == pytest.approx(1.0)
    assert m.sigma == pytest.approx(0.0, abs=1e-12) and m.n_samples == 5


def test_sigma_divides_by_sample_count():
    m = RegressionModel(0.5, 0.1, 0.0, 2)
    assert standard_error(m, [1.0, 3.0], [0.6 + 1.0, 1.6 - 1.0]) == pytest.approx(1.0)


@pytest.mark.parametrize("model, sivi, expected", [
    (RegressionModel(0.0046, 0.0567, 0.0315, 365), 22, 0.1894),
    (RegressionModel(0.0074, -0.0221, 0.0709, 365), 22, 0.2116),
])
def test_estimate_examples(model, sivi, expected):
    assert estimate_sboc(model, sivi) == pytest.approx(expected, abs=1e-6)


def test_estimate_floor_and_validation():
    assert estimate_sboc(RegressionModel(0.001, -1.0, 0.01, 10), 5) == 0.0
    with pytest.raises(ValueError):
        estimate_sboc(RegressionModel(0.001, 0.0, 0.0, 10), -1)


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0)
    assert pearson([1, 2, 3], [2, 1, 3]) == pytest.approx(0.5)


def test_pearson_constant_input():
    with pytest.raises(ValueError):
        pearson([1, 1, 1], [1, 2, 3])


def test_quantile_nearest_rank():
    cdf = EmpiricalCdf(range(1, 11))
    assert pone_quantile(cdf, 0.9) == 9
    assert pone_quantile(cdf, 0.95) == 10
    assert pone_quantile(cdf, 1.0) == 10
    assert pone_quantile(cdf, 0.01) == 1


def test_quantile_twenty_days():
    cdf = EmpiricalCdf([i / 100 for i in range(1, 21)])
    assert pone_quantile(cdf, 0.95) == pytest.approx(0.19)
    assert pone_quantile(cdf, 0.5) == pytest.approx(0.10)
    assert pone_quantile(EmpiricalCdf([i / 100 for i in range(1, 11)]), 0.9) == pytest.approx(0.09)


def test_quantile_errors():
    with pytest.raises(ValueError):
        pone_quantile(EmpiricalCdf([]), 0.5)
    with pytest.raises(ValueError):
        pone_quantile(EmpiricalCdf([1.0]), 0.0)


def test_cdf_call():
    cdf = EmpiricalCdf([3.0, 1.0, 2.0, 2.0])
    assert cdf(2.0) == 0.75 and cdf(0.5) == 0.0 and cdf(3.0) == 1.0
    np.testing.assert_array_equal(cdf.probabilities, [0.25, 0.5, 0.75, 1.0])


def test_model_file_round_trip(tmp_path):
    m = RegressionModel(0.0071, -0.013, 0.0584, 365)
    save_model(m, tmp_path / "m.txt")
    assert load_model(tmp_path / "m.txt") == m


def test_model_file_missing_key(tmp_path):
    (tmp_path / "m.txt").write_text("alpha=1\nbeta=2\n")
    with pytest.raises(ValueError, match="sigma"):
        load_model(tmp_path / "m.txt")


def test_degenerate_regression():
    with pytest.raises(ValueError):
        fit_regression([(1.0, 2.0), (1.0, 3.0)])


@settings(max_examples=150, deadline=None)
@given(pts=st.lists(st.tuples(finite, finite), min_size=3, max_size=50))
def test_residuals_orthogonal(pts):
    x = np.array([p[0] for p in pts])
    assume(np.ptp(x) > 1e-3)
    m = fit_regression(pts)
    y = np.array([p[1] for p in pts])
    resid = y - m.predict(x)
    scale = max(1.0, np.abs(y).max()) * max(1.0, np.abs(x).max()) * len(pts)
    assert abs(resid.sum()) <= 1e-9 * scale
    assert abs(np.dot(resid, x)) <= 1e-9 * scale * max(1.0, np.abs(x).max())


@settings(max_examples=150, deadline=None)
@given(pts=st.lists(st.tuples(finite, finite), min_size=3, max_size=50),
       a=st.floats(0.1, 10), b=finite, c=st.floats(0.1, 10), d=finite)
def test_pearson_affine_invariant(pts, a, b, c, d):
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    assume(np.ptp(x) > 1e-2 and np.ptp(y) > 1e-2)
    assert pearson(a * x + b, c * y + d) == pytest.approx(pearson(x, y), abs=1e-6)


@settings(max_examples=150, deadline=None)
@given(vals=st.lists(finite, min_size=1, max_size=60), l1=st.floats(0.01, 1), l2=st.floats(0.01, 1))
def test_quantile_monotone_in_level(vals, l1, l2):
    cdf = EmpiricalCdf(vals)
    lo, hi = sorted((l1, l2))
    assert pone_quantile(cdf, lo) <= pone_quantile(cdf, hi)
    q = pone_quantile(cdf, hi)
    assert cdf(q) >= hi - 1e-9


@settings(max_examples=100, deadline=None)
@given(vals=st.lists(finite, min_size=1, max_size=60), level=st.floats(0.01, 1))
def test_quantile_permutation_invariant(vals, level):
    assert pone_quantile(EmpiricalCdf(vals), level) == pone_quantile(EmpiricalCdf(vals[::-1]), level)
    assert pone_quantile(EmpiricalCdf(vals), level) in vals


def test_sigma_matches_definition():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 40, 100)
    y = 0.007 * x + 0.01 + rng.normal(0, 0.02, 100)
    m = fit_regression(list(zip(x, y)))
    assert m.sigma == pytest.approx(math.sqrt(np.mean((y - m.alpha * x - m.beta) ** 2)), rel=1e-12)
