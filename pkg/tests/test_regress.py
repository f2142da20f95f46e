from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakdemand import regress
from peakdemand.errors import InvalidInputError, SingularDesignError
from peakdemand.ingest import Day, DivisionSeries
from peakdemand.regress import AnomalyPoint


def series_from(pairs):
    days = tuple(Day(d, float(v), 25.0 + i % 5) for i, (d, v) in enumerate(pairs))
    return DivisionSeries("X", None, days)


def test_single_year_anomaly():
    s = series_from([(date(2010, 1, k + 1), v) for k, v in enumerate([10, 20, 30])])
    assert [p.anomaly for p in regress.yearly_anomaly(s)] == [-10.0, 0.0, 10.0]


def test_years_centred_independently():
    pairs = [(date(2010, 12, 30), 10), (date(2010, 12, 31), 20), (date(2011, 1, 1), 100), (date(2011, 1, 2), 300)]
    anomalies = [p.anomaly for p in regress.yearly_anomaly(series_from(pairs))]
    assert anomalies == [-5.0, 5.0, -100.0, 100.0]


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=60))
def test_anomalies_sum_to_zero_per_year(values):
    start = date(2010, 12, 1)
    s = series_from([(start + timedelta(days=i), v) for i, v in enumerate(values)])
    pts = regress.yearly_anomaly(s)
    scale = max(1.0, max(values))
    for year in {p.year for p in pts}:
        assert abs(sum(p.anomaly for p in pts if p.year == year)) <= 1e-9 * scale * len(values)


def random_points(rng, n=25, years=(2008, 2009, 2010), noise=1.0, slope=3.0):
    effects = {y: rng.normal(0, 20) for y in years}
    pts = []
    for i in range(n):
        year = years[i % len(years)]
        at = rng.uniform(18, 40)
        pts.append(AnomalyPoint(date(year, 1, 1) + timedelta(days=i), year,
                                slope * at + effects[year] + rng.normal(0, noise), at))
    return pts


def normal_equations(points, base_year):
    years = sorted({p.year for p in points} - {base_year})
    X = np.array([[1.0, p.at] + [1.0 if p.year == y else 0.0 for y in years] for p in points])
    y = np.array([p.anomaly for p in points])
    return np.linalg.solve(X.T @ X, X.T @ y), years


def test_against_normal_equations():
    rng = np.random.default_rng(0)
    for _ in range(100):
        pts = random_points(rng, n=int(rng.integers(8, 30)))
        rf = regress.fixed_effects_fit(pts, 2008)
        beta, years = normal_equations(pts, 2008)
        assert rf.intercept == pytest.approx(beta[0], abs=1e-8)
        assert rf.slope == pytest.approx(beta[1], abs=1e-8)
        for i, y in enumerate(years):
            assert rf.year_effects[y] == pytest.approx(beta[2 + i], abs=1e-8)
        assert rf.year_effects[2008] == 0.0
        assert rf.adj_r2 <= 1.0


def test_noiseless_slope():
    pts = random_points(np.random.default_rng(1), n=60, noise=0.0, slope=40.0)
    rf = regress.fixed_effects_fit(pts, 2008)
    assert rf.slope == pytest.approx(40.0, abs=1e-9)
    assert rf.adj_r2 == pytest.approx(1.0, abs=1e-12)
    assert rf.p_value == 0.0


def test_base_year_change():
    pts = random_points(np.random.default_rng(2), n=80)
    a = regress.fixed_effects_fit(pts, 2008)
    b = regress.fixed_effects_fit(pts, 2010)
    assert b.year_effects[2010] == 0.0 and a.year_effects != b.year_effects
    assert b.slope == pytest.approx(a.slope, abs=1e-9)
    assert b.adj_r2 == pytest.approx(a.adj_r2, abs=1e-9)
    assert b.p_value == pytest.approx(a.p_value, abs=1e-9)


def test_per_year_constant_absorbed():
    rng = np.random.default_rng(3)
    pts = random_points(rng, n=80)
    shift = {2008: 5.0, 2009: -40.0, 2010: 123.0}
    moved = [p._replace(anomaly=p.anomaly + shift[p.year]) for p in pts]
    assert regress.fixed_effects_fit(moved, 2008).slope == pytest.approx(
        regress.fixed_effects_fit(pts, 2008).slope, abs=1e-8)


def test_f_test_p_value_against_scipy():
    from scipy import stats

    pts = random_points(np.random.default_rng(4), n=40, noise=30.0, slope=0.5)
    rf = regress.fixed_effects_fit(pts, 2008)
    k = 4
    assert rf.p_value == pytest.approx(stats.f.sf(rf.f_statistic, k - 1, rf.n - k), rel=1e-12)
    assert 0.0 < rf.p_value < 1.0
    assert set(rf.t_stats) == {"intercept", "at", "2009", "2010"}


def test_constant_at_is_singular():
    pts = [AnomalyPoint(date(2008, 1, i + 1), 2008, float(i), 30.0) for i in range(10)]
    with pytest.raises(SingularDesignError):
        regress.fixed_effects_fit(pts, 2008)


def test_missing_base_year():
    pts = random_points(np.random.default_rng(5))
    with pytest.raises(InvalidInputError):
        regress.fixed_effects_fit(pts, 2015)


@pytest.mark.parametrize("slope,mean,expected", [(40.813, 2718.0, 1.50), (0.0, 123.0, 0.0), (20.0, 1000.0, 2.0)])
def test_percent_sensitivity(slope, mean, expected):
    assert regress.percent_sensitivity(slope, mean) == pytest.approx(expected, abs=5e-3)


def test_percent_sensitivity_nonpositive_mean():
    with pytest.raises(InvalidInputError):
        regress.percent_sensitivity(1.0, 0.0)


def test_loess_constant():
    x = np.linspace(0, 10, 30)
    np.testing.assert_allclose(regress.loess(x, np.full(30, 4.2), 0.3)[:, 1], 4.2, atol=1e-12)


def test_loess_reproduces_line():
    x = np.random.default_rng(0).uniform(0, 10, 50)
    out = regress.loess(x, 2 * x + 1, span=1.0)
    np.testing.assert_allclose(out[:, 1], 2 * out[:, 0] + 1, atol=1e-9)


def test_loess_matches_weighted_least_squares():
    rng = np.random.default_rng(1)
    x, y = rng.uniform(0, 10, 40), rng.normal(0, 1, 40)
    x0, span = 4.3, 0.5
    q = int(span * 40)
    d = np.abs(x - x0)
    h = np.sort(d)[q - 1]
    w = np.clip(1 - (d / h) ** 3, 0, None) ** 3
    A = np.column_stack([np.ones_like(x), x - x0])
    W = np.diag(w)
    beta = np.linalg.solve(A.T @ W @ A, A.T @ W @ y)
    assert regress.loess(x, y, span, [x0])[0, 1] == pytest.approx(beta[0], abs=1e-10)


def test_loess_identical_x_falls_back_to_mean():
    out = regress.loess([2.0] * 5, [1.0, 2.0, 3.0, 4.0, 5.0], span=1.0)
    assert out.shape == (1, 2)
    assert out[0, 1] == pytest.approx(3.0)


@settings(max_examples=30)
@given(st.permutations(list(range(20))))
def test_loess_permutation_invariant(perm):
    rng = np.random.default_rng(7)
    x, y = rng.uniform(0, 5, 20), rng.normal(size=20)
    base = regress.loess(x, y, 0.6)
    idx = np.array(perm)
    np.testing.assert_array_equal(regress.loess(x[idx], y[idx], 0.6), base)


@pytest.mark.parametrize("x,span", [([1.0, 2.0], 1.0), ([1.0, 2.0, 3.0], 0.5), ([1.0, 2.0, 3.0], 1.5)])
def test_loess_preconditions(x, span):
    with pytest.raises(InvalidInputError):
        regress.loess(x, x, span)


def test_block_mean_points():
    pts = [AnomalyPoint(date(2008, 1, i + 1), 2008, float(i), float(2 * i)) for i in range(5)]
    out = regress.block_mean_points(pts, 2)
    assert [(p.anomaly, p.at) for p in out] == [(0.5, 1.0), (2.5, 5.0), (4.0, 8.0)]
