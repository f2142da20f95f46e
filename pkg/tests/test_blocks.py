import io
import math
from dataclasses import replace
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakdemand import blocks
from peakdemand.blocks import Block
from peakdemand.errors import DegenerateBlockError, InvalidInputError
from peakdemand.ingest import Day, DivisionSeries


def make_series(demand, at=None, start=date(2010, 1, 1)):
    at = at if at is not None else [25.0] * len(demand)
    days = tuple(Day(start + timedelta(days=i), float(d), float(a)) for i, (d, a) in enumerate(zip(demand, at)))
    return DivisionSeries("X", None, days)


def make_block(demand, at=None):
    return Block(0, make_series(demand, at).days, 7)


@pytest.mark.parametrize("n,expected", [(45, [15, 15, 15]), (50, [15, 15, 15]), (53, [15, 15, 15, 8]), (15, [15])])
def test_partition_sizes(n, expected):
    got = blocks.partition_blocks(make_series(np.arange(n)), 15)
    assert [len(b.days) for b in got] == expected
    assert [b.index for b in got] == list(range(len(expected)))


def test_five_years_of_fortnights(res_series):
    got = blocks.partition_blocks(res_series, 15)
    assert 100 <= len(got) <= 121


def test_partition_rejects_bad_length_and_empty():
    with pytest.raises(InvalidInputError):
        blocks.partition_blocks(make_series([1, 2, 3]), 10)
    with pytest.raises(InvalidInputError):
        blocks.partition_blocks(make_series([]), 7)


@given(st.integers(1, 200), st.sampled_from([7, 15, 30]))
def test_partition_reconstructs_series(n, block_len):
    s = make_series(np.arange(n))
    got = blocks.partition_blocks(s, block_len)
    covered = sum((b.days for b in got), ())
    assert covered + s.days[len(covered):] == s.days
    assert len(s.days) - len(covered) < math.ceil(block_len / 2) or len(covered) == len(s.days)


def test_standardize_arithmetic_sequence():
    np.testing.assert_allclose(blocks.standardize_block(make_block([10, 20, 30])), [-1, 0, 1], atol=1e-15)


def test_standardize_constant_block():
    with pytest.raises(DegenerateBlockError):
        blocks.standardize_block(make_block([5, 5, 5]))


@given(st.lists(st.floats(0, 1e4), min_size=2, max_size=30))
def test_standardized_moments(values):
    if np.std(values) < 1e-3:
        return
    z = blocks.standardize_block(make_block(values))
    assert abs(z.mean()) <= 1e-12
    assert abs(z.std(ddof=1) - 1) <= 1e-12


def test_block_maximum_last_position():
    m = blocks.block_maximum(make_block([10, 20, 30], [25, 26, 27]))
    assert m.z == pytest.approx(1.0)
    assert m.covariate == 27


def test_block_maximum_tie_goes_to_earliest():
    m = blocks.block_maximum(make_block([30, 20, 30], [25, 26, 27]))
    assert m.covariate == 25
    assert m.argmax_date == date(2010, 1, 1)


def test_block_mean_covariate():
    m = blocks.block_maximum(make_block([10, 20, 30], [25, 26, 30]), covariate_mode="block_mean")
    assert m.covariate == pytest.approx(27.0)


def test_block_maximum_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        n = int(rng.integers(2, 31))
        d = rng.gamma(2.0, 100.0, n)
        at = rng.normal(28, 3, n)
        m = blocks.block_maximum(make_block(d, at))
        mean = sum(d) / n
        sd = math.sqrt(sum((x - mean) ** 2 for x in d) / (n - 1))
        brute = [(x - mean) / sd for x in d]
        best = max(range(n), key=lambda i: (brute[i], -i))
        assert m.z == pytest.approx(brute[best], abs=1e-12)
        assert m.covariate == at[best]
        assert 0 <= m.z <= (n - 1) / math.sqrt(n) + 1e-12


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1e3), min_size=2, max_size=40), st.floats(0.01, 100), st.floats(-1e3, 1e3))
def test_affine_invariance(values, a, b):
    if np.std(values) < 1e-2:
        return
    z1 = blocks.block_maximum(make_block(values)).z
    z2 = blocks.block_maximum(make_block([a * v + b for v in values])).z
    assert abs(z1 - z2) <= 1e-9


def test_degenerate_blocks_are_skipped(caplog):
    s = make_series([5.0] * 7 + list(range(7)))
    out = blocks.extract_block_maxima(s, 7)
    assert [m.block_index for m in out] == [1]
    assert "constant demand" in caplog.text


def test_block_maxima_csv_round_trip(res_series):
    maxima = blocks.extract_block_maxima(res_series, 15)
    buf = io.StringIO()
    blocks.write_block_maxima(maxima, buf)
    assert buf.getvalue().splitlines()[0] == "block_index,argmax_date,z,covariate"
    assert blocks.read_block_maxima(io.StringIO(buf.getvalue())) == maxima
