import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmhull.rng import StreamKey, derive, gaussian_stream

u64 = st.integers(0, 2**64 - 1)


def test_same_key_replays():
    a = gaussian_stream(StreamKey(3, 1, 0)).take(1000)
    b = gaussian_stream(StreamKey(3, 1, 0)).take(1000)
    assert np.array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(seed=u64, rep=u64, lane=st.integers(0, 2**32 - 1), cut=st.integers(0, 300))
def test_chunked_draws_match_contiguous(seed, rep, lane, cut):
    key = StreamKey(seed, rep, lane)
    whole = gaussian_stream(key).take(300)
    s = gaussian_stream(key)
    parts = np.concatenate([s.take(cut), s.take(300 - cut)])
    assert np.array_equal(whole, parts)


def test_take_matrix_is_row_major_continuation():
    key = StreamKey(5, 2, 1)
    flat = gaussian_stream(key).take(12)
    assert np.array_equal(gaussian_stream(key).take_matrix(4, 3).ravel(), flat)


def test_iterator_matches_take():
    key = StreamKey(9, 0, 0)
    it = iter(gaussian_stream(key))
    got = np.array([next(it) for _ in range(2000)])
    assert np.array_equal(got, gaussian_stream(key).take(2000))


def test_replicates_uncorrelated():
    a = gaussian_stream(StreamKey(11, 0, 0)).take(100_000)
    b = gaussian_stream(StreamKey(11, 1, 0)).take(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_lanes_uncorrelated_and_distinct():
    base = StreamKey(11, 4, 0)
    a = gaussian_stream(derive(base, 1)).take(100_000)
    b = gaussian_stream(derive(base, 2)).take(100_000)
    assert not np.array_equal(a[:10], b[:10])
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_mean_and_variance_of_long_prefix():
    x = gaussian_stream(StreamKey(0, 0, 0)).take(1_000_000)
    assert abs(x.mean()) < 0.004
    assert abs(x.var() - 1) < 0.005


def test_kolmogorov_smirnov_against_normal():
    x = np.sort(gaussian_stream(StreamKey(2024, 0, 0)).take(100_000))
    cdf = 0.5 * (1 + np.vectorize(math.erf)(x / math.sqrt(2)))
    n = len(x)
    ks = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
    assert ks < 0.01


def test_derive_substitutes_lane():
    assert derive(StreamKey(7, 3, 0), 5) == StreamKey(7, 3, 5)
    assert derive(StreamKey(7, 3, 0), 5) == derive(StreamKey(7, 3, 0), 5)


@pytest.mark.parametrize("kw", [dict(seed=-1), dict(seed=2**64), dict(replicate=-1),
                                dict(lane=2**32)])
def test_key_ranges_enforced(kw):
    with pytest.raises(ValueError):
        StreamKey(**kw)
