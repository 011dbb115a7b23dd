import math

import numpy as np
import pytest

from bmhull.harness import passage_samples
from bmhull.rng import StreamKey
from bmhull.stage import (
    StageRadii,
    Subspace,
    expected_total_time,
    gram_simplex_volume,
    optimal_radii,
    run_construction,
)


def test_optimal_radii():
    assert optimal_radii(1).r == pytest.approx((1.0,))
    assert optimal_radii(2).r == pytest.approx((2 ** 0.75, 2 ** 0.25), rel=1e-14)
    for n in range(1, 21):
        logprod = float(np.sum(np.log(optimal_radii(n).r)))
        assert logprod == pytest.approx(math.lgamma(n + 1), rel=1e-12)


def test_expected_total_time():
    for n in range(1, 21):
        assert expected_total_time(n, optimal_radii(n)) == pytest.approx(
            n * math.exp(math.lgamma(n + 1) / n), rel=1e-13)
    assert expected_total_time(2, (1.0, 1.0)) == 1.5
    with pytest.raises(ValueError):
        expected_total_time(2, (1.0,))
    with pytest.raises(ValueError):
        StageRadii((1.0, -1.0))


def test_gram_simplex_volume():
    for n in range(1, 7):
        assert gram_simplex_volume(np.eye(n)) == pytest.approx(1 / math.factorial(n))
    assert gram_simplex_volume([[1, 2, 3], [1, 2, 3], [0, 1, 0]]) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = rng.standard_normal((3, 3))
        assert gram_simplex_volume(m) == pytest.approx(abs(np.linalg.det(m)) / 6, rel=1e-12)


def test_subspace_complement():
    rng = np.random.default_rng(1)
    space = Subspace.full(4)
    xs = []
    for _ in range(3):
        x = rng.standard_normal(4)
        xs.append(x)
        space = space.without(x)
        b = space.basis
        assert np.allclose(b @ b.T, np.eye(len(b)), atol=1e-12)
        assert np.all(np.abs(space.coords(np.array(xs))) < 1e-10)
    assert space.dim == 1


def test_one_stage_is_interval_exit():
    times = np.array([run_construction(1, StageRadii((1.0,)), None, StreamKey(2, i, 6),
                                       with_hull=False).total_time for i in range(10_000)])
    se = times.std(ddof=1) / math.sqrt(len(times))
    assert abs(times.mean() - 1.0) < 3 * se + 1e-4


@pytest.mark.parametrize("n,reps", [(1, 20), (2, 20), (3, 20), (4, 10), (5, 4)])
def test_per_sample_inequalities(n, reps):
    radii = optimal_radii(n)
    floor = math.prod(radii.r) / math.factorial(n)
    for i in range(reps):
        res = run_construction(n, radii, None, StreamKey(3, i, 6))
        assert not res.censored
        assert np.all(np.diff(res.times) > 0)
        assert res.simplex_volume >= floor - 1e-9
        assert res.hull_volume >= res.simplex_volume - 1e-9


def test_stage_points_orthogonal_to_later_complements():
    res = run_construction(4, optimal_radii(4), None, StreamKey(4, 0, 6), with_hull=False)
    for j, basis in enumerate(res.complements):
        assert basis.shape == (4 - j - 1, 4)
        if len(basis):
            assert np.allclose(basis @ basis.T, np.eye(len(basis)), atol=1e-12)
            assert np.all(np.abs(res.points[: j + 1] @ basis.T) < 1e-10)


def test_stage_durations_match_ball_exit_means():
    n, reps = 3, 2000
    radii = optimal_radii(n)
    res = [run_construction(n, radii, None, StreamKey(5, i, 6), with_hull=False)
           for i in range(reps)]
    dur = np.diff(np.array([np.concatenate([[0.0], r.times]) for r in res]), axis=1)
    expect = np.array(radii.r) ** 2 / np.arange(n, 0, -1)
    se = dur.std(axis=0, ddof=1) / math.sqrt(reps)
    assert np.all(np.abs(dur.mean(axis=0) - expect) < 3 * se + 1e-3 * expect)


def test_grid_bias_shrinks_with_dt():
    n, reps = 3, 1000
    radii = optimal_radii(n)
    target = expected_total_time(n, radii)

    def mean_total(dt):
        t = np.array([run_construction(n, radii, dt, StreamKey(6, i, 6), with_hull=False).total_time
                      for i in range(reps)])
        return t.mean(), t.std(ddof=1) / math.sqrt(reps)

    coarse, se_c = mean_total(0.05)
    fine, se_f = mean_total(None)
    assert coarse - target > 3 * se_c
    assert abs(fine - target) < abs(coarse - target)
    assert abs(fine - target) < 3 * se_f + 1e-3 * target


def test_construction_dominates_volume_passage():
    n, reps = 2, 500
    theta, cens = passage_samples("V", n, reps, 7)
    assert cens == 0
    stage = np.array([run_construction(n, optimal_radii(n), None, StreamKey(7, i, 6),
                                       with_hull=False).total_time for i in range(reps)])
    se = math.hypot(theta.std(ddof=1), stage.std(ddof=1)) / math.sqrt(reps)
    assert theta.mean() <= stage.mean() + 3 * se


def test_censoring_flag():
    res = run_construction(3, optimal_radii(3), None, StreamKey(8, 0, 6), horizon_factor=1e-3)
    assert res.censored and math.isnan(res.hull_volume)


def test_argument_checks():
    with pytest.raises(ValueError):
        run_construction(2, optimal_radii(3), None, StreamKey())
    with pytest.raises(ValueError):
        run_construction(2, optimal_radii(2), 0.0, StreamKey())
