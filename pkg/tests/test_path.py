import io
import math

import numpy as np
import pytest

from bmhull.errors import Censored, Unsupported
from bmhull.geometry import DegenerateInput, build_hull, diameter, hull_surface_area, hull_volume
from bmhull.geometry import min_enclosing_ball
from bmhull.kinds import FunctionalKind
from bmhull.path import (
    BrownianPath,
    PathConfig,
    dump_path,
    exit_time,
    exit_time_unit_ball,
    first_passage,
    functional_at_one,
    functionals_at,
    passage_config,
    sample_path,
)
from bmhull.rng import StreamKey, gaussian_stream

KINDS = "VSDR"


def prefix_value(pts, kind):
    n = pts.shape[1]
    if kind == "D" or (kind == "V" and n == 1):
        return diameter(pts)
    if kind == "R":
        return min_enclosing_ball(pts).radius
    try:
        h = build_hull(pts)
    except DegenerateInput:
        return 0.0
    return hull_volume(h) if kind == "V" else hull_surface_area(h)


def brute_passage(pts, kind, level):
    """First index whose prefix functional exceeds level, by bisection on the
    (monotone) prefix functional."""
    if prefix_value(pts, kind) <= level:
        return -1
    a, b = 0, len(pts) - 1
    while b - a > 1:
        mid = (a + b) // 2
        if prefix_value(pts[: mid + 1], kind) > level:
            b = mid
        else:
            a = mid
    return b


def test_single_step_is_one_draw():
    cfg = PathConfig(3, 1, 1.0, StreamKey(4, 2, 0))
    p = sample_path(cfg)
    assert np.all(p.samples[0] == 0)
    assert np.array_equal(p.samples[1], gaussian_stream(cfg.key).take(3))


def test_increments_are_scaled_draws():
    cfg = PathConfig(2, 5000, 2.0, StreamKey(1, 0, 0))
    p = sample_path(cfg)
    draws = gaussian_stream(cfg.key).take_matrix(5000, 2)
    assert np.allclose(np.diff(p.samples, axis=0), draws * math.sqrt(cfg.dt), rtol=1e-9, atol=1e-12)
    assert p.times[-1] == pytest.approx(2.0)
    assert p.index_at(1.0) == 2500


def test_same_key_same_path():
    cfg = PathConfig(2, 9000, 1.0, StreamKey(8, 1, 0))
    assert np.array_equal(sample_path(cfg).samples, sample_path(cfg).samples)


def test_endpoint_variance():
    n, reps = 2, 10_000
    end = np.array([sample_path(PathConfig(n, 10, 1.0, StreamKey(3, i, 0))).samples[-1]
                    for i in range(reps)])
    se = math.sqrt(2 / reps)
    assert np.all(np.abs(end.var(axis=0, ddof=1) - 1) < 3 * se)


@pytest.mark.parametrize("bad", [dict(dim=0), dict(steps=0), dict(horizon=0.0),
                                 dict(horizon=math.inf)])
def test_config_validation(bad):
    args = dict(dim=2, steps=10, horizon=1.0) | bad
    with pytest.raises(ValueError):
        PathConfig(**args)


def test_dump_path():
    p = sample_path(PathConfig(3, 20, 1.0, StreamKey(0, 0, 0)))
    buf = io.StringIO()
    dump_path(p, buf)
    back = np.loadtxt(io.StringIO(buf.getvalue()))
    assert back.shape == (21, 3) and np.array_equal(back, p.samples)


def test_constant_path_gives_zero():
    for n in (1, 2, 3):
        cfg = PathConfig(n, 100, 1.0)
        p = BrownianPath(cfg, np.zeros((101, n)))
        kinds = "VDR" if n == 1 else KINDS
        assert all(v == 0.0 for v in functionals_at(p, kinds).values())


def test_one_dimensional_conventions():
    p = sample_path(PathConfig(1, 1000, 1.0, StreamKey(2, 0, 0)))
    span = float(p.samples.max() - p.samples.min())
    assert functional_at_one(p, "V") == span
    assert functional_at_one(p, "D") == span
    assert functional_at_one(p, "R") == span / 2
    with pytest.raises(Unsupported):
        functional_at_one(p, "S")


def test_functionals_match_geometry():
    p = sample_path(PathConfig(3, 2000, 2.0, StreamKey(5, 0, 0)))
    pts = p.samples[: p.index_at(1.0) + 1]
    got = functionals_at(p, KINDS)
    for k in KINDS:
        assert got[FunctionalKind.parse(k)] == pytest.approx(prefix_value(pts, k), rel=1e-12)


def test_short_horizon_rejected():
    p = sample_path(PathConfig(2, 100, 0.5))
    with pytest.raises(ValueError):
        functionals_at(p, "V")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_functionals_monotone_along_path(n):
    p = sample_path(PathConfig(n, 2000, 1.0, StreamKey(6, n, 0)))
    kinds = "VDR" if n == 1 else KINDS
    last = dict.fromkeys(kinds, 0.0)
    for t in np.linspace(0.05, 1.0, 20):
        vals = functionals_at(p, kinds, t)
        for k in kinds:
            v = vals[FunctionalKind.parse(k)]
            assert v >= last[k] * (1 - 1e-12)
            last[k] = v


def test_level_must_be_positive():
    with pytest.raises(ValueError):
        first_passage(PathConfig(2, 100, 1.0), "D", 0.0)
    with pytest.raises(Unsupported):
        first_passage(PathConfig(1, 100, 1.0), "S", 1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("kind", KINDS)
def test_passage_is_exact_on_grid(n, kind):
    if n == 1 and kind == "S":
        return
    levels = {"V": 0.3 ** n, "S": 1.0 ** (n - 1), "D": 1.0, "R": 0.5}
    for rep in range(4):
        cfg = PathConfig(n, 600, 3.0, StreamKey(12, rep, 0))
        s = first_passage(cfg, kind, levels[kind])
        k = brute_passage(sample_path(cfg).samples, kind, levels[kind])
        if k < 0:
            assert s.censored and s.time == cfg.horizon
        else:
            assert not s.censored and s.index == k
            assert s.time == pytest.approx(k * cfg.dt)


def test_censored_when_level_unreachable():
    cfg = PathConfig(2, 200, 0.01, StreamKey(0, 0, 0))
    for kind in KINDS:
        s = first_passage(cfg, kind, 100.0)
        assert s.censored and s.time == cfg.horizon


def test_one_dimensional_diameter_passage_mean():
    from bmhull.harness import passage_samples
    times, cens = passage_samples("D", 1, 10_000, 0)
    assert cens == 0
    se = times.std(ddof=1) / math.sqrt(len(times))
    assert 1 / (4 * math.log(2)) - 3 * se <= times.mean() <= 1 + 3 * se


def test_diameter_passage_before_exit():
    for rep in range(100):
        cfg = passage_config("D", 3, 1.0, StreamKey(9, rep, 0))
        s = first_passage(cfg, "D", 1.0)
        try:
            tau = exit_time_unit_ball(cfg)
        except Censored:
            continue
        assert s.time <= tau


def exit_mean(n, radius, reps, lane=0):
    times = []
    for i in range(reps):
        cfg = PathConfig(n, 400_000, 40.0 * radius ** 2 / n, StreamKey(21, i, lane))
        times.append(exit_time(cfg, radius))
    t = np.array(times)
    return t.mean(), t.std(ddof=1) / math.sqrt(reps), 40.0 * radius ** 2 / n / 400_000


@pytest.mark.parametrize("n", [1, 3])
def test_exit_time_mean(n):
    m, se, dt = exit_mean(n, 1.0, 2000)
    assert abs(m - 1 / n) <= 3 * se + dt


def test_exit_time_scales_with_radius_squared():
    m1, se1, dt1 = exit_mean(2, 1.0, 2000, lane=0)
    m2, se2, dt2 = exit_mean(2, 2.0, 2000, lane=1)
    assert abs(m2 - 4 * m1) <= 3 * math.hypot(se2, 4 * se1) + dt2 + 4 * dt1


def test_exit_censoring_reported():
    with pytest.raises(Censored) as err:
        exit_time(PathConfig(2, 10, 1e-6, StreamKey(0, 0, 0)))
    assert err.value.horizon == 1e-6


def test_sup_norm_matches_inverse_root_exit_time():
    reps = 2000
    sup = np.array([np.linalg.norm(sample_path(PathConfig(2, 10_000, 1.0, StreamKey(30, i, 0)))
                                   .samples, axis=1).max() for i in range(reps)])
    inv = np.array([1 / math.sqrt(exit_time(PathConfig(2, 200_000, 20.0, StreamKey(30, i, 1))))
                    for i in range(reps)])
    se = math.hypot(sup.std(ddof=1), inv.std(ddof=1)) / math.sqrt(reps)
    assert abs(sup.mean() - inv.mean()) < 3 * se


def test_passage_config_grid():
    cfg = passage_config("V", 2, 1.0, StreamKey(0, 0, 0))
    assert cfg.dt == pytest.approx((2 / math.pi) / 2000, rel=1e-4)
    assert cfg.horizon == pytest.approx(16 * 2 * math.sqrt(2))
    cfg = passage_config("D", 3, 2.0, StreamKey(0, 0, 0))
    assert cfg.horizon == pytest.approx(16 * 4 / 3)
