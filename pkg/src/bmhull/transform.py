"""Estimators for means of functionals and of their passage times.

By Brownian scaling the level-1 passage time of a functional X equals
``X_1 ** -p`` in distribution, with ``p = 1 / q`` and ``q`` the size exponent
of X (n/2 for volume, (n-1)/2 for surface area, 1/2 for diameter and
circumradius).  So passage-time means can be estimated from fixed-time
samples without simulating passages at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllDegenerate
from .kinds import FunctionalKind, inverse_exponent

PLAIN = "PlainMean"
MEDIAN_OF_MEANS = "MedianOfMeans"
DEFAULT_BLOCKS = 32
KURTOSIS_FLAG = 50.0  # excess kurtosis beyond which the stderr is only heuristic


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n_samples: int
    ci95: tuple[float, float]
    method: str = PLAIN
    censored_fraction: float = 0.0
    degenerate: int = 0
    heuristic: bool = False

    @property
    def ci_lo(self) -> float:
        return self.ci95[0]

    @property
    def ci_hi(self) -> float:
        return self.ci95[1]


def _as_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    return x


def mean_with_ci(samples, censored_fraction: float = 0.0) -> Estimate:
    x = _as_samples(samples)
    if len(x) < 2:
        raise ValueError("need at least 2 samples")
    m = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(len(x)))
    return Estimate(m, se, len(x), (m - 1.96 * se, m + 1.96 * se), PLAIN, censored_fraction)


def _median_rank(blocks: int, alpha: float = 0.05) -> int:
    """Largest j with P(Binomial(blocks, 1/2) <= j) <= alpha/2, or 0."""
    total = 0.0
    j = -1
    while True:
        total += math.comb(blocks, j + 1) / 2.0 ** blocks
        if total > alpha / 2:
            return max(j, 0)
        j += 1


def median_of_means(samples, blocks: int = DEFAULT_BLOCKS, censored_fraction: float = 0.0) -> Estimate:
    """Median of contiguous block means.

    Blocks follow sample order, so the estimate is a deterministic function
    of the samples ordered by replicate.  The interval spans the order
    statistics of the block means that form a distribution-free 95% interval
    for their median; the stderr is 1.2533 times a robust (IQR) scale of the
    block means over sqrt(blocks).
    """
    x = _as_samples(samples)
    if blocks < 3:
        raise ValueError(f"need at least 3 blocks, got {blocks}")
    if len(x) < blocks:
        raise ValueError(f"need at least {blocks} samples, got {len(x)}")
    means = np.sort([b.mean() for b in np.array_split(x, blocks)])
    centre = float(np.median(means))
    q25, q75 = np.percentile(means, [25, 75])
    se = float(1.2533 * (q75 - q25) / 1.349 / math.sqrt(blocks))
    j = _median_rank(blocks)
    lo, hi = float(means[j]), float(means[blocks - 1 - j])
    return Estimate(centre, se, len(x), (min(lo, centre), max(hi, centre)), MEDIAN_OF_MEANS,
                    censored_fraction)


def excess_kurtosis(samples) -> float:
    x = _as_samples(samples)
    c = x - x.mean()
    var = float(np.mean(c * c))
    if var == 0.0:
        return 0.0
    return float(np.mean(c ** 4) / var ** 2 - 3.0)


def aggregate(samples, method: str = MEDIAN_OF_MEANS, blocks: int = DEFAULT_BLOCKS,
              censored_fraction: float = 0.0) -> Estimate:
    if method == MEDIAN_OF_MEANS:
        return median_of_means(samples, blocks, censored_fraction)
    if method == PLAIN:
        return mean_with_ci(samples, censored_fraction)
    raise ValueError(f"unknown aggregation method {method!r}")


def inverse_mean_via_transform(samples_x1, kind, dim: int, method: str = MEDIAN_OF_MEANS,
                               blocks: int = DEFAULT_BLOCKS) -> Estimate:
    """Mean passage time to level 1 from samples of the functional at time 1.

    Non-positive samples (numerically degenerate hulls) are dropped and
    counted in ``degenerate``.  The stderr is flagged ``heuristic`` when the
    transformed samples are extremely heavy-tailed.
    """
    p = inverse_exponent(FunctionalKind.parse(kind), dim)
    x = _as_samples(samples_x1)
    good = x[x > 0]
    if len(good) == 0:
        raise AllDegenerate(f"all {len(x)} samples are non-positive")
    theta = good ** (-p)
    est = aggregate(theta, method, blocks)
    flag = excess_kurtosis(theta) > KURTOSIS_FLAG
    return Estimate(est.mean, est.stderr, est.n_samples, est.ci95, est.method,
                    est.censored_fraction, len(x) - len(good), flag)


@dataclass(frozen=True)
class ScalingReport:
    mean_t: float
    predicted: float
    pooled_se: float
    z: float

    def passes(self, limit: float = 3.0) -> bool:
        return abs(self.z) < limit


def scaling_check(samples_t, samples_1, exponent: float, t: float) -> ScalingReport:
    """z-score of ``mean(samples_t) - t**exponent * mean(samples_1)``."""
    a = _as_samples(samples_t)
    b = _as_samples(samples_1)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both sample sets must be nonempty")
    if not t > 0:
        raise ValueError("t must be positive")
    factor = t ** exponent
    se_a = a.std(ddof=1) / math.sqrt(len(a)) if len(a) > 1 else 0.0
    se_b = b.std(ddof=1) / math.sqrt(len(b)) if len(b) > 1 else 0.0
    pooled = float(math.hypot(se_a, factor * se_b))
    diff = float(a.mean() - factor * b.mean())
    scale = max(abs(float(a.mean())), abs(factor * float(b.mean())), 1e-300)
    if abs(diff) <= 1e-12 * scale:
        z = 0.0
    elif pooled == 0.0:
        z = math.copysign(math.inf, diff)
    else:
        z = diff / pooled
    return ScalingReport(float(a.mean()), factor * float(b.mean()), pooled, z)


def agree(a: Estimate, b: Estimate, allowance: float = 0.05, sigmas: float = 3.0) -> bool:
    """Two estimates of the same mean agree within ``sigmas`` pooled stderrs
    plus a relative ``allowance`` for discretization bias."""
    band = sigmas * math.hypot(a.stderr, b.stderr) + allowance * max(abs(a.mean), abs(b.mean))
    return abs(a.mean - b.mean) <= band
