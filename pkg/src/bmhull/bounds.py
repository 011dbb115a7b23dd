"""Closed-form reference values and the two-sided bounds on the eight means.

Gamma functions and factorials are handled in log space (``math.lgamma``)
so everything stays finite well past n = 170.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import Unsupported

LOG2 = math.log(2.0)


class Quantity(str, Enum):
    V1 = "V1"
    S1 = "S1"
    D1 = "D1"
    R1 = "R1"
    THETA_V = "ThetaV"
    THETA_S = "ThetaS"
    THETA_D = "ThetaD"
    THETA_R = "ThetaR"


TABLE_ORDER = list(Quantity)


@dataclass(frozen=True)
class BoundRow:
    quantity: Quantity
    dim: int
    lower: float
    upper: float
    exact: float | None = None


@dataclass(frozen=True)
class BallConstants:
    dim: int
    kappa: float
    omega: float


def _check_dim(n: int, minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise ValueError(f"dimension must be an integer >= {minimum}, got {n}")


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def factorial_root(n: int) -> float:
    """(n!)**(1/n)."""
    return math.exp(log_factorial(n) / n)


def eldan_volume_mean(n: int) -> float:
    _check_dim(n)
    return math.exp(0.5 * n * math.log(math.pi / 2) - 2 * math.lgamma(1 + n / 2))


def eldan_surface_mean(n: int) -> float:
    _check_dim(n)
    if n < 2:
        raise Unsupported("E[S_1] is not defined for n = 1")
    return 2.0 * math.exp(0.5 * (n - 1) * math.log(2 * math.pi) - math.lgamma(n))


def eldan_means(n: int) -> tuple[float, float]:
    """Exact (E[V_1], E[S_1]) for the hull of n-dimensional Brownian motion."""
    return eldan_volume_mean(n), eldan_surface_mean(n)


def log_ball_volume(n: int) -> float:
    return 0.5 * n * math.log(math.pi) - math.lgamma(1 + n / 2)


def log_sphere_area(n: int) -> float:
    return math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(n / 2)


def ball_constants(n: int) -> BallConstants:
    _check_dim(n)
    return BallConstants(n, math.exp(log_ball_volume(n)), math.exp(log_sphere_area(n)))


def ball_exit_mean(n: int, r: float = 1.0) -> float:
    """Mean exit time of the radius-r ball by n-dimensional BM from its center."""
    _check_dim(n)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return r * r / n


def feller_range_second_moment() -> float:
    """E[(max - min)^2] of standard 1-d Brownian motion on [0, 1]."""
    return 4.0 * LOG2


def _theta_v(n):
    lower = (2 / math.pi) * math.exp(4 / n * math.lgamma(1 + n / 2))
    upper = n * factorial_root(n)
    return lower, upper


def unit_volume_ball_surface(n: int) -> float:
    """Surface area of the n-ball of volume 1: omega_n * kappa_n**((1-n)/n)."""
    return math.exp(log_sphere_area(n) + (1 - n) / n * log_ball_volume(n))


def _theta_s(n):
    lower = (1 / (2 * math.pi)) * math.exp(2 / (n - 1) * (math.lgamma(n) - LOG2))
    upper = unit_volume_ball_surface(n) ** (2 / (n - 1)) * n * factorial_root(n)
    return lower, upper


def theorem_bounds(quantity, n: int) -> BoundRow:
    """Two-sided bound on the mean of ``quantity`` in dimension n.

    For V1 and S1 the exact mean is known, so the row is degenerate
    (lower = exact = upper).
    """
    q = Quantity(quantity)
    _check_dim(n)
    sq = math.sqrt(n)
    if q is Quantity.V1:
        v = eldan_volume_mean(n)
        return BoundRow(q, n, v, v, v)
    if q is Quantity.S1:
        s = eldan_surface_mean(n)
        return BoundRow(q, n, s, s, s)
    if q is Quantity.THETA_V:
        lo, hi = _theta_v(n)
    elif q is Quantity.THETA_S:
        if n < 2:
            raise Unsupported("inverse surface area time needs n >= 2")
        lo, hi = _theta_s(n)
    elif q is Quantity.D1:
        lo, hi = sq, 2 * math.sqrt(LOG2) * sq
    elif q is Quantity.THETA_D:
        lo, hi = 1 / (4 * n * LOG2), 1 / n
    elif q is Quantity.R1:
        lo, hi = sq / 2, math.sqrt(LOG2) * sq
    else:
        lo, hi = 1 / (n * LOG2), 4 / n
    return BoundRow(q, n, lo, hi)


def supported(quantity, n: int) -> bool:
    q = Quantity(quantity)
    return not (n < 2 and q in (Quantity.S1, Quantity.THETA_S))


def render_table(n_max: int) -> list[BoundRow]:
    _check_dim(n_max)
    return [
        theorem_bounds(q, n)
        for n in range(1, n_max + 1)
        for q in TABLE_ORDER
        if supported(q, n)
    ]


def asymptotic_constants() -> tuple[float, float]:
    """Limits of lower(n)/n^2 and upper(n)/n^2 for the volume and surface passage times."""
    return 1 / (2 * math.pi * math.e ** 2), 1 / math.e


def asymptotic_ratios(n: int) -> dict[str, float]:
    """lower(n)/n^2 and upper(n)/n^2 for ThetaV and ThetaS, each divided by its limit."""
    c_lo, c_hi = asymptotic_constants()
    out = {}
    for q in (Quantity.THETA_V, Quantity.THETA_S):
        row = theorem_bounds(q, n)
        out[f"{q.value}.lower"] = row.lower / n ** 2 / c_lo
        out[f"{q.value}.upper"] = row.upper / n ** 2 / c_hi
    return out


def check_asymptotics(n: int = 200, slack: float = 0.1) -> bool:
    """One-sided check: lower/n^2 >= (1-slack)*c_lo and upper/n^2 <= (1+slack)*c_hi."""
    r = asymptotic_ratios(n)
    return all(v >= 1 - slack for k, v in r.items() if k.endswith("lower")) and all(
        v <= 1 + slack for k, v in r.items() if k.endswith("upper")
    )
