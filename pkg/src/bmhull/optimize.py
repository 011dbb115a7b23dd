"""The weighted-quadratic program behind the volume passage-time upper bound.

    minimize   f_n(x) = sum_j x_j**2 / (n - j + 1)
    subject to x_1 * ... * x_n >= n!,   x > 0

written with the convex constraint ``n! * g_n(x) - 1 <= 0`` where
``g_n(x) = 1 / (x_1 * ... * x_n)``.  All factorials are carried as logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import log_factorial
from .errors import DomainError, NoConvergence


@dataclass(frozen=True)
class OptProblem:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    @property
    def weights(self) -> np.ndarray:
        """1 / (n - j + 1) for j = 1..n."""
        return 1.0 / np.arange(self.n, 0, -1, dtype=float)

    @property
    def log_nfact(self) -> float:
        return log_factorial(self.n)

    @property
    def optimal_value(self) -> float:
        return self.n * math.exp(self.log_nfact / self.n)


@dataclass
class OptSolution:
    x: np.ndarray
    multiplier: float
    value: float
    kkt_residual: float
    iterations: int = 0


def _positive(problem: OptProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ValueError(f"expected a vector of length {problem.n}")
    if np.any(~(x > 0)):
        raise DomainError("x must lie in the open positive orthant")
    return x


def objective(problem: OptProblem, x) -> tuple[float, np.ndarray]:
    x = _positive(problem, x)
    w = problem.weights
    return float(np.sum(w * x * x)), 2.0 * w * x


def g_n(x) -> float:
    return float(math.exp(-np.sum(np.log(x))))


def constraint(problem: OptProblem, x) -> tuple[float, np.ndarray]:
    """Value and gradient of ``n! * g_n(x) - 1`` (feasible iff <= 0)."""
    x = _positive(problem, x)
    scaled = math.exp(problem.log_nfact - float(np.sum(np.log(x))))
    return scaled - 1.0, -scaled / x


def lagrangian_gradient(problem: OptProblem, x, multiplier: float) -> np.ndarray:
    _, gf = objective(problem, x)
    _, gc = constraint(problem, x)
    return gf + multiplier * gc


def kkt_residual(problem: OptProblem, solution) -> float:
    """Max-abs Lagrangian gradient at ``solution.x`` with ``solution.multiplier``."""
    return float(np.max(np.abs(lagrangian_gradient(problem, solution.x, solution.multiplier))))


def closed_form(problem: OptProblem) -> OptSolution:
    n = problem.n
    root = math.exp(problem.log_nfact / (2 * n))  # (n!)^(1/2n)
    x = np.sqrt(np.arange(n, 0, -1, dtype=float)) * root
    lam = 2.0 * root * root
    sol = OptSolution(x=x, multiplier=lam, value=objective(problem, x)[0], kkt_residual=0.0)
    sol.kkt_residual = kkt_residual(problem, sol)
    return sol


def solve_numeric(problem: OptProblem, tol: float = 1e-10, max_iter: int = 100_000) -> OptSolution:
    """Projected gradient descent in log coordinates ``u = log x``.

    The constraint becomes the half-space ``sum(u) >= log n!`` (projection is
    a uniform shift) and the objective ``sum_j w_j exp(2 u_j)`` stays convex.
    Does not use the closed-form solution.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = problem.n
    w = problem.weights
    target = problem.log_nfact

    def project(u):
        short = target - u.sum()
        return u + short / n if short > 0 else u

    def value(u):
        return float(np.sum(w * np.exp(2 * u)))

    u = np.full(n, target / n)
    fu = value(u)
    step = 1.0
    for it in range(1, max_iter + 1):
        grad = 2 * w * np.exp(2 * u)
        while True:
            cand = project(u - step * grad)
            fc = value(cand)
            move = cand - u
            if fc <= fu + grad @ move + (move @ move) / (2 * step):
                break
            step *= 0.5
            if step < 1e-300:
                raise NoConvergence("line search failed", last=u)
        gap = float(np.max(np.abs(move))) / step
        u, fu = cand, fc
        step *= 2.0
        if gap < tol * 1e-2 or (np.max(np.abs(move)) < 1e-15 and it > 1):
            break
    else:
        raise NoConvergence(f"no convergence after {max_iter} iterations", last=np.exp(u))
    x = np.exp(u)
    # multiplier from stationarity in u: 2 w_j x_j^2 = lam for every j
    lam = float(np.mean(2 * w * x * x))
    sol = OptSolution(x=x, multiplier=lam, value=objective(problem, x)[0], kkt_residual=0.0,
                      iterations=it)
    sol.kkt_residual = kkt_residual(problem, sol)
    return sol


def random_feasible_values(problem: OptProblem, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Objective at random points scaled onto the surface ``prod(x) = n!``."""
    n = problem.n
    u = rng.uniform(-3.0, 3.0, size=(trials, n))
    u += (problem.log_nfact - u.sum(axis=1, keepdims=True)) / n
    x = np.exp(u)
    return np.sum(problem.weights * x * x, axis=1)


def g_hessian(x) -> np.ndarray:
    """Analytic Hessian of g_n: g(x) * (1 + delta_jk) / (x_j x_k)."""
    x = np.asarray(x, dtype=float)
    inv = 1.0 / x
    h = np.outer(inv, inv)
    h[np.diag_indices_from(h)] *= 2.0
    return g_n(x) * h


def g_hessian_fd(x, rel_step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian of g_n."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    h = rel_step * x
    out = np.empty((n, n))
    for j in range(n):
        for k in range(j, n):
            vals = []
            for sj, sk in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                y = x.copy()
                y[j] += sj * h[j]
                y[k] += sk * h[k]
                vals.append(g_n(y))
            out[j, k] = out[k, j] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h[j] * h[k])
    return out


def g_quadratic_form(x, z) -> float:
    """<z, H z> = g(x) * (sum z_j^2/x_j^2 + (sum z_j/x_j)^2)."""
    r = np.asarray(z, dtype=float) / np.asarray(x, dtype=float)
    return g_n(x) * float(r @ r + r.sum() ** 2)


def convexity_probe(problem: OptProblem, trials: int, seed: int = 0) -> dict:
    """Random convexity checks for f_n and g_n plus the g_n Hessian identities."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = problem.n
    w = problem.weights
    x = np.exp(rng.uniform(-1, 1, size=(trials, n)))
    y = np.exp(rng.uniform(-1, 1, size=(trials, n)))
    t = rng.uniform(0, 1, size=(trials, 1))
    mid = t * x + (1 - t) * y

    def f(v):
        return np.sum(w * v * v, axis=1)

    def g(v):
        return np.exp(-np.sum(np.log(v), axis=1))

    tt = t[:, 0]
    f_viol = int(np.sum(f(mid) > tt * f(x) + (1 - tt) * f(y) + 1e-12))
    g_viol = int(np.sum(g(mid) > tt * g(x) + (1 - tt) * g(y) + 1e-12))

    hess_err = 0.0
    form_err = 0.0
    for i in range(min(trials, 50)):
        xi = x[i]
        analytic = g_hessian(xi)
        numeric = g_hessian_fd(xi)
        hess_err = max(hess_err, float(np.max(np.abs(numeric - analytic) / np.abs(analytic))))
        z = rng.standard_normal(n)
        direct = float(z @ analytic @ z)
        form_err = max(form_err, abs(direct - g_quadratic_form(xi, z)) / max(abs(direct), 1e-300))
    return {
        "n": n,
        "trials": trials,
        "f_violations": f_viol,
        "g_violations": g_viol,
        "hessian_fd_rel_error": hess_err,
        "quadratic_form_rel_error": form_err,
    }
