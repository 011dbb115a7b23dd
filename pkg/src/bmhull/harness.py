"""Experiment orchestration: configuration, replicate scheduling, report rows.

Every replicate draws from its own stream ``(seed, replicate, lane)``, where
the lane separates experiments that must not share randomness (fixed-time
paths, direct passages per functional, exit times, the stage construction).
Results are collected in replicate order, so output does not depend on the
number of workers.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import bounds
from .bounds import Quantity
from .errors import Censored
from .kinds import FunctionalKind
from .optimize import OptProblem, closed_form, solve_numeric
from .path import (
    PathConfig,
    dump_path,
    exit_time,
    first_passage,
    functionals_at,
    passage_config,
    sample_path,
)
from .rng import StreamKey
from .stage import StageRadii, optimal_radii, run_construction
from .transform import Estimate, aggregate, inverse_mean_via_transform, mean_with_ci

COMMANDS = ("estimate", "inverse", "bounds", "optimize", "stage", "report")
METHODS = ("direct", "transform", "both")
FORMATS = ("csv", "json")
ALLOWANCE = 0.05
OUTPUT_DIR_ENV = "BMHULL_OUTPUT_DIR"

LANE_FIXED = 0
LANE_PASSAGE = {FunctionalKind.VOLUME: 1, FunctionalKind.SURFACE_AREA: 2,
                FunctionalKind.DIAMETER: 3, FunctionalKind.CIRCUMRADIUS: 4}
LANE_EXIT = 5
LANE_STAGE = 6
LANE_SCALED = 7

IN_BOUNDS = "InBounds"
BELOW = "BelowLower"
ABOVE = "AboveUpper"
INCONCLUSIVE = "Inconclusive"

COLUMNS = ("quantity", "dim", "method", "n_samples", "mean", "stderr", "ci_lo", "ci_hi",
           "censored_fraction", "lower", "exact", "upper", "verdict")

FIXED_QUANTITY = {FunctionalKind.VOLUME: Quantity.V1, FunctionalKind.SURFACE_AREA: Quantity.S1,
                  FunctionalKind.DIAMETER: Quantity.D1, FunctionalKind.CIRCUMRADIUS: Quantity.R1}
PASSAGE_QUANTITY = {FunctionalKind.VOLUME: Quantity.THETA_V,
                    FunctionalKind.SURFACE_AREA: Quantity.THETA_S,
                    FunctionalKind.DIAMETER: Quantity.THETA_D,
                    FunctionalKind.CIRCUMRADIUS: Quantity.THETA_R}


class ConfigError(ValueError):
    """Invalid experiment configuration (exit status 2)."""


class ReplicateError(RuntimeError):
    def __init__(self, replicate: int, error: BaseException):
        super().__init__(f"replicate {replicate} failed: {type(error).__name__}: {error}")
        self.replicate = replicate
        self.error = error


@dataclass
class ExperimentConfig:
    command: str
    dim: int | None = None
    steps: int = 10_000
    replicates: int = 10_000
    seed: int = 0
    method: str = "both"
    output: str | None = None
    format: str = "csv"
    nmax: int | None = None
    workers: int = 1
    heavy: bool = False
    radii: tuple[float, ...] | None = None
    dump_paths: str | None = None
    passage_replicates: int | None = None

    def validate(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}, got {self.method!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.nmax is not None and self.nmax < 1:
            raise ConfigError(f"nmax must be >= 1, got {self.nmax}")
        if self.dim is not None and self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.command in ("estimate", "inverse", "stage") and self.dim is None:
            raise ConfigError(f"{self.command} needs --dim")
        if self.command in ("estimate", "inverse", "report"):
            if self.replicates < 2:
                raise ConfigError(f"replicates must be >= 2 for a confidence interval, got {self.replicates}")
            if self.steps < 100:
                raise ConfigError(f"steps must be >= 100 for path experiments, got {self.steps}")
        if self.passage_replicates is not None and self.passage_replicates < 2:
            raise ConfigError("passage replicates must be >= 2")
        if self.command == "stage":
            if self.replicates < 1:
                raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
            if self.radii is not None:
                if len(self.radii) != self.dim:
                    raise ConfigError(f"--radii needs {self.dim} values, got {len(self.radii)}")
                if any(not (r > 0 and math.isfinite(r)) for r in self.radii):
                    raise ConfigError("--radii must be positive")
        return self

    @property
    def effective_steps(self) -> int:
        return max(self.steps, 100_000) if self.heavy else self.steps

    @property
    def table_nmax(self) -> int:
        if self.nmax is not None:
            return self.nmax
        return 20 if self.command == "optimize" else 5

    def dims(self) -> list[int]:
        return [self.dim] if self.dim is not None else list(range(1, self.table_nmax + 1))


@dataclass
class ReportRow:
    quantity: Quantity
    dim: int
    method: str
    estimate: Estimate | None
    lower: float | None
    exact: float | None
    upper: float | None
    verdict: str = ""

    def record(self) -> dict:
        e = self.estimate
        return {
            "quantity": self.quantity.value,
            "dim": self.dim,
            "method": self.method,
            "n_samples": e.n_samples if e else None,
            "mean": e.mean if e else None,
            "stderr": e.stderr if e else None,
            "ci_lo": e.ci_lo if e else None,
            "ci_hi": e.ci_hi if e else None,
            "censored_fraction": e.censored_fraction if e else None,
            "lower": self.lower,
            "exact": self.exact,
            "upper": self.upper,
            "verdict": self.verdict,
        }


def judge(estimate: Estimate, lower: float, upper: float, allowance: float = ALLOWANCE) -> str:
    """Compare the CI with ``[lower * (1 - a), upper * (1 + a)]``."""
    if not (math.isfinite(estimate.ci_lo) and math.isfinite(estimate.ci_hi)):
        return INCONCLUSIVE
    lo, hi = lower * (1 - allowance), upper * (1 + allowance)
    if estimate.ci_hi < lo:
        return BELOW
    if estimate.ci_lo > hi:
        return ABOVE
    if lo <= estimate.ci_lo and estimate.ci_hi <= hi:
        return IN_BOUNDS
    return INCONCLUSIVE


def bound_row(quantity: Quantity, dim: int, method: str, estimate: Estimate | None,
              allowance: float = ALLOWANCE) -> ReportRow:
    ref = bounds.theorem_bounds(quantity, dim)
    verdict = judge(estimate, ref.lower, ref.upper, allowance) if estimate is not None else ""
    return ReportRow(quantity, dim, method, estimate, ref.lower, ref.exact, ref.upper, verdict)


def schedule(replicates: int, worker_count: int, job: Callable[[int], object]) -> list:
    """Run ``job(i)`` for i in range(replicates); results in replicate order."""
    if worker_count < 1:
        raise ValueError("worker_count must be >= 1")

    def call(i):
        try:
            return job(i)
        except Exception as exc:
            raise ReplicateError(i, exc) from exc

    if replicates <= 0:
        return []
    if worker_count == 1:
        return [call(i) for i in range(replicates)]
    with ThreadPoolExecutor(max_workers=worker_count) as pool:
        return list(pool.map(call, range(replicates)))


def supported_kinds(dim: int) -> list[FunctionalKind]:
    return [k for k in FunctionalKind if not (k is FunctionalKind.SURFACE_AREA and dim < 2)]


def fixed_time_samples(dim: int, steps: int, replicates: int, seed: int, kinds=None,
                       t: float = 1.0, lane: int = LANE_FIXED, workers: int = 1,
                       dump_dir: str | None = None) -> dict[FunctionalKind, np.ndarray]:
    """Functionals at time ``t`` of ``replicates`` paths with ``steps`` steps on [0, t]."""
    kinds = supported_kinds(dim) if kinds is None else [FunctionalKind.parse(k) for k in kinds]

    def job(i):
        path = sample_path(PathConfig(dim, steps, t, StreamKey(seed, i, lane)))
        if dump_dir is not None:
            with open(Path(dump_dir) / f"path_n{dim}_r{i}.txt", "w") as fh:
                dump_path(path, fh)
        vals = functionals_at(path, kinds, t)
        return [vals[k] for k in kinds]

    out = np.array(schedule(replicates, workers, job), dtype=float).reshape(replicates, len(kinds))
    return {k: out[:, j] for j, k in enumerate(kinds)}


def passage_samples(kind, dim: int, replicates: int, seed: int, level: float = 1.0,
                    workers: int = 1, **grid) -> tuple[np.ndarray, int]:
    """Direct grid passage times; returns (times, censored count).

    Censored replicates contribute the horizon as their time (a lower bound).
    """
    kind = FunctionalKind.parse(kind)
    lane = LANE_PASSAGE[kind]

    def job(i):
        s = first_passage(passage_config(kind, dim, level, StreamKey(seed, i, lane), **grid),
                          kind, level)
        return s.time, s.censored

    res = schedule(replicates, workers, job)
    times = np.array([r[0] for r in res], dtype=float)
    return times, int(sum(r[1] for r in res))


def exit_time_samples(dim: int, replicates: int, seed: int, radius: float = 1.0,
                      resolution: int = 10_000, horizon_factor: float = 64.0,
                      workers: int = 1) -> tuple[np.ndarray, int, float]:
    """Grid exit times of the radius ball; returns (times, censored count, dt)."""
    mean = bounds.ball_exit_mean(dim, radius)
    dt = mean / resolution
    steps = int(horizon_factor * resolution)

    def job(i):
        try:
            return exit_time(PathConfig(dim, steps, steps * dt, StreamKey(seed, i, LANE_EXIT)), radius)
        except Censored as c:
            return -c.horizon

    raw = np.array(schedule(replicates, workers, job), dtype=float)
    cens = int(np.sum(raw < 0))
    return np.abs(raw), cens, dt


def estimate_rows(config: ExperimentConfig, dim: int, cache: dict | None = None) -> list[ReportRow]:
    samples = _fixed(config, dim, cache)
    rows = []
    for kind in supported_kinds(dim):
        est = mean_with_ci(samples[kind])
        rows.append(bound_row(FIXED_QUANTITY[kind], dim, "fixed_time", est))
    return rows


def inverse_rows(config: ExperimentConfig, dim: int, cache: dict | None = None) -> list[ReportRow]:
    rows = []
    n_direct = config.passage_replicates or config.replicates
    for kind in supported_kinds(dim):
        q = PASSAGE_QUANTITY[kind]
        if config.method in ("transform", "both"):
            samples = _fixed(config, dim, cache)[kind]
            method = "MedianOfMeans" if len(samples) >= 32 else "PlainMean"
            est = inverse_mean_via_transform(samples, kind, dim, method=method)
            rows.append(bound_row(q, dim, "transform", est))
        if config.method in ("direct", "both"):
            times, cens = passage_samples(kind, dim, n_direct, config.seed, workers=config.workers)
            est = aggregate(times, "PlainMean", censored_fraction=cens / len(times))
            rows.append(bound_row(q, dim, "direct", est))
    return rows


def _fixed(config: ExperimentConfig, dim: int, cache: dict | None):
    key = (dim, config.effective_steps, config.replicates, config.seed)
    if cache is not None and key in cache:
        return cache[key]
    if config.dump_paths:
        Path(config.dump_paths).mkdir(parents=True, exist_ok=True)
    out = fixed_time_samples(dim, config.effective_steps, config.replicates, config.seed,
                             workers=config.workers, dump_dir=config.dump_paths)
    if cache is not None:
        cache[key] = out
    return out


def bounds_rows(nmax: int) -> list[ReportRow]:
    return [ReportRow(r.quantity, r.dim, "bound", None, r.lower, r.exact, r.upper)
            for r in bounds.render_table(nmax)]


def optimize_table(nmax: int) -> list[dict]:
    out = []
    for n in range(1, nmax + 1):
        p = OptProblem(n)
        exact = closed_form(p)
        num = solve_numeric(p, tol=1e-10)
        out.append({
            "n": n,
            "value": p.optimal_value,
            "numeric_value": num.value,
            "kkt_residual": exact.kkt_residual,
            "coord_max_error": float(np.max(np.abs(num.x - exact.x) / exact.x)),
        })
    return out


def stage_table(config: ExperimentConfig) -> list[dict]:
    n = config.dim
    radii = StageRadii(tuple(config.radii)) if config.radii else optimal_radii(n)

    def job(i):
        return run_construction(n, radii, None, StreamKey(config.seed, i, LANE_STAGE))

    out = []
    for i, res in enumerate(schedule(config.replicates, config.workers, job)):
        rec = {"replicate": i}
        rec.update({f"T_{j + 1}": float(res.times[j]) for j in range(n)})
        rec.update({"simplex_volume": res.simplex_volume, "hull_volume": res.hull_volume,
                    "total_time": res.total_time})
        out.append(rec)
    return out


@dataclass
class RunResult:
    records: list[dict]
    columns: Sequence[str]
    rows: list[ReportRow] = field(default_factory=list)
    status: int = 0


def run(config: ExperimentConfig) -> RunResult:
    """Execute one command; status is 1 iff some verdict is outside the bounds."""
    config.validate()
    cache: dict = {}
    if config.command == "bounds":
        rows = bounds_rows(config.table_nmax)
        return RunResult([r.record() for r in rows], COLUMNS, rows)
    if config.command == "optimize":
        recs = optimize_table(config.table_nmax)
        return RunResult(recs, list(recs[0]))
    if config.command == "stage":
        recs = stage_table(config)
        cols = list(recs[0]) if recs else ["replicate"]
        return RunResult(recs, cols)
    rows: list[ReportRow] = []
    for dim in config.dims():
        if config.command in ("estimate", "report"):
            rows += estimate_rows(config, dim, cache)
        if config.command in ("inverse", "report"):
            rows += inverse_rows(config, dim, cache)
    status = 1 if any(r.verdict in (BELOW, ABOVE) for r in rows) else 0
    return RunResult([r.record() for r in rows], COLUMNS, rows, status)


def resolve_output(path: str | None) -> Path | None:
    """Relative output paths land in ``$BMHULL_OUTPUT_DIR`` when it is set."""
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def to_csv(records: list[dict], columns: Sequence[str]) -> str:
    lines = [",".join(columns)]
    for rec in records:
        lines.append(",".join(_fmt(rec.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return format(f, ".17g") if math.isfinite(f) else "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return json.dumps(str(v))


def to_json(records: list[dict], columns: Sequence[str]) -> str:
    objs = []
    for rec in records:
        body = ", ".join(f"{json.dumps(c)}: {_json_value(rec.get(c))}" for c in columns)
        objs.append("  {" + body + "}")
    return "[\n" + ",\n".join(objs) + "\n]\n" if objs else "[]\n"


def render(result: RunResult, fmt: str) -> str:
    return to_csv(result.records, result.columns) if fmt == "csv" else to_json(result.records, result.columns)
