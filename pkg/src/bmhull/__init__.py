"""Convex hulls of Brownian motion: functionals, passage times, and their bounds."""

from .bounds import BoundRow, Quantity, eldan_means, render_table, theorem_bounds
from .errors import AllDegenerate, Censored, DomainError, NoConvergence, Unsupported
from .kinds import FunctionalKind
from .path import (
    BrownianPath,
    PassageSample,
    PathConfig,
    exit_time_unit_ball,
    first_passage,
    functional_at_one,
    sample_path,
)
from .rng import StreamKey, derive, gaussian_stream
from .transform import Estimate, inverse_mean_via_transform, mean_with_ci, median_of_means

__all__ = [
    "AllDegenerate",
    "BoundRow",
    "BrownianPath",
    "Censored",
    "DomainError",
    "Estimate",
    "FunctionalKind",
    "NoConvergence",
    "PassageSample",
    "PathConfig",
    "Quantity",
    "StreamKey",
    "Unsupported",
    "derive",
    "eldan_means",
    "exit_time_unit_ball",
    "first_passage",
    "functional_at_one",
    "gaussian_stream",
    "inverse_mean_via_transform",
    "mean_with_ci",
    "median_of_means",
    "render_table",
    "sample_path",
    "theorem_bounds",
]
