from .ball import Ball, circumball, min_enclosing_ball
from .hull import (
    ConvexHull,
    DegenerateInput,
    Facet,
    HullTopologyError,
    build_hull,
    facet_measures,
    hull_surface_area,
    hull_volume,
    load_hull_dump,
)
from .measures import circumscribed_box, diameter, hyperrectangle_corners, pairwise_max_distance

__all__ = [
    "Ball",
    "ConvexHull",
    "DegenerateInput",
    "Facet",
    "HullTopologyError",
    "build_hull",
    "circumball",
    "circumscribed_box",
    "diameter",
    "facet_measures",
    "hull_surface_area",
    "hull_volume",
    "hyperrectangle_corners",
    "load_hull_dump",
    "min_enclosing_ball",
    "pairwise_max_distance",
]
