"""Mixture-proportion estimation."""
from .kernel_embedding import (
    estimate_theta,
    gram,
    km_distance,
    median_heuristic,
    resolve_bandwidth,
    theta_curve,
)

__all__ = [
    "estimate_theta",
    "gram",
    "km_distance",
    "median_heuristic",
    "resolve_bandwidth",
    "theta_curve",
]
