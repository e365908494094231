"""Robust femur centerline fitting and CCD angle measurement."""

from .fitting import FitResult, Line2D, RansacConfig, least_squares_line, ransac_fit
from .geometry import (
    FemurMeasurement,
    ccd_angle,
    endpoints_for_display,
    line_from_endpoints,
    measure_femur,
    undirected_angle,
)
from .heatmap import (
    ChannelName,
    ChannelRaster,
    Heatmap,
    PointCloud,
    Side,
    Structure,
    centroid,
    heatmap_mse,
    load_heatmap,
    threshold_points,
)
from .synth import SyntheticSpec, generate_case, render_line_heatmap, write_dataset

__all__ = [
    "ChannelName",
    "ChannelRaster",
    "FemurMeasurement",
    "FitResult",
    "Heatmap",
    "Line2D",
    "PointCloud",
    "RansacConfig",
    "Side",
    "Structure",
    "SyntheticSpec",
    "ccd_angle",
    "centroid",
    "endpoints_for_display",
    "generate_case",
    "heatmap_mse",
    "least_squares_line",
    "line_from_endpoints",
    "load_heatmap",
    "measure_femur",
    "ransac_fit",
    "render_line_heatmap",
    "threshold_points",
    "undirected_angle",
    "write_dataset",
]
