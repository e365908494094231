"""Angles between fitted lines and the clinical CCD angle.

The CCD (caput-collum-diaphyseal) angle is taken between the femoral neck
centerline and the femoral shaft centerline.  For anatomically plausible
angles in (90, 180) the undirected angle between the two infinite lines is
180 minus the CCD angle, so no orientation inference is needed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


from .fitting import FitResult, Line2D, RansacConfig, ransac_fit
from .heatmap import (
    DEFAULT_CUTOFF,
    ChannelName,
    Heatmap,
    HeatmapError,
    PointCloud,
    Side,
    Structure,
    threshold_points,
)


class DegenerateAngleWarning(UserWarning):
    """Neck and shaft parallel: CCD of 180 is anatomically impossible."""


class MissingChannelError(HeatmapError):
    def __init__(self, name: ChannelName):
        super().__init__(f"missing channel: {name}")
        self.channel = name


class ChannelFitError(RuntimeError):
    """A centerline channel could not be fitted; carries the channel name."""

    def __init__(self, name: ChannelName, cause: Exception):
        super().__init__(f"{name}: {cause}")
        self.channel = name


@dataclass(frozen=True)
class FemurMeasurement:
    """Fitted neck/shaft centerlines and the CCD angle for one side."""

    side: Side
    neck_centerline: Line2D
    shaft_centerline: Line2D
    ccd_degrees: float
    neck_endpoints: tuple[tuple[float, float], tuple[float, float]]
    shaft_endpoints: tuple[tuple[float, float], tuple[float, float]]
    degenerate: bool = False
    neck_fit: FitResult | None = None
    shaft_fit: FitResult | None = None


def undirected_angle(l1: Line2D, l2: Line2D) -> float:
    """Angle between two lines in degrees, in [0, 90]."""
    d1x, d1y = l1.direction
    d2x, d2y = l2.direction
    dot = abs(d1x * d2x + d1y * d2y)
    cross = abs(d1x * d2y - d1y * d2x)
    return math.degrees(math.atan2(cross, dot))


def ccd_angle(neck: Line2D, shaft: Line2D) -> float:
    """CCD angle in degrees: 180 minus the undirected neck/shaft angle.

    Parallel lines yield exactly 180 and emit a ``DegenerateAngleWarning``.
    """
    angle = 180.0 - undirected_angle(neck, shaft)
    if angle == 180.0:
        warnings.warn(
            "neck and shaft centerlines are parallel (CCD 180)",
            DegenerateAngleWarning,
            stacklevel=2,
        )
    return angle


def line_from_endpoints(p1, p2) -> Line2D:
    """Canonical line through two distinct display endpoints."""
    if tuple(p1) == tuple(p2):
        raise ValueError(f"coincident endpoints: {p1}")
    return Line2D(
        (float(p1[0]), float(p1[1])),
        (float(p2[0]) - float(p1[0]), float(p2[1]) - float(p1[1])),
    )


def endpoints_for_display(
    line: Line2D, cloud: PointCloud
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Visible segment: the cloud's extreme projections onto the line."""
    if len(cloud) == 0:
        raise ValueError("empty cloud has no display extent")
    ax, ay = line.anchor
    dx, dy = line.direction
    t = (cloud.xy[:, 0] - ax) * dx + (cloud.xy[:, 1] - ay) * dy
    lo, hi = float(t.min()), float(t.max())
    return (
        (ax + lo * dx, ay + lo * dy),
        (ax + hi * dx, ay + hi * dy),
    )


def measure_femur(
    heatmap: Heatmap,
    side: Side,
    config: RansacConfig = RansacConfig(),
    cutoff: float = DEFAULT_CUTOFF,
) -> FemurMeasurement:
    """Threshold both centerline channels of one side, fit each with RANSAC,
    and compute the CCD angle plus display endpoints."""
    fits: dict[Structure, FitResult] = {}
    clouds: dict[Structure, PointCloud] = {}
    for structure in (Structure.NECK_CENTERLINE, Structure.SHAFT_CENTERLINE):
        name = ChannelName(side, structure)
        if not heatmap.has_channel(name):
            raise MissingChannelError(name)
        cloud = threshold_points(heatmap.channel(name), cutoff)
        try:
            fits[structure] = ransac_fit(cloud, config)
        except Exception as exc:
            raise ChannelFitError(name, exc) from exc
        clouds[structure] = cloud

    neck = fits[Structure.NECK_CENTERLINE]
    shaft = fits[Structure.SHAFT_CENTERLINE]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateAngleWarning)
        ccd = ccd_angle(neck.line, shaft.line)
        degenerate = any(
            issubclass(w.category, DegenerateAngleWarning) for w in caught
        )
    return FemurMeasurement(
        side=side,
        neck_centerline=neck.line,
        shaft_centerline=shaft.line,
        ccd_degrees=ccd,
        neck_endpoints=endpoints_for_display(
            neck.line, clouds[Structure.NECK_CENTERLINE]
        ),
        shaft_endpoints=endpoints_for_display(
            shaft.line, clouds[Structure.SHAFT_CENTERLINE]
        ),
        degenerate=degenerate,
        neck_fit=neck,
        shaft_fit=shaft,
    )
