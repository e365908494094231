"""Synthetic femur heatmap studies with known ground-truth centerlines.

Stands in for the unavailable clinical dataset: each case draws per-side
neck/shaft segments with a known CCD angle, renders all 12 line channels as
Gaussian bands, and optionally contaminates them with high-probability
outlier pixels and uniform background noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import ccd_angle, line_from_endpoints
from .heatmap import (
    ChannelName,
    ChannelRaster,
    Heatmap,
    Side,
    Structure,
    write_manifest,
)

Segment = tuple[tuple[float, float], tuple[float, float]]

# perpendicular offset of the medial/lateral bands from the centerline
EDGE_OFFSET_PX = 8.0


@dataclass(frozen=True)
class SyntheticSpec:
    width: int = 512
    height: int = 512
    sigma: float = 3.0
    outlier_fraction: float = 0.0
    blur_noise: float = 0.0
    seed: int = 0
    cases: int = 1

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError("outlier_fraction must be in [0, 1)")
        if not 0.0 <= self.blur_noise <= 0.1:
            raise ValueError("blur_noise must be in [0, 0.1]")
        if self.cases < 1:
            raise ValueError("cases must be >= 1")


@dataclass(frozen=True)
class SideTruth:
    neck: Segment
    shaft: Segment
    ccd: float


@dataclass(frozen=True)
class GroundTruthCase:
    heatmap: Heatmap
    truth: dict[Side, SideTruth]


def segment_distance(px: np.ndarray, py: np.ndarray, segment: Segment) -> np.ndarray:
    """Distance from pixel centers to a segment (not the infinite line)."""
    (x1, y1), (x2, y2) = segment
    vx, vy = x2 - x1, y2 - y1
    length_sq = vx * vx + vy * vy
    t = ((px - x1) * vx + (py - y1) * vy) / length_sq
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(px - (x1 + t * vx), py - (y1 + t * vy))


def render_line_heatmap(
    segment: Segment, sigma: float, width: int, height: int
) -> np.ndarray:
    """Gaussian band around a segment: exp(-d^2 / (2 sigma^2)) per pixel.

    Pixels whose value would fall below half a 16-bit quantum (distance
    beyond ~4.9 sigma) are left at exactly 0; they are indistinguishable
    from 0 after serialization anyway.
    """
    (x1, y1), (x2, y2) = segment
    if (x1, y1) == (x2, y2):
        raise ValueError("degenerate segment")
    for x, y in segment:
        if not (0 <= x < width and 0 <= y < height):
            raise ValueError(f"segment endpoint outside raster: {(x, y)}")
    pad = sigma * math.sqrt(-2.0 * math.log(0.5 / 65535.0))
    col_lo = max(0, int(math.floor(min(x1, x2) - pad)))
    col_hi = min(width, int(math.ceil(max(x1, x2) + pad)) + 1)
    row_lo = max(0, int(math.floor(min(y1, y2) - pad)))
    row_hi = min(height, int(math.ceil(max(y1, y2) + pad)) + 1)
    px, py = np.meshgrid(
        np.arange(col_lo, col_hi, dtype=np.float64),
        np.arange(row_lo, row_hi, dtype=np.float64),
    )
    d = segment_distance(px, py, segment)
    band = np.exp(-(d * d) / (2.0 * sigma * sigma))
    band[d > pad] = 0.0
    values = np.zeros((height, width))
    values[row_lo:row_hi, col_lo:col_hi] = band
    return values


def _rotate(direction: tuple[float, float], degrees: float) -> tuple[float, float]:
    c, s = math.cos(math.radians(degrees)), math.sin(math.radians(degrees))
    dx, dy = direction
    return (c * dx - s * dy, s * dx + c * dy)


def _offset_segment(segment: Segment, direction, offset: float) -> Segment:
    dx, dy = direction
    nx, ny = -dy, dx
    (x1, y1), (x2, y2) = segment
    return (
        (x1 + offset * nx, y1 + offset * ny),
        (x2 + offset * nx, y2 + offset * ny),
    )


def _draw_side(rng: np.random.Generator, side: Side, width: int, height: int):
    """Shaft within 15 deg of vertical, neck meeting it at a CCD drawn
    uniformly in [110, 145] deg, pointing up toward the image center.

    Radiographic convention: the right femur sits on the image's left half.
    """
    cx = 0.28 * width if side is Side.RIGHT else 0.72 * width
    # rotation sign that tips the neck up and toward the image midline
    toward_center = -1.0 if side is Side.RIGHT else 1.0

    tilt = rng.uniform(-15.0, 15.0)
    shaft_dir = (math.sin(math.radians(tilt)), math.cos(math.radians(tilt)))
    jitter = 0.02 * height
    junction = (
        cx + rng.uniform(-jitter, jitter),
        0.32 * height + rng.uniform(-jitter, jitter),
    )
    shaft_len = 0.40 * height
    shaft: Segment = (
        junction,
        (junction[0] + shaft_len * shaft_dir[0], junction[1] + shaft_len * shaft_dir[1]),
    )

    ccd = rng.uniform(110.0, 145.0)
    # rotating the (downward) shaft direction by +/-(180 - (180 - ccd)) = ccd
    # gives a vector at 180-ccd undirected degrees from the shaft line
    neck_dir = _rotate(shaft_dir, toward_center * ccd)
    neck_len = 0.18 * height
    neck: Segment = (
        junction,
        (junction[0] + neck_len * neck_dir[0], junction[1] + neck_len * neck_dir[1]),
    )
    return neck, shaft


def _contaminate(
    rng: np.random.Generator,
    values: np.ndarray,
    outlier_fraction: float,
    blur_noise: float,
) -> np.ndarray:
    if blur_noise > 0.0:
        values = np.clip(values + rng.uniform(0.0, blur_noise, values.shape), 0.0, 1.0)
    if outlier_fraction > 0.0:
        band = int((values > 0.9).sum())
        n_out = int(round(outlier_fraction * band))
        if n_out:
            rows = rng.integers(0, values.shape[0], n_out)
            cols = rng.integers(0, values.shape[1], n_out)
            values = values.copy() if values.flags.writeable is False else values
            values[rows, cols] = rng.uniform(0.9, 1.0, n_out)
    return values


_STRUCTURES = {
    Structure.NECK_MEDIAL: ("neck", -EDGE_OFFSET_PX),
    Structure.NECK_CENTERLINE: ("neck", 0.0),
    Structure.NECK_LATERAL: ("neck", EDGE_OFFSET_PX),
    Structure.SHAFT_MEDIAL: ("shaft", -EDGE_OFFSET_PX),
    Structure.SHAFT_CENTERLINE: ("shaft", 0.0),
    Structure.SHAFT_LATERAL: ("shaft", EDGE_OFFSET_PX),
}


def generate_case(spec: SyntheticSpec, case_index: int) -> GroundTruthCase:
    """Deterministic per (spec.seed, case_index)."""
    rng = np.random.default_rng([spec.seed, case_index])
    truth: dict[Side, SideTruth] = {}
    channels: list[ChannelRaster] = []

    for side in (Side.LEFT, Side.RIGHT):
        neck, shaft = _draw_side(rng, side, spec.width, spec.height)
        ccd = ccd_angle(
            line_from_endpoints(*neck), line_from_endpoints(*shaft)
        )
        truth[side] = SideTruth(neck=neck, shaft=shaft, ccd=ccd)
        segments = {"neck": neck, "shaft": shaft}
        dirs = {
            key: _unit(seg) for key, seg in segments.items()
        }
        for structure, (key, offset) in _STRUCTURES.items():
            seg = segments[key]
            if offset:
                seg = _offset_segment(seg, dirs[key], offset)
            values = render_line_heatmap(seg, spec.sigma, spec.width, spec.height)
            values = _contaminate(rng, values, spec.outlier_fraction, spec.blur_noise)
            channels.append(ChannelRaster(ChannelName(side, structure), values))

    return GroundTruthCase(heatmap=Heatmap(tuple(channels)), truth=truth)


def _unit(segment: Segment) -> tuple[float, float]:
    (x1, y1), (x2, y2) = segment
    n = math.hypot(x2 - x1, y2 - y1)
    return ((x2 - x1) / n, (y2 - y1) / n)


def truth_to_json(case: GroundTruthCase, sigma: float) -> dict:
    doc = {}
    for side in (Side.LEFT, Side.RIGHT):
        t = case.truth[side]
        doc[side.value] = {
            "neck": [list(t.neck[0]), list(t.neck[1])],
            "shaft": [list(t.shaft[0]), list(t.shaft[1])],
            "ccd": t.ccd,
        }
    doc["sigma"] = sigma  # render width, needed to rebuild truth rasters
    return doc


def write_case(case: GroundTruthCase, out_dir: Path | str, sigma: float) -> Path:
    out_dir = Path(out_dir)
    manifest = write_manifest(out_dir, case.heatmap)
    (out_dir / "truth.json").write_text(
        json.dumps(truth_to_json(case, sigma), indent=2)
    )
    return manifest


def write_dataset(spec: SyntheticSpec, out_dir: Path | str) -> list[Path]:
    """One subdirectory per case: manifest.json, 12 channel PNGs, truth.json."""
    out_dir = Path(out_dir)
    manifests = []
    for i in range(spec.cases):
        case = generate_case(spec, i)
        manifests.append(write_case(case, out_dir / f"case_{i:03d}", spec.sigma))
    return manifests
