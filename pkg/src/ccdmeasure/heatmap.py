"""Multi-channel line-probability heatmaps: loading, thresholding, centroids, MSE.

A heatmap is a stack of single-channel probability rasters, one per anatomical
line, named after the annotation label vocabulary ("Femoral Neck Centerline
Left", ...).  Rasters are stored on disk as 16-bit grayscale PNGs with
probability = stored_value / 65535 and described by a small JSON manifest.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

MAX_STORED = 65535  # 16-bit quantization ceiling
DEFAULT_CUTOFF = 0.9


class HeatmapError(ValueError):
    """Raised for malformed manifests, rasters, or channel lookups."""


class EmptyCloudError(ValueError):
    """Raised when an operation needs a non-empty point cloud."""


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Structure(enum.Enum):
    NECK_MEDIAL = "Femoral Neck Medial"
    NECK_CENTERLINE = "Femoral Neck Centerline"
    NECK_LATERAL = "Femoral Neck Lateral"
    SHAFT_MEDIAL = "Femoral Shaft Medial"
    SHAFT_CENTERLINE = "Femoral Shaft Centerline"
    SHAFT_LATERAL = "Femoral Shaft Lateral"


@dataclass(frozen=True)
class ChannelName:
    """One of the 12 valid (structure, side) line labels."""

    side: Side
    structure: Structure

    def __str__(self) -> str:
        return f"{self.structure.value} {self.side.value.capitalize()}"

    @classmethod
    def parse(cls, label: str) -> "ChannelName":
        for side in Side:
            for structure in Structure:
                if label == f"{structure.value} {side.value.capitalize()}":
                    return cls(side, structure)
        raise HeatmapError(f"unknown channel name: {label!r}")


ALL_CHANNEL_NAMES = tuple(
    ChannelName(side, structure) for side in Side for structure in Structure
)


@dataclass(frozen=True)
class ChannelRaster:
    """A named probability raster, row-major, values in [0, 1]."""

    name: ChannelName
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise HeatmapError(f"channel {self.name}: raster must be 2-D")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise HeatmapError(f"channel {self.name}: values outside [0, 1]")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Heatmap:
    """An ordered stack of same-sized channels, optionally with a display image."""

    channels: tuple[ChannelRaster, ...]
    image: np.ndarray | None = None

    def __post_init__(self):
        if not self.channels:
            raise HeatmapError("heatmap needs at least one channel")
        shapes = {c.values.shape for c in self.channels}
        if len(shapes) != 1:
            raise HeatmapError(f"channel dimension mismatch: {sorted(shapes)}")
        names = [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise HeatmapError("duplicate channel names")

    @property
    def width(self) -> int:
        return self.channels[0].width

    @property
    def height(self) -> int:
        return self.channels[0].height

    def channel(self, name: ChannelName) -> ChannelRaster:
        for c in self.channels:
            if c.name == name:
                return c
        raise HeatmapError(f"missing channel: {name}")

    def has_channel(self, name: ChannelName) -> bool:
        return any(c.name == name for c in self.channels)


@dataclass(frozen=True)
class PointCloud:
    """Pixels surviving a probability cutoff: (x, y) centers plus weights."""

    xy: np.ndarray  # (N, 2) float64, columns are x (column) and y (row)
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        xy = np.atleast_2d(np.asarray(self.xy, dtype=np.float64))
        weights = self.weights
        if weights is None:
            weights = np.ones(len(xy))
        weights = np.asarray(weights, dtype=np.float64)
        xy.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.xy)


def decode_raster(path: Path | str) -> np.ndarray:
    """Read a 16-bit (or 8-bit) grayscale PNG as probabilities in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.ndim != 2:
        raise HeatmapError(f"{path}: expected single-channel grayscale")
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() > MAX_STORED:
        raise HeatmapError(f"{path}: stored values outside [0, {MAX_STORED}]")
    return arr.astype(np.float64) / MAX_STORED


def encode_raster(values: np.ndarray, path: Path | str) -> None:
    """Quantize probabilities to 16 bits and write a grayscale PNG."""
    values = np.asarray(values, dtype=np.float64)
    if values.min() < 0.0 or values.max() > 1.0:
        raise HeatmapError("values outside [0, 1]")
    stored = np.rint(values * MAX_STORED).astype(np.uint16)
    # low compression level: noisy rasters barely compress and level 6 is slow
    img = Image.new("I;16", (stored.shape[1], stored.shape[0]))
    img.frombytes(stored.tobytes())
    img.save(path, compress_level=1)


def quantize(values: np.ndarray) -> np.ndarray:
    """The 16-bit round trip as a pure function (encode then decode)."""
    return np.rint(np.asarray(values, dtype=np.float64) * MAX_STORED) / MAX_STORED


def load_heatmap(manifest_path: Path | str) -> Heatmap:
    """Load a heatmap study from its JSON manifest.

    The manifest names each channel and points at its 16-bit PNG raster; an
    optional "image" entry is the underlying radiograph for display only.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise HeatmapError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise HeatmapError(f"malformed manifest {manifest_path}: {exc}") from exc
    for key in ("width", "height", "channels"):
        if key not in manifest:
            raise HeatmapError(f"manifest {manifest_path} missing {key!r}")
    width, height = int(manifest["width"]), int(manifest["height"])
    base = manifest_path.parent

    channels = []
    for entry in manifest["channels"]:
        name = ChannelName.parse(entry["name"])
        declared_side = entry.get("side")
        if declared_side is not None and declared_side != name.side.value:
            raise HeatmapError(
                f"channel {name}: side field {declared_side!r} contradicts label"
            )
        values = decode_raster(base / entry["file"])
        if values.shape != (height, width):
            raise HeatmapError(
                f"channel {name}: raster is {values.shape[::-1]}, "
                f"manifest says {(width, height)}"
            )
        channels.append(ChannelRaster(name, values))

    image = None
    if manifest.get("image"):
        with Image.open(base / manifest["image"]) as img:
            image = np.asarray(img.convert("L"))
    return Heatmap(tuple(channels), image=image)


def write_manifest(
    out_dir: Path | str,
    heatmap: Heatmap,
    *,
    image_name: str | None = None,
) -> Path:
    """Write a heatmap's rasters plus manifest.json into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, ch in enumerate(heatmap.channels):
        fname = f"ch_{i:02d}_{str(ch.name).lower().replace(' ', '_')}.png"
        encode_raster(ch.values, out_dir / fname)
        entries.append(
            {"name": str(ch.name), "file": fname, "side": ch.name.side.value}
        )
    manifest = {
        "version": 1,
        "width": heatmap.width,
        "height": heatmap.height,
        "image": image_name,
        "channels": entries,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def threshold_points(channel: ChannelRaster, cutoff: float = DEFAULT_CUTOFF) -> PointCloud:
    """Pixels with probability strictly above ``cutoff``, row-major order.

    Coordinates are pixel centers as (column, row); a pixel exactly at the
    cutoff is removed.
    """
    if not 0.0 <= cutoff < 1.0:
        raise ValueError(f"cutoff must be in [0, 1): {cutoff}")
    rows, cols = np.nonzero(channel.values > cutoff)
    xy = np.column_stack([cols, rows]).astype(np.float64)
    return PointCloud(xy.reshape(-1, 2), channel.values[rows, cols])


def centroid(cloud: PointCloud) -> tuple[float, float]:
    """Unweighted mean (x, y) of the cloud."""
    if len(cloud) == 0:
        raise EmptyCloudError("centroid of an empty cloud")
    mx, my = cloud.xy.mean(axis=0)
    return float(mx), float(my)


def heatmap_mse(predicted: ChannelRaster, target: ChannelRaster) -> float:
    """Pixel-wise mean squared error between two rasters."""
    if predicted.values.shape != target.values.shape:
        raise HeatmapError(
            f"dimension mismatch: {predicted.values.shape} vs {target.values.shape}"
        )
    diff = predicted.values - target.values
    return float(np.mean(diff * diff))
