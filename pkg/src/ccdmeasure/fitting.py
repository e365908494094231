"""Robust 2-D line fitting: orthogonal least squares, seeded RANSAC, Huber IRLS.

Residuals are perpendicular distances throughout.  The femoral shaft is
near-vertical in radiographs, where y-on-x regression is ill-conditioned, so
every fit here is axis-free (total least squares on the point scatter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heatmap import PointCloud


class FitError(ValueError):
    """Degenerate input to a line fit (too few or coincident points)."""


class FitFailedError(RuntimeError):
    """RANSAC could not find a consensus of at least ``min_inliers`` points."""

    def __init__(self, best_count: int, min_inliers: int):
        super().__init__(
            f"best consensus has {best_count} inliers, need {min_inliers}"
        )
        self.best_count = best_count
        self.min_inliers = min_inliers


@dataclass(frozen=True)
class Line2D:
    """Infinite line as anchor point + unit direction, canonically signed.

    The direction satisfies dy > 0, or dy == 0 and dx > 0, so every geometric
    line has exactly one representation.
    """

    anchor: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self):
        ax, ay = (float(v) for v in self.anchor)
        dx, dy = (float(v) for v in self.direction)
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            raise FitError("zero-length direction")
        dx, dy = dx / norm, dy / norm
        if dy < 0.0 or (dy == 0.0 and dx < 0.0):
            dx, dy = -dx, -dy
        object.__setattr__(self, "anchor", (ax, ay))
        object.__setattr__(self, "direction", (dx, dy))

    @property
    def normal(self) -> tuple[float, float]:
        dx, dy = self.direction
        return (-dy, dx)

    def angle(self) -> float:
        """Direction angle in radians, in [0, pi)."""
        dx, dy = self.direction
        return math.atan2(dy, dx)


@dataclass(frozen=True)
class RansacConfig:
    residual_threshold: float = 2.0  # px
    max_iterations: int = 200
    seed: int = 0
    min_inliers: int = 10
    huber_delta: float = 1.35  # px
    apply_huber: bool = True

    def __post_init__(self):
        if self.residual_threshold <= 0:
            raise ValueError("residual_threshold must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.min_inliers < 2:
            raise ValueError("min_inliers must be >= 2")
        if self.huber_delta <= 0:
            raise ValueError("huber_delta must be > 0")


@dataclass(frozen=True)
class FitResult:
    line: Line2D
    inlier_flags: np.ndarray  # bool per input point
    inlier_count: int
    iterations_run: int


def _as_xy(points) -> np.ndarray:
    if isinstance(points, PointCloud):
        return points.xy
    return np.atleast_2d(np.asarray(points, dtype=np.float64))


def residual(line: Line2D, point) -> float:
    """Perpendicular distance from a point to the infinite line."""
    nx, ny = line.normal
    ax, ay = line.anchor
    px, py = float(point[0]), float(point[1])
    return abs((px - ax) * nx + (py - ay) * ny)


def residuals(line: Line2D, points) -> np.ndarray:
    """Vectorized perpendicular distances."""
    xy = _as_xy(points)
    nx, ny = line.normal
    ax, ay = line.anchor
    return np.abs((xy[:, 0] - ax) * nx + (xy[:, 1] - ay) * ny)


def _principal_direction(centered: np.ndarray, weights: np.ndarray | None = None):
    if weights is None:
        scatter = centered.T @ centered
    else:
        scatter = (centered * weights[:, None]).T @ centered
    _, vecs = np.linalg.eigh(scatter)
    return vecs[:, -1]  # eigenvector of the largest eigenvalue


def least_squares_line(points) -> Line2D:
    """Orthogonal (total) least-squares line through a point set.

    The direction is the principal axis of the centered coordinates and the
    anchor is their mean; point weights are ignored.
    """
    xy = _as_xy(points)
    if len(xy) < 2 or (xy == xy[0]).all():
        raise FitError("need at least 2 distinct points")
    mean = xy.mean(axis=0)
    direction = _principal_direction(xy - mean)
    return Line2D(tuple(mean), tuple(direction))


def huber_refine(points, inlier_flags, initial: Line2D, delta: float) -> Line2D:
    """Refine a line on the flagged points under a Huber loss of orthogonal
    residuals, via iteratively reweighted least squares.

    Converged when successive angles differ by < 1e-9 rad and anchors by
    < 1e-9 px, or after 100 iterations.
    """
    xy = _as_xy(points)
    flags = np.asarray(inlier_flags, dtype=bool)
    pts = xy[flags]
    if len(pts) < 2:
        raise FitError("need at least 2 inliers to refine")

    line = initial
    for _ in range(100):
        r = residuals(line, pts)
        w = np.ones(len(pts))
        large = r > delta
        w[large] = delta / r[large]
        anchor = (pts * w[:, None]).sum(axis=0) / w.sum()
        direction = _principal_direction(pts - anchor, w)
        new = Line2D(tuple(anchor), tuple(direction))
        if (
            abs(new.angle() - line.angle()) < 1e-9
            and math.hypot(
                new.anchor[0] - line.anchor[0], new.anchor[1] - line.anchor[1]
            )
            < 1e-9
        ):
            return new
        line = new
    return line


def line_through(p1, p2) -> Line2D:
    """Line through two distinct points."""
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    return Line2D((float(p1[0]), float(p1[1])), (float(dx), float(dy)))


def ransac_fit(points, config: RansacConfig = RansacConfig()) -> FitResult:
    """Seeded RANSAC line fit followed by Huber refinement on the inliers.

    Deterministic for a fixed (point order, seed): each iteration samples two
    distinct points, forms the candidate line, and counts points within
    ``residual_threshold``; the highest count wins (first encountered on
    ties).  The winner's inliers are refit with orthogonal least squares,
    refined under the Huber loss, and the flags recomputed against the
    refined line.
    """
    xy = _as_xy(points)
    n = len(xy)
    if n < 2:
        raise FitError("need at least 2 points")
    if n < config.min_inliers:
        raise FitFailedError(0, config.min_inliers)

    rng = np.random.default_rng(config.seed)
    best_count = 0
    best_mask = None
    for _ in range(config.max_iterations):
        i, j = rng.choice(n, size=2, replace=False)
        if (xy[i] == xy[j]).all():
            continue  # degenerate sample, produces no candidate
        candidate = line_through(xy[i], xy[j])
        mask = residuals(candidate, xy) <= config.residual_threshold
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask

    if best_mask is None or best_count < config.min_inliers:
        raise FitFailedError(best_count, config.min_inliers)

    line = least_squares_line(xy[best_mask])
    if config.apply_huber:
        line = huber_refine(xy, best_mask, line, config.huber_delta)
    flags = residuals(line, xy) <= config.residual_threshold
    flags.flags.writeable = False
    return FitResult(
        line=line,
        inlier_flags=flags,
        inlier_count=int(flags.sum()),
        iterations_run=config.max_iterations,
    )
