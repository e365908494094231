"""Evaluation metrics over prediction/ground-truth pairs.

Per centerline channel: Euclidean distance between thresholded-mask centroids
(computed before any outlier removal) and the undirected angular error of the
fitted line.  Per side: absolute CCD error.  Aggregates mirror the per-line
and per-side report tables.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .fitting import RansacConfig, ransac_fit
from .geometry import ccd_angle, line_from_endpoints, undirected_angle
from .heatmap import (
    DEFAULT_CUTOFF,
    ChannelName,
    ChannelRaster,
    Heatmap,
    Side,
    Structure,
    centroid,
    load_heatmap,
    threshold_points,
)
from .synth import Segment, render_line_heatmap

DEFAULT_SIGMA = 3.0

CENTERLINE_CHANNELS = tuple(
    ChannelName(side, structure)
    for side in (Side.LEFT, Side.RIGHT)
    for structure in (Structure.NECK_CENTERLINE, Structure.SHAFT_CENTERLINE)
)


class EvaluationError(ValueError):
    """Unreadable or unparsable prediction/truth inputs."""


@dataclass(frozen=True)
class LineMetrics:
    channel: ChannelName
    centroid_distance: float
    angular_error: float


@dataclass(frozen=True)
class LineFailure:
    channel: ChannelName
    reason: str


@dataclass(frozen=True)
class CaseReport:
    case_id: str
    lines: tuple[LineMetrics, ...]
    failures: tuple[LineFailure, ...]
    ccd_error: dict[Side, float]  # only sides where both lines fitted
    ccd_predicted: dict[Side, float] = field(default_factory=dict)
    ccd_truth: dict[Side, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ChannelAggregate:
    channel: ChannelName
    mean_centroid_distance: float
    mean_angular_error: float
    count: int


@dataclass(frozen=True)
class AggregateReport:
    case_count: int
    failure_count: int  # individual line failures across all cases
    channels: tuple[ChannelAggregate, ...]
    ccd_mae: dict[Side, float]
    ccd_count: dict[Side, int]


def line_metrics(
    pred_channel: ChannelRaster,
    truth_segment: Segment,
    cutoff: float = DEFAULT_CUTOFF,
    config: RansacConfig = RansacConfig(),
    sigma: float = DEFAULT_SIGMA,
):
    """Metrics for one channel, or a LineFailure if the fit is impossible.

    Returns (LineMetrics | LineFailure, fitted Line2D | None).  The truth
    centroid comes from the noise-free rendered truth channel thresholded at
    the same cutoff; the angular error compares the RANSAC-fitted prediction
    line with the truth line itself.
    """
    truth_values = render_line_heatmap(
        truth_segment, sigma, pred_channel.width, pred_channel.height
    )
    truth_cloud = threshold_points(
        ChannelRaster(pred_channel.name, truth_values), cutoff
    )
    pred_cloud = threshold_points(pred_channel, cutoff)
    try:
        fit = ransac_fit(pred_cloud, config)
    except Exception as exc:
        return LineFailure(pred_channel.name, str(exc)), None

    cx, cy = centroid(pred_cloud)
    tx, ty = centroid(truth_cloud)
    truth_line = line_from_endpoints(*truth_segment)
    metrics = LineMetrics(
        channel=pred_channel.name,
        centroid_distance=math.hypot(cx - tx, cy - ty),
        angular_error=undirected_angle(fit.line, truth_line),
    )
    return metrics, fit.line


def _load_truth(truth_path: Path) -> tuple[dict[Side, dict], float]:
    if not truth_path.is_file():
        raise EvaluationError(f"truth file not found: {truth_path}")
    try:
        doc = json.loads(truth_path.read_text())
    except json.JSONDecodeError as exc:
        raise EvaluationError(f"malformed truth file {truth_path}: {exc}") from exc
    sides = {}
    for side in Side:
        if side.value in doc:
            sides[side] = doc[side.value]
    if not sides:
        raise EvaluationError(f"truth file {truth_path} names no sides")
    return sides, float(doc.get("sigma", DEFAULT_SIGMA))


def evaluate_case(
    pred_manifest: Path | str,
    truth_file: Path | str,
    cutoff: float = DEFAULT_CUTOFF,
    config: RansacConfig = RansacConfig(),
    case_id: str | None = None,
) -> CaseReport:
    """Evaluate one study: four centerline channels plus per-side CCD error.

    Per-line failures (missing channel, empty cloud, failed fit) are recorded
    in the report; the other lines and side are still evaluated.
    """
    pred_manifest = Path(pred_manifest)
    truth_path = Path(truth_file)
    try:
        heatmap = load_heatmap(pred_manifest)
    except Exception as exc:
        raise EvaluationError(f"cannot load prediction {pred_manifest}: {exc}") from exc
    truth_sides, sigma = _load_truth(truth_path)

    lines: list[LineMetrics] = []
    failures: list[LineFailure] = []
    fitted: dict[ChannelName, object] = {}
    for name in CENTERLINE_CHANNELS:
        if name.side not in truth_sides:
            continue
        key = "neck" if name.structure is Structure.NECK_CENTERLINE else "shaft"
        segment = tuple(tuple(p) for p in truth_sides[name.side][key])
        if not heatmap.has_channel(name):
            failures.append(LineFailure(name, "channel missing from prediction"))
            continue
        result, line = line_metrics(
            heatmap.channel(name), segment, cutoff, config, sigma
        )
        if isinstance(result, LineFailure):
            failures.append(result)
        else:
            lines.append(result)
            fitted[name] = line

    ccd_error: dict[Side, float] = {}
    ccd_predicted: dict[Side, float] = {}
    ccd_truth: dict[Side, float] = {}
    for side, truth in truth_sides.items():
        neck = fitted.get(ChannelName(side, Structure.NECK_CENTERLINE))
        shaft = fitted.get(ChannelName(side, Structure.SHAFT_CENTERLINE))
        if neck is None or shaft is None:
            continue
        predicted = ccd_angle(neck, shaft)
        ccd_predicted[side] = predicted
        ccd_truth[side] = float(truth["ccd"])
        ccd_error[side] = abs(predicted - float(truth["ccd"]))

    return CaseReport(
        case_id=case_id or pred_manifest.parent.name,
        lines=tuple(lines),
        failures=tuple(failures),
        ccd_error=ccd_error,
        ccd_predicted=ccd_predicted,
        ccd_truth=ccd_truth,
    )


def aggregate(reports: list[CaseReport]) -> AggregateReport:
    """Means over successful lines/sides; failures are counted, not averaged."""
    per_channel: dict[ChannelName, list[LineMetrics]] = {}
    for report in reports:
        for m in report.lines:
            per_channel.setdefault(m.channel, []).append(m)

    channels = tuple(
        ChannelAggregate(
            channel=name,
            mean_centroid_distance=sum(m.centroid_distance for m in ms) / len(ms),
            mean_angular_error=sum(m.angular_error for m in ms) / len(ms),
            count=len(ms),
        )
        for name, ms in sorted(per_channel.items(), key=lambda kv: str(kv[0]))
    )

    ccd_mae: dict[Side, float] = {}
    ccd_count: dict[Side, int] = {}
    for side in Side:
        errors = [r.ccd_error[side] for r in reports if side in r.ccd_error]
        ccd_count[side] = len(errors)
        if errors:
            ccd_mae[side] = sum(errors) / len(errors)

    return AggregateReport(
        case_count=len(reports),
        failure_count=sum(len(r.failures) for r in reports),
        channels=channels,
        ccd_mae=ccd_mae,
        ccd_count=ccd_count,
    )


def evaluate_dataset(
    pred_dir: Path | str,
    truth_dir: Path | str,
    cutoff: float = DEFAULT_CUTOFF,
    config: RansacConfig = RansacConfig(),
) -> tuple[list[CaseReport], AggregateReport]:
    """Pair case subdirectories by name: pred/<case>/manifest.json against
    truth/<case>/truth.json."""
    pred_dir, truth_dir = Path(pred_dir), Path(truth_dir)
    manifests = sorted(pred_dir.glob("*/manifest.json"))
    if not manifests:
        raise EvaluationError(f"no case manifests under {pred_dir}")
    reports = []
    for manifest in manifests:
        truth = truth_dir / manifest.parent.name / "truth.json"
        reports.append(evaluate_case(manifest, truth, cutoff, config))
    return reports, aggregate(reports)


def report_to_dict(agg: AggregateReport, reports: list[CaseReport] | None = None) -> dict:
    doc = {
        "case_count": agg.case_count,
        "failure_count": agg.failure_count,
        "lines": [
            {
                "channel": str(c.channel),
                "mean_centroid_distance": c.mean_centroid_distance,
                "mean_angular_error": c.mean_angular_error,
                "count": c.count,
            }
            for c in agg.channels
        ],
        "ccd": [
            {
                "side": side.value,
                "mae": agg.ccd_mae.get(side),
                "count": agg.ccd_count.get(side, 0),
            }
            for side in (Side.LEFT, Side.RIGHT)
        ],
    }
    if reports is not None:
        doc["cases"] = [
            {
                "case_id": r.case_id,
                "lines": [
                    {
                        "channel": str(m.channel),
                        "centroid_distance": m.centroid_distance,
                        "angular_error": m.angular_error,
                    }
                    for m in r.lines
                ],
                "failures": [
                    {"channel": str(f.channel), "reason": f.reason}
                    for f in r.failures
                ],
                "ccd": {
                    side.value: {
                        "predicted": r.ccd_predicted[side],
                        "truth": r.ccd_truth[side],
                        "error": r.ccd_error[side],
                    }
                    for side in r.ccd_error
                },
            }
            for r in reports
        ]
    return doc


def format_text_report(agg: AggregateReport) -> str:
    """Plain-text tables: one row per centerline channel, one MAE row per side."""
    out = []
    out.append("Per-line evaluation")
    header = f"{'Femur line':<36} {'Mean centroid distance':>24} {'Mean angular error (deg)':>26}"
    out.append(header)
    out.append("-" * len(header))
    for c in agg.channels:
        out.append(
            f"{str(c.channel):<36} {c.mean_centroid_distance:>24.3f} {c.mean_angular_error:>26.3f}"
        )
    out.append("")
    out.append("CCD angle")
    out.append(f"{'Femur':<12} {'Mean absolute error (deg)':>26}")
    out.append("-" * 40)
    for side in (Side.LEFT, Side.RIGHT):
        mae = agg.ccd_mae.get(side)
        text = f"{mae:.3f}" if mae is not None else "n/a"
        out.append(f"{side.value.capitalize() + ' femur':<12} {text:>26}")
    out.append("")
    out.append(f"cases: {agg.case_count}   line failures: {agg.failure_count}")
    return "\n".join(out)
