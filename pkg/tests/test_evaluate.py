import json
import math

import numpy as np
import pytest

from ccdmeasure.evaluate import (
    EvaluationError,
    aggregate,
    CaseReport,
    evaluate_case,
    evaluate_dataset,
    format_text_report,
    line_metrics,
    report_to_dict,
)
from ccdmeasure.heatmap import (
    ChannelName,
    ChannelRaster,
    Heatmap,
    Side,
    Structure,
    write_manifest,
)
from ccdmeasure.synth import SyntheticSpec, render_line_heatmap, write_dataset

SIGMA = 3.0

# vertical/steep segments at integer columns: the rendered band is symmetric
# about the true line, so fits and centroids are exact
SEGMENTS = {
    Side.LEFT: {
        "neck": ((80.0, 50.0), (140.0, 110.0)),
        "shaft": ((100.0, 50.0), (100.0, 200.0)),
    },
    Side.RIGHT: {
        "neck": ((220.0, 110.0), (160.0, 50.0)),
        "shaft": ((200.0, 50.0), (200.0, 200.0)),
    },
}


def truth_channels(size=256):
    channels = []
    for side in Side:
        for structure, key in (
            (Structure.NECK_CENTERLINE, "neck"),
            (Structure.SHAFT_CENTERLINE, "shaft"),
        ):
            values = render_line_heatmap(SEGMENTS[side][key], SIGMA, size, size)
            channels.append(ChannelRaster(ChannelName(side, structure), values))
    return channels


def write_truth(path, segments=SEGMENTS):
    doc = {
        side.value: {
            "neck": [list(p) for p in segs["neck"]],
            "shaft": [list(p) for p in segs["shaft"]],
            "ccd": _ccd(segs),
        }
        for side, segs in segments.items()
    }
    doc["sigma"] = SIGMA
    path.write_text(json.dumps(doc))


def _ccd(segs):
    from ccdmeasure.geometry import ccd_angle, line_from_endpoints

    return ccd_angle(
        line_from_endpoints(*segs["neck"]), line_from_endpoints(*segs["shaft"])
    )


class TestLineMetrics:
    def test_identity_is_exactly_zero(self):
        segment = SEGMENTS[Side.LEFT]["shaft"]  # vertical at integer column
        values = render_line_heatmap(segment, SIGMA, 256, 256)
        ch = ChannelRaster(
            ChannelName(Side.LEFT, Structure.SHAFT_CENTERLINE), values
        )
        metrics, line = line_metrics(ch, segment, sigma=SIGMA)
        assert metrics.centroid_distance == 0.0
        assert metrics.angular_error == 0.0
        assert line is not None

    def test_translation_pythagorean_shift(self):
        segment = SEGMENTS[Side.LEFT]["shaft"]
        shifted = tuple((x + 3.0, y + 4.0) for x, y in segment)
        values = render_line_heatmap(shifted, SIGMA, 256, 256)
        ch = ChannelRaster(
            ChannelName(Side.LEFT, Structure.SHAFT_CENTERLINE), values
        )
        metrics, _ = line_metrics(ch, segment, sigma=SIGMA)
        assert metrics.centroid_distance == 5.0
        assert metrics.angular_error == 0.0

    def test_rotation_about_centroid(self):
        # rotate the truth segment 5 deg about its midpoint and use the
        # rendering as the prediction
        segment = ((100.0, 50.0), (100.0, 200.0))
        mid = (100.0, 125.0)
        theta = math.radians(5.0)
        rot = []
        for x, y in segment:
            dx, dy = x - mid[0], y - mid[1]
            rot.append((
                mid[0] + dx * math.cos(theta) - dy * math.sin(theta),
                mid[1] + dx * math.sin(theta) + dy * math.cos(theta),
            ))
        values = render_line_heatmap(tuple(rot), SIGMA, 256, 256)
        ch = ChannelRaster(
            ChannelName(Side.LEFT, Structure.SHAFT_CENTERLINE), values
        )
        metrics, _ = line_metrics(ch, segment, sigma=SIGMA)
        assert abs(metrics.angular_error - 5.0) < 0.2
        assert metrics.centroid_distance < 1.0

    def test_empty_prediction_reported_as_failure(self):
        ch = ChannelRaster(
            ChannelName(Side.LEFT, Structure.SHAFT_CENTERLINE), np.zeros((64, 64))
        )
        result, line = line_metrics(ch, ((10.0, 10.0), (10.0, 50.0)), sigma=SIGMA)
        from ccdmeasure.evaluate import LineFailure

        assert isinstance(result, LineFailure)
        assert line is None


class TestEvaluateCase:
    def test_identity_case_all_zero(self, tmp_path):
        manifest = write_manifest(tmp_path, Heatmap(tuple(truth_channels())))
        write_truth(tmp_path / "truth.json")
        report = evaluate_case(manifest, tmp_path / "truth.json")
        assert len(report.lines) == 4
        assert not report.failures
        for m in report.lines:
            assert m.angular_error < 0.1
            assert m.centroid_distance < 0.1
        for side in Side:
            assert report.ccd_error[side] < 0.1

    def test_missing_channel_partial_failure(self, tmp_path):
        channels = [
            c for c in truth_channels()
            if not (
                c.name.side is Side.LEFT
                and c.name.structure is Structure.NECK_CENTERLINE
            )
        ]
        manifest = write_manifest(tmp_path, Heatmap(tuple(channels)))
        write_truth(tmp_path / "truth.json")
        report = evaluate_case(manifest, tmp_path / "truth.json")
        assert len(report.failures) == 1
        assert report.failures[0].channel == ChannelName(
            Side.LEFT, Structure.NECK_CENTERLINE
        )
        assert Side.LEFT not in report.ccd_error
        assert Side.RIGHT in report.ccd_error  # other side still evaluated

    def test_truth_file_absent(self, tmp_path):
        manifest = write_manifest(tmp_path, Heatmap(tuple(truth_channels())))
        with pytest.raises(EvaluationError, match="nope.json"):
            evaluate_case(manifest, tmp_path / "nope.json")


class TestAggregate:
    def make_report(self, case_id, ccd_error, lines=(), failures=()):
        return CaseReport(
            case_id=case_id,
            lines=tuple(lines),
            failures=tuple(failures),
            ccd_error=ccd_error,
        )

    def test_hand_mae(self):
        reports = [
            self.make_report("a", {Side.LEFT: abs(130 - 126)}),
            self.make_report("b", {Side.LEFT: abs(120 - 124)}),
        ]
        agg = aggregate(reports)
        assert agg.ccd_mae[Side.LEFT] == 4.0
        assert agg.ccd_count[Side.LEFT] == 2

    def test_single_report_identity(self):
        from ccdmeasure.evaluate import LineMetrics

        name = ChannelName(Side.LEFT, Structure.SHAFT_CENTERLINE)
        r = self.make_report(
            "a", {Side.RIGHT: 2.5}, lines=[LineMetrics(name, 1.5, 0.25)]
        )
        agg = aggregate([r])
        assert agg.ccd_mae[Side.RIGHT] == 2.5
        assert agg.channels[0].mean_centroid_distance == 1.5
        assert agg.channels[0].mean_angular_error == 0.25

    def test_failures_counted_not_averaged(self):
        from ccdmeasure.evaluate import LineFailure, LineMetrics

        name = ChannelName(Side.LEFT, Structure.NECK_CENTERLINE)
        ok = [
            self.make_report(str(i), {}, lines=[LineMetrics(name, 1.0, 1.0)])
            for i in range(9)
        ]
        bad = self.make_report(
            "bad", {}, failures=[LineFailure(name, "empty cloud")]
        )
        agg = aggregate(ok + [bad])
        assert agg.case_count == 10
        assert agg.failure_count == 1
        assert agg.channels[0].count == 9
        assert agg.channels[0].mean_angular_error == 1.0

    def test_permutation_invariance(self):
        reports = [self.make_report(str(i), {Side.LEFT: float(i)}) for i in range(5)]
        a = aggregate(reports)
        b = aggregate(list(reversed(reports)))
        assert a.ccd_mae == b.ccd_mae
        assert a.channels == b.channels

    def test_empty_input(self):
        agg = aggregate([])
        assert agg.case_count == 0
        assert agg.ccd_mae == {}


class TestReports:
    def test_dataset_closure_and_report_shape(self, tmp_path):
        spec = SyntheticSpec(seed=0, cases=2)
        write_dataset(spec, tmp_path)
        reports, agg = evaluate_dataset(tmp_path, tmp_path)
        assert agg.case_count == 2
        assert agg.failure_count == 0
        for side in Side:
            assert agg.ccd_mae[side] < 0.1

        text = format_text_report(agg)
        for side in ("Left", "Right"):
            for structure in ("Neck", "Shaft"):
                assert f"Femoral {structure} Centerline {side}" in text
        assert "Left femur" in text and "Right femur" in text

        doc = report_to_dict(agg, reports)
        round_tripped = json.loads(json.dumps(doc))
        assert round_tripped == doc
        assert len(doc["lines"]) == 4
        assert {c["side"] for c in doc["ccd"]} == {"left", "right"}

    def test_empty_pred_dir(self, tmp_path):
        with pytest.raises(EvaluationError):
            evaluate_dataset(tmp_path, tmp_path)
