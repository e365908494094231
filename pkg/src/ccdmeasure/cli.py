"""`ccd` command line: synth / fit / eval / serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .evaluate import EvaluationError, evaluate_dataset, format_text_report, report_to_dict
from .fitting import RansacConfig
from .geometry import ChannelFitError, MissingChannelError, measure_femur
from .heatmap import DEFAULT_CUTOFF, HeatmapError, Side, load_heatmap
from .synth import SyntheticSpec, write_dataset


@click.group()
def main():
    """Femur centerline fitting and CCD angle measurement."""


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--cases", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--sigma", default=3.0, show_default=True, type=float)
@click.option("--outliers", default=0.2, show_default=True, type=float)
@click.option("--noise", default=0.0, show_default=True, type=float)
@click.option("--size", default=512, show_default=True, type=int)
def synth(out_dir, cases, seed, sigma, outliers, noise, size):
    """Generate synthetic ground-truth cases."""
    spec = SyntheticSpec(
        width=size, height=size, sigma=sigma, outlier_fraction=outliers,
        blur_noise=noise, seed=seed, cases=cases,
    )
    manifests = write_dataset(spec, out_dir)
    for m in manifests:
        click.echo(str(m))


@main.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of text.")
@click.option("--cutoff", default=DEFAULT_CUTOFF, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
def fit(manifest, as_json, cutoff, seed):
    """One-shot fit of a study manifest: CCD angle per available side."""
    config = RansacConfig(seed=seed)
    try:
        heatmap = load_heatmap(manifest)
    except HeatmapError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    results = {}
    for side in Side:
        try:
            m = measure_femur(heatmap, side, config, cutoff)
        except (MissingChannelError, ChannelFitError) as exc:
            results[side.value] = {"error": str(exc)}
            continue
        results[side.value] = {
            "ccd_degrees": m.ccd_degrees,
            "degenerate": m.degenerate,
            "neck_endpoints": [list(p) for p in m.neck_endpoints],
            "shaft_endpoints": [list(p) for p in m.shaft_endpoints],
        }
    if as_json:
        click.echo(json.dumps(results, indent=2))
    else:
        for side, r in results.items():
            if "error" in r:
                click.echo(f"{side}: unavailable ({r['error']})")
            else:
                click.echo(f"{side}: CCD {r['ccd_degrees']:.1f} deg")


@main.command("eval")
@click.option("--pred", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--truth", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--cutoff", default=DEFAULT_CUTOFF, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@click.option("--text", is_flag=True, help="Print the plain-text tables.")
def eval_cmd(pred, truth, cutoff, seed, report_path, text):
    """Evaluate predictions against ground truth (case dirs paired by name)."""
    config = RansacConfig(seed=seed)
    try:
        reports, agg = evaluate_dataset(pred, truth, cutoff, config)
    except EvaluationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if report_path:
        Path(report_path).write_text(
            json.dumps(report_to_dict(agg, reports), indent=2)
        )
    if text or not report_path:
        click.echo(format_text_report(agg))
    sys.exit(2 if agg.failure_count else 0)


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--watch-folder", type=click.Path(file_okay=False))
@click.option("--save-folder", type=click.Path(file_okay=False))
@click.option("--activate-word", default="activate", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--cutoff", default=DEFAULT_CUTOFF, show_default=True, type=float)
def serve(port, host, watch_folder, save_folder, activate_word, seed, cutoff):
    """Run the measurement HTTP service."""
    import uvicorn

    from .service import MeasurementService, create_app

    service = MeasurementService(
        watch_folder=watch_folder,
        save_folder=save_folder,
        wake_word=activate_word,
        cutoff=cutoff,
        config=RansacConfig(seed=seed),
    )
    service.start_ticker()
    uvicorn.run(create_app(service), host=host, port=port)


if __name__ == "__main__":
    main()
