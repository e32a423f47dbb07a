"""Command-line entry points: synthetic runs, analysis reports, serving, ingest."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import analysis, persistence
from .driver import load_profiles
from .errors import EngineError
from .experiments import run_synthetic
from .session import Condition

CONDITIONS = {"trained": Condition.TRAINED_LOA, "fixed": Condition.FIXED_LOA}


@click.group(context_settings={"auto_envvar_prefix": "IVATUNE"})
def main():
    """Human-in-the-loop design optimization engine."""


@main.command("run-synthetic")
@click.option("--condition", type=click.Choice(sorted(CONDITIONS)), required=True)
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), required=True,
              help="JSON file of synthetic rater profiles.")
@click.option("--seeds", type=int, default=1, show_default=True,
              help="Sessions per profile (seeds are derived deterministically).")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--sampling-budget", type=int, default=None)
@click.option("--optimization-budget", type=int, default=None)
def run_synthetic_cmd(condition, profiles_path, seeds, out_dir, sampling_budget,
                      optimization_budget):
    """Run synthetic sessions and write one JSONL log per session."""
    try:
        profiles = load_profiles(profiles_path)
        manifest = run_synthetic(
            CONDITIONS[condition], profiles, seeds, out_dir,
            sampling_budget=sampling_budget, optimization_budget=optimization_budget)
    except EngineError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {len(manifest['sessions'])} session logs to {out_dir}")


@main.command("analyze")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def analyze_cmd(in_path, out_dir):
    """Correlation matrices, value progressions, and parameter summaries."""
    try:
        dataset = persistence.load_dataset(in_path)
    except EngineError as exc:
        raise click.ClickException(str(exc))
    if not dataset:
        raise click.ClickException(f"no sessions found under {in_path}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    correlations = {}
    for scope in analysis.Scope:
        try:
            correlations[scope.value] = analysis.correlation_matrix(dataset, scope).tolist()
        except EngineError as exc:
            correlations[scope.value] = {"error": str(exc)}
    (out / "correlations.json").write_text(json.dumps(correlations, indent=2))
    with open(out / "correlations.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scope", "pair", "r"])
        names = analysis.OBJECTIVE_NAMES
        for scope_name, mat in correlations.items():
            if isinstance(mat, dict):
                continue
            for i in range(3):
                for j in range(i + 1, 3):
                    writer.writerow([scope_name, f"{names[i]}~{names[j]}", mat[i][j]])

    for label, condition in CONDITIONS.items():
        try:
            prog = analysis.progression_means(dataset, condition)
            summ = analysis.parameter_summary(dataset, condition)
        except EngineError:
            continue
        (out / f"progression_{label}.json").write_text(json.dumps(prog, indent=2))
        with open(out / f"progression_{label}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", *analysis.OBJECTIVE_NAMES])
            for k, it in enumerate(prog["iterations"]):
                writer.writerow([it, prog["mental_demand"][k],
                                 prog["predictability"][k], prog["usefulness"][k]])
        (out / f"parameter_summary_{label}.json").write_text(json.dumps(summ, indent=2))
        with open(out / f"parameter_summary_{label}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["parameter", "mean", "median", "sd", "iqr", "min", "max"])
            for name, stats in summ.items():
                writer.writerow([name, stats["mean"], stats["median"], stats["sd"],
                                 stats["iqr"], stats["min"], stats["max"]])
    click.echo(f"analysis written to {out}")


@main.command("serve")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data", "data_dir", type=click.Path(), default=None,
              help="Directory for durable session logs.")
def serve_cmd(port, host, data_dir):
    """Run the HTTP session API."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(data_dir), host=host, port=port)


@main.command("ingest")
@click.option("--csv", "csv_path", type=click.Path(exists=True), required=True)
@click.option("--map", "map_path", type=click.Path(exists=True), required=True,
              help="Column-map JSON adapting the CSV headers to the record schema.")
@click.option("--out", "out_path", type=click.Path(), required=True)
def ingest_cmd(csv_path, map_path, out_path):
    """Convert an external CSV dataset into the JSONL schema."""
    try:
        manifest = persistence.ingest_csv(csv_path, map_path, out_path)
    except EngineError as exc:
        raise click.ClickException(str(exc))
    manifest_path = Path(out_path).with_suffix(".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2))
    click.echo(f"ingested {manifest['rows']} rows into {out_path} "
               f"({len(manifest['sessions'])} sessions); manifest at {manifest_path}")


if __name__ == "__main__":
    main()
