"""Batch experiment runner: `lab run <config.json>` and `lab plot <report.json>`.

Exit codes: 0 all suite assertions pass, 1 some assertion failed (reports are
still written), 2 invalid configuration.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import ConfigInvalid, LabError, ReportMissing
from .plotting import emit_plot_data, render_figures, write_series_csv
from .runconfig import run_config


@click.group()
def main():
    """Numerical lab for sectorial calculus and square-function experiments."""


@main.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory (default: config's output_dir or ./lab_out)")
@click.option("--seed", type=int, default=None, envvar="LAB_SEED",
              help="Seed override (falls back to LAB_SEED, then the config)")
@click.option("--jobs", type=int, default=1, help="Suite worker pool size")
def run(config_path, out_dir, seed, jobs):
    """Run every suite in CONFIG_PATH and write JSON + CSV reports."""
    try:
        with open(config_path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"config unreadable: {exc}", err=True)
        sys.exit(2)
    base_dir = Path(config_path).resolve().parent
    out = Path(out_dir or doc.get("output_dir", "lab_out"))
    try:
        manifest = run_config(doc, out, base_dir=base_dir,
                              seed_override=seed, jobs=jobs)
    except ConfigInvalid as exc:
        click.echo(f"ConfigInvalid: {exc}", err=True)
        for detail in getattr(exc, "errors", []):
            click.echo(f"  - {detail}", err=True)
        sys.exit(2)
    except LabError as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        sys.exit(2)
    for entry in manifest["suites"]:
        status = "pass" if entry["passed"] else "FAIL"
        click.echo(f"[{status}] {entry['index']:03d} {entry['suite']} "
                   f"({entry['runtime_s']:.2f}s)")
    click.echo(f"manifest: {out / 'manifest.json'}")
    sys.exit(0 if manifest["all_passed"] else 1)


@main.command()
@click.argument("report_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory (default: alongside the report)")
def plot(report_path, out_dir):
    """Emit plot-ready CSV series and render figures for REPORT_PATH."""
    path = Path(report_path)
    out = Path(out_dir) if out_dir else path.parent
    try:
        rows = emit_plot_data(path)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = write_series_csv(rows, out / f"{path.stem}_series.csv")
        figures = render_figures(path, out, path.stem)
    except ReportMissing as exc:
        click.echo(f"ReportMissing: {exc}", err=True)
        sys.exit(2)
    click.echo(f"series: {csv_path} ({len(rows)} rows)")
    for fig in figures:
        click.echo(f"figure: {fig}")
    sys.exit(0)


if __name__ == "__main__":
    main()
