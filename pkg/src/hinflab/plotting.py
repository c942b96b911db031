"""Plot-ready data extraction and figure rendering for suite reports."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ReportMissing  # noqa: E402


def load_report(report) -> dict:
    if isinstance(report, dict):
        return report
    path = Path(report)
    if not path.exists():
        raise ReportMissing(f"report {path} does not exist")
    with open(path) as fh:
        return json.load(fh)


def emit_plot_data(report) -> list[tuple]:
    """Long-format (series, x, y) rows from a suite report."""
    doc = load_report(report)
    return [(row["series"], float(row["x"]), float(row["y"]))
            for row in doc.get("plot_series", [])]


def write_series_csv(rows, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write("series,x,y\n")
        for series, x, y in rows:
            fh.write(f"{series},{x:.12g},{y:.12g}\n")
    return path


def render_figures(report, out_dir, stem: str) -> list[Path]:
    """One PNG per series plus a check-margin overview figure."""
    doc = load_report(report)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    by_series: dict[str, list] = {}
    for row in doc.get("plot_series", []):
        by_series.setdefault(row["series"], []).append((row["x"], row["y"]))
    for series, pts in by_series.items():
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        if min(xs) > 0 and max(xs) / max(min(xs), 1e-300) > 30:
            ax.set_xscale("log")
        if min(ys) > 0 and max(ys) / max(min(ys), 1e-300) > 100:
            ax.set_yscale("log")
        ax.plot(xs, ys, marker="o", lw=1.2)
        ax.set_xlabel("x")
        ax.set_ylabel(series)
        ax.set_title(f"{doc.get('suite', 'report')}: {series}")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out_dir / f"{stem}.{series}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    checks = doc.get("checks", [])
    if checks:
        fig, ax = plt.subplots(figsize=(6.0, 0.6 + 0.35 * len(checks)))
        labels = [c["check_id"] for c in checks]
        lhs = [c["lhs"] for c in checks]
        rhs = [c["rhs"] + c["margin"] for c in checks]
        ypos = range(len(checks))
        ax.barh(ypos, rhs, color="#cccccc", label="bound + margin")
        ax.barh(ypos, lhs, height=0.45,
                color=["#2a7e3b" if c["passed"] else "#b03030" for c in checks],
                label="measured")
        ax.set_yticks(list(ypos), labels=labels, fontsize=8)
        ax.set_title(f"{doc.get('suite', 'report')}: checks")
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = out_dir / f"{stem}.checks.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
