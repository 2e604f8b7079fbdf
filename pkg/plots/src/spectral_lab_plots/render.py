"""Render spectral-lab CSV artifacts into figures.

Three plot kinds, one per artifact schema:

  loglog   rates.csv    per-scenario median points with quartile bars on
                        log-log axes, plus dashed reference lines N^s
  raster   raster.csv   boolean window-membership raster, optionally
                        overlaid with spectrum.csv eigenvalue markers
  scatter  spectrum.csv cumulative eigenvalue scatter, optionally with
                        predicted limit points from summary.json

The CSV layer is the only contract with the producer; schema mismatches
fail loudly with the missing column named.  Output bytes are reproducible
for identical inputs (figure metadata carries no timestamps).

Usage:
  render --kind loglog --in rates.csv --ref -0.5 --ref -0.1667 --out fig1.svg
  render --kind raster --in raster.csv --spectrum spectrum.csv --out fig0.png
  render --kind scatter --in spectrum.csv --summary summary.json --out fig5.svg
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "spectral-lab-plots"  # deterministic ids
import matplotlib.pyplot as plt
import numpy as np


class SchemaMismatchError(ValueError):
    def __init__(self, path, column):
        super().__init__(f"{path}: missing required column '{column}'")
        self.column = column


class EmptyInputError(ValueError):
    def __init__(self, path):
        super().__init__(f"{path}: no data rows")


PLOT_KINDS = ("loglog", "raster", "scatter")

REQUIRED = {
    "loglog": ("scenario", "N", "trial", "seed", "statistic", "value"),
    "raster": ("scenario", "N", "x", "y", "inside"),
    "scatter": ("scenario", "N", "trial", "seed", "re", "im"),
}


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    source: Path
    out: Path
    ref_slopes: tuple[float, ...] = ()
    spectrum: Path | None = None   # raster overlay
    summary: Path | None = None    # scatter markers

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown plot kind '{self.kind}'")


def read_rows(path: Path, kind: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in REQUIRED[kind]:
            if col not in header:
                raise SchemaMismatchError(path, col)
        rows = list(reader)
    if not rows:
        raise EmptyInputError(path)
    return rows


def _save(fig, out: Path) -> None:
    out = Path(out)
    metadata = {"Date": None} if out.suffix.lower() == ".svg" else None
    fig.savefig(out, metadata=metadata)
    plt.close(fig)


def render_loglog(spec: PlotSpec):
    rows = read_rows(spec.source, "loglog")
    series: dict[tuple[str, str], dict[int, list[float]]] = {}
    for r in rows:
        v = float(r["value"])
        if v <= 0:
            continue
        key = (r["scenario"], r["statistic"])
        series.setdefault(key, {}).setdefault(int(r["N"]), []).append(v)
    if not series:
        raise EmptyInputError(spec.source)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    all_pts = []
    for (scenario, statistic), by_n in sorted(series.items()):
        ns = sorted(by_n)
        med = [float(np.median(by_n[n])) for n in ns]
        lo = [m - float(np.quantile(by_n[n], 0.25)) for n, m in zip(ns, med)]
        hi = [float(np.quantile(by_n[n], 0.75)) - m for n, m in zip(ns, med)]
        label = scenario if len(series) > 1 else f"{scenario} ({statistic})"
        ax.errorbar(ns, med, yerr=[lo, hi], marker="o", capsize=3, label=label)
        all_pts += [(n, m) for n, m in zip(ns, med)]
    for s in spec.ref_slopes:
        # anchor each reference line through the center of the data cloud
        anchor = float(np.median([np.log(v) - s * np.log(n) for n, v in all_pts]))
        ns = sorted({n for n, _ in all_pts})
        ax.plot(ns, [np.exp(anchor) * n**s for n in ns], "k--", linewidth=1,
                label=f"N^{s:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("statistic")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    _save(fig, spec.out)


def render_raster(spec: PlotSpec):
    rows = read_rows(spec.source, "raster")
    xs = sorted({float(r["x"]) for r in rows})
    ys = sorted({float(r["y"]) for r in rows})
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    grid = np.zeros((len(ys), len(xs)))
    for r in rows:
        grid[yi[float(r["y"])], xi[float(r["x"])]] = float(r["inside"])

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.pcolormesh(xs, ys, grid, cmap="Blues", shading="nearest", vmin=-0.3, vmax=1.0)
    if spec.spectrum is not None:
        overlay = read_rows(spec.spectrum, "scatter")
        ax.plot([float(r["re"]) for r in overlay], [float(r["im"]) for r in overlay],
                "rx", markersize=4, label="spectrum")
        ax.legend(fontsize=8)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    _save(fig, spec.out)


def render_scatter(spec: PlotSpec):
    rows = read_rows(spec.source, "scatter")
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.plot([float(r["re"]) for r in rows], [float(r["im"]) for r in rows],
            "rx", markersize=4, label="eigenvalues")
    if spec.summary is not None:
        summary = json.loads(Path(spec.summary).read_text())
        preds = summary.get("predictions") or []
        if preds:
            ax.plot([p["z0_re"] for p in preds], [p["z0_im"] for p in preds],
                    "g*", markersize=12, label="predicted limit points")
    ax.axhline(0.0, color="k", linewidth=0.5, alpha=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(fontsize=8)
    _save(fig, spec.out)


RENDERERS = {
    "loglog": render_loglog,
    "raster": render_raster,
    "scatter": render_scatter,
}


def render(spec: PlotSpec) -> Path:
    RENDERERS[spec.kind](spec)
    return Path(spec.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="render",
                                 description="render spectral-lab CSV artifacts")
    ap.add_argument("--kind", required=True, choices=PLOT_KINDS)
    ap.add_argument("--in", dest="source", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--ref", dest="refs", action="append", type=float, default=[],
                    help="reference slope for loglog plots (repeatable)")
    ap.add_argument("--spectrum", default=None, help="overlay CSV for rasters")
    ap.add_argument("--summary", default=None, help="summary.json for scatter markers")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        kind=args.kind,
        source=Path(args.source),
        out=Path(args.out),
        ref_slopes=tuple(args.refs),
        spectrum=Path(args.spectrum) if args.spectrum else None,
        summary=Path(args.summary) if args.summary else None,
    )
    try:
        out = render(spec)
    except (SchemaMismatchError, EmptyInputError, FileNotFoundError) as exc:
        print(f"render: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
