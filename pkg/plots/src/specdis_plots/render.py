"""Render figure analogues from simulator CSV artifacts.

Strictly read-only over the CSVs: the physics lives in the files, this
module only draws them.  The '#' comment lines (parameters, verdicts,
horizons) are embedded verbatim as a small annotation block so every
image documents the run that produced it.

One figure per invocation:

    specdis-plot --kind decay-curves --input example3.csv --out fig.svg
    specdis-plot --kind phase-diagram --input phase_diagram.csv --out fig.png
    specdis-plot --kind occupation-heatmap --input heatmap.csv --out fig.svg
    specdis-plot --kind example4-panel --input example4.csv --out fig.svg
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

# keep annotation text as text in SVG output so the parameters stay greppable
plt.rcParams["svg.fonttype"] = "none"

KINDS = ("decay-curves", "phase-diagram", "occupation-heatmap", "example4-panel")


@dataclass(frozen=True)
class FigureJob:
    kind: str
    inputs: tuple[Path, ...]
    output: Path
    columns: tuple[str, ...] | None = None
    title: str | None = None


@dataclass(frozen=True)
class Table:
    path: Path
    comments: tuple[str, ...]
    header: tuple[str, ...]
    data: np.ndarray

    def column(self, name: str) -> np.ndarray:
        if name not in self.header:
            raise ValueError(f"{self.path}: no column {name!r} (have {', '.join(self.header)})")
        return self.data[:, self.header.index(name)]


def load_table(path) -> Table:
    path = Path(path)
    if not path.exists():
        raise ValueError(f"input CSV not found: {path}")
    comments: list[str] = []
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line.lstrip("# "))
            elif header is None:
                header = [h.strip() for h in line.split(",")]
            else:
                try:
                    rows.append([float(x) for x in line.split(",")])
                except ValueError as exc:
                    raise ValueError(f"{path}:{line_no}: non-numeric data row") from exc
    if header is None:
        raise ValueError(f"{path}: no header line")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: row width differs from header width")
    return Table(path=path, comments=tuple(comments), header=tuple(header), data=data)


def _pivot(x: np.ndarray, y: np.ndarray, z: np.ndarray):
    xs = np.unique(x)
    ys = np.unique(y)
    if xs.size * ys.size != z.size:
        raise ValueError("grid rows do not form a complete rectangle")
    order = np.lexsort((y, x))
    return xs, ys, z[order].reshape(xs.size, ys.size)


def _annotate(fig, tables) -> None:
    lines = []
    for table in tables:
        lines.extend(c for c in table.comments if not c.startswith("generated"))
    if lines:
        fig.text(
            0.01,
            0.01,
            "\n".join(lines),
            fontsize=5,
            family="monospace",
            va="bottom",
            ha="left",
            alpha=0.8,
        )


def _draw_decay_curves(ax, tables, columns):
    for table in tables:
        t = table.column("t")
        names = columns or [name for name in table.header if name != "t"]
        for name in names:
            label = name if len(tables) == 1 else f"{table.path.stem}:{name}"
            ax.plot(t, table.column(name), label=label, lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("occupation")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7)


def _draw_phase_diagram(ax, table):
    mu, c, decays = table.column("mu_B"), table.column("C_B"), table.column("decays")
    mus, cs, grid = _pivot(mu, c, decays)
    mesh = ax.pcolormesh(
        mus,
        cs,
        grid.T,
        cmap=matplotlib.colors.ListedColormap(["#b5651d", "#2e8b57"]),
        vmin=0.0,
        vmax=1.0,
        shading="nearest",
        rasterized=True,
    )
    bar = ax.figure.colorbar(mesh, ax=ax, ticks=[0.25, 0.75])
    bar.ax.set_yticklabels(["trapped", "decays"], fontsize=7)
    ax.set_xlabel("mu/B")
    ax.set_ylabel("C/B")


def _draw_heatmap(ax, table):
    t, j, n = table.column("t"), table.column("j"), table.column("n")
    ts, js, grid = _pivot(t, j, n)
    image = ax.imshow(
        grid.T,
        origin="lower",
        aspect="auto",
        extent=(ts[0], ts[-1], js[0], js[-1]),
        cmap="magma",
    )
    ax.figure.colorbar(image, ax=ax, label="occupation")
    ax.set_xlabel("t")
    ax.set_ylabel("site j")


def _draw_example4_panel(ax, table):
    t = table.column("t")
    level_columns = [name for name in table.header if name.startswith("occ_")]
    if not level_columns:
        raise ValueError(f"{table.path}: no occ_* columns for the level panel")
    for name in level_columns:
        ax.plot(t, table.column(name), label=name.removeprefix("occ_"), lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("lowest-level occupation")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(fontsize=7)


def render(job: FigureJob) -> Path:
    """Draw one figure; returns the written path."""
    if job.kind not in KINDS:
        raise ValueError(f"unknown figure kind {job.kind!r}; have {', '.join(KINDS)}")
    tables = [load_table(p) for p in job.inputs]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    try:
        if job.kind == "decay-curves":
            _draw_decay_curves(ax, tables, job.columns)
        elif job.kind == "phase-diagram":
            (table,) = tables
            _draw_phase_diagram(ax, table)
        elif job.kind == "occupation-heatmap":
            (table,) = tables
            _draw_heatmap(ax, table)
        else:
            (table,) = tables
            _draw_example4_panel(ax, table)
        ax.set_title(job.title or job.kind, fontsize=10)
        fig.subplots_adjust(bottom=0.28)
        _annotate(fig, tables)
        job.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(job.output, dpi=150)
    finally:
        plt.close(fig)
    return job.output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="specdis-plot", description="Render one figure from specdis CSV output"
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--input", action="append", required=True, help="CSV path; repeatable")
    parser.add_argument("--out", required=True, help="image path (.png or .svg)")
    parser.add_argument("--columns", default=None, help="comma list restricting the curves")
    parser.add_argument("--title", default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    job = FigureJob(
        kind=args.kind,
        inputs=tuple(Path(p) for p in args.input),
        output=Path(args.out),
        columns=tuple(args.columns.split(",")) if args.columns else None,
        title=args.title,
    )
    try:
        print(render(job))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
