"""CSV and SVG report emission.

CSV files use a fixed column order, LF line endings, ``.`` as decimal point
and 17 significant digits for floats, so identical inputs give identical
bytes.  SVG plots decorate the same data and are never read back.

Column schemas (version 1)
--------------------------
identities.csv      N, mu, p, kind, value, error, tolerance, passed
profile.csv         x1, x2, V, density
solve-history.csv   iteration, residual, damping, krylov_iterations
solve-maxima.csv    :attr:`BlowupDiagnostics.COLUMNS`
family-summary.csv  member, delta, mu, iterations, residual, tol, mass, harnack_deficit,
                    boundary_oscillation, n_maxima, simple
family-member-K.csv :attr:`BlowupDiagnostics.COLUMNS`
trend.csv           :attr:`TrendReport.COLUMNS`
pohozaev.csv        :attr:`PohozaevReport.COLUMNS`
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SCHEMA_VERSION", "Table", "Plot", "format_value", "write_report"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Table:
    """Rows for one CSV file named ``<command>[-<tag>].csv``."""

    command: str
    columns: tuple
    rows: list
    tag: str = ""

    @property
    def name(self) -> str:
        return f"{self.command}-{self.tag}" if self.tag else self.command

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"{self.name}: row of length {len(r)} for {len(self.columns)} columns")


@dataclass(frozen=True)
class Plot:
    """Line plot ``<command>[-<tag>].svg`` of ``(label, x, y)`` series."""

    command: str
    series: list
    tag: str = ""
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return f"{self.command}-{self.tag}" if self.tag else self.command


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    s = str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _csv(table: Table) -> str:
    lines = [",".join(table.columns)]
    lines.extend(",".join(format_value(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _svg(plot: Plot, width: int = 640, height: int = 400) -> str:
    pad = 50
    xs = np.concatenate([np.asarray(s[1], float) for s in plot.series])
    ys = np.concatenate([np.asarray(s[2], float) for s in plot.series])
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = (xs[ok].min(), xs[ok].max()) if ok.any() else (0.0, 1.0)
    y0, y1 = (ys[ok].min(), ys[ok].max()) if ok.any() else (0.0, 1.0)
    x1, y1 = (x1 if x1 > x0 else x0 + 1), (y1 if y1 > y0 else y0 + 1)

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
           'fill="none" stroke="#444"/>']
    for k, (label, x, y) in enumerate(plot.series):
        x, y = np.asarray(x, float), np.asarray(y, float)
        good = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[good], y[good]))
        color = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{width - pad - 4}" y="{pad + 16 * (k + 1)}" text-anchor="end" '
                   f'fill="{color}" font-size="12">{label}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">'
               f'{plot.xlabel}  [{x0:.4g}, {x1:.4g}]</text>')
    out.append(f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})" '
               f'text-anchor="middle">{plot.ylabel}  [{y0:.4g}, {y1:.4g}]</text>')
    if plot.title:
        out.append(f'<text x="{width / 2}" y="24" text-anchor="middle" font-size="14">{plot.title}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_report(reports, directory) -> list[str]:
    """Write tables (and plots) into ``directory``; returns the written paths in order."""
    reports = list(reports)
    if not reports:
        return []
    os.makedirs(directory, exist_ok=True)
    written = []
    for rep in reports:
        if isinstance(rep, Table):
            path, text = os.path.join(directory, rep.name + ".csv"), _csv(rep)
        elif isinstance(rep, Plot):
            path, text = os.path.join(directory, rep.name + ".svg"), _svg(rep)
        else:
            raise TypeError(f"cannot write {type(rep).__name__}")
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"could not write {path}: {exc.strerror or exc}") from exc
        written.append(path)
    return written
