"""Delimited output, gnuplot scripts and matplotlib renderings of result tables."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

__all__ = ["format_number", "csv_text", "write_text", "gnuplot_script", "render_png", "json_text"]


def format_number(x) -> str:
    """Scientific notation with 12 significant digits; nan for gaps."""
    x = float(x)
    if not np.isfinite(x):
        return "nan"
    return f"{x:.11e}"


def csv_text(header: list[str], columns: list) -> str:
    cols = [np.asarray(c, dtype=float) for c in columns]
    n = {c.size for c in cols}
    if len(n) != 1 or len(header) != len(cols):
        raise ValueError("header and columns must line up")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*cols):
        w.writerow([format_number(v) for v in row])
    return buf.getvalue()


def json_text(payload) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, complex):
            return {"re": o.real, "im": o.imag}
        raise TypeError(f"not serializable: {type(o).__name__}")

    return json.dumps(payload, indent=2, sort_keys=True, default=default) + "\n"


def write_text(text: str, path: str | Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def gnuplot_script(csv_name: str, header: list[str], title: str, logx: bool = False,
                   logy: bool = False, y_columns: list[int] | None = None) -> str:
    ys = y_columns or list(range(2, len(header) + 1))
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{header[0]}'",
    ]
    if logx:
        lines.append("set logscale x")
    if logy:
        lines.append("set logscale y")
    plots = [f"'{csv_name}' using 1:{k} with lines" for k in ys]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def render_png(path: str | Path, header: list[str], columns: list, title: str,
               logx: bool = False, logy: bool = False, ylabel: str = "",
               dashed: tuple[str, ...] = ()) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    x = np.asarray(columns[0], dtype=float)
    for name, col in zip(header[1:], columns[1:]):
        ax.plot(x, col, "--" if name in dashed else "-", label=name, lw=1.4)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(header[0])
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
