"""CSV and SVG emission for refinement studies."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["CSV_COLUMNS", "emit_csv", "read_csv", "reference_line", "emit_svg"]

CSV_COLUMNS = (
    "dim", "family", "seed", "M", "h", "l2", "l2_rel", "h1semi",
    "h1h", "max", "ord_l2", "ord_h1h", "ord_max", "iters",
)
_INT_COLUMNS = {"dim", "seed", "M", "iters"}
_STR_COLUMNS = {"family"}
_SERIES = (("l2", "L2"), ("h1semi", "H1 seminorm"), ("h1h", "H1"), ("max", "max"))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer, str)):
        return str(value)
    return f"{float(value):.17g}"


def emit_csv(rows, path) -> None:
    if not rows:
        raise ValueError("nothing to write: no study rows")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])


def read_csv(path) -> list[dict]:
    """Parse a study CSV back into typed dicts (empty orders become ``None``)."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            parsed = {}
            for key, text in rec.items():
                if key in _STR_COLUMNS:
                    parsed[key] = text
                elif text == "":
                    parsed[key] = None
                elif key in _INT_COLUMNS:
                    parsed[key] = int(text)
                else:
                    parsed[key] = float(text)
            out.append(parsed)
    return out


def reference_line(rows, order: float, column: str = "h1h"):
    """Guide ``C h**order`` through the last row's ``column`` value."""
    h = np.array([r.h for r in rows])
    h_last = rows[-1].h
    e_last = getattr(rows[-1], column)
    return h, e_last * (h / h_last) ** order


def emit_svg(rows, path, title: str | None = None) -> None:
    """Log-log plot of every error norm against ``h`` with slope guides 1.5 and 2."""
    if not rows:
        raise ValueError("nothing to plot: no study rows")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "fvlab", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        h = [r.h for r in rows]
        for key, label in _SERIES:
            errs = [getattr(r, key) for r in rows]
            if len(rows) > 1:
                q = getattr(rows[-1], f"ord_{key}", None)
                if q is not None:
                    label = f"{label} (order {q:.2f})"
            ax.loglog(h, errs, marker="o", label=label)
        if len(rows) > 1:
            for order, style in ((1.5, ":"), (2.0, "--")):
                hs, guide = reference_line(rows, order)
                ax.loglog(hs, guide, color="gray", linestyle=style, label=f"h^{order:g}")
        ax.set_xlabel("h")
        ax.set_ylabel("error")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(Path(path), format="svg", metadata={"Date": None})
        plt.close(fig)
