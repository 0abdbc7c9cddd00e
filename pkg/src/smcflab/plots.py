"""SVG line plots of a TimeSeries, with the decay and growth envelopes overlaid."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .flow import TimeSeries  # noqa: E402

__all__ = ["plot_series", "ascii_summary"]

_SVG_META = {"Date": None, "Creator": None}


def _save(fig, path):
    # fixed id salt and no date, so identical data gives identical bytes
    with matplotlib.rc_context({"svg.hashsalt": "smcflab"}):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_series(ts: TimeSeries, outdir, report: dict | None = None, prefix="series") -> list[Path]:
    """One SVG per column (``t`` excluded); returns the written paths in column order.

    ``report`` is a monitors report; when given, the sin^2(alpha/2) plot
    carries ``initial * exp(-c t)`` with the report's 3k and 6k rates and the
    |H|^2 plot carries ``C0 exp(9k t / 4)``.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = ts.column("t")
    paths = []
    for col in ts.columns:
        if col == "t":
            continue
        y = ts.column(col)
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(t, y, lw=1.4, label=col)
        if report and col == "max_sin2_half":
            for key, style in (("b_decay_3k", "--"), ("b_decay_6k", ":")):
                c = report[key]["c"]
                ax.plot(t, y[0] * np.exp(-c * t), style, lw=1, label=f"initial e^(-{c:.3g} t)")
        if report and col == "max_H2":
            C0 = report["c_growth"]["C0"]
            ax.plot(t, C0 * np.exp(2.25 * report["k"] * t), "--", lw=1, label=f"{C0:.3g} e^(9k t/4)")
        if col.startswith("res_"):
            pos = y[y > 0]
            if pos.size and pos.max() / pos.min() > 100:
                ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_title(col)
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = outdir / f"{prefix}_{col}.svg"
        _save(fig, path)
        paths.append(path)
    return paths


def ascii_summary(ts: TimeSeries) -> str:
    """First, last, min and max of every column as a fixed-width table."""
    lines = [f"{'column':<16}{'first':>14}{'last':>14}{'min':>14}{'max':>14}"]
    for col in ts.columns:
        y = ts.column(col)
        lines.append(f"{col:<16}{y[0]:>14.6g}{y[-1]:>14.6g}{y.min():>14.6g}{y.max():>14.6g}")
    return "\n".join(lines)
