"""Static SVG figures for the report.

Figures are written with a fixed hash salt and no timestamp, so equal
inputs give byte-identical files.
"""

from __future__ import annotations

from contextlib import contextmanager

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "svg.hashsalt": "peakdemand",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (5.5, 3.6),
}


@contextmanager
def _figure():
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            yield fig, ax
        finally:
            plt.close(fig)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def monthly_profile(rows, division, path):
    """Mean demand per calendar month (bars) with mean apparent temperature."""
    months = [r[0] for r in rows]
    with _figure() as (fig, ax):
        ax.bar(months, [r[1] for r in rows], color="#8fb3d9", label="demand")
        ax.set_xlabel("month")
        ax.set_ylabel("mean daily demand (MW)")
        ax.set_xticks(range(1, 13))
        ax2 = ax.twinx()
        ax2.plot(months, [r[2] for r in rows], color="k", marker="o", ms=3)
        ax2.set_ylabel("mean apparent temperature (°C)")
        ax2.spines["right"].set_visible(True)
        ax.set_title(division)
        _save(fig, path)


def anomaly_scatter(points, curve, regression, division, path):
    years = sorted({p.year for p in points})
    cmap = plt.get_cmap("viridis", max(len(years), 2))
    with _figure() as (fig, ax):
        for i, year in enumerate(years):
            pts = [p for p in points if p.year == year]
            ax.scatter([p.at for p in pts], [p.anomaly for p in pts], s=4, color=cmap(i), label=str(year))
        ax.plot(curve[:, 0], curve[:, 1], color="k", lw=1.5, label="LOESS")
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_xlabel("apparent temperature (°C)")
        ax.set_ylabel("demand anomaly (MW)")
        ax.set_title(f"{division}: slope {regression.slope:.2f} MW/°C")
        ax.legend(fontsize=6, markerscale=2, ncol=2, frameon=False)
        _save(fig, path)


def qq_plot(pairs, division, path, residual=False):
    pairs = np.asarray(pairs)
    with _figure() as (fig, ax):
        ax.scatter(pairs[:, 1], pairs[:, 0], s=8, color="#1f4e79")
        lo = float(min(pairs.min(), 0.0 if residual else pairs.min()))
        hi = float(pairs.max())
        ax.plot([lo, hi], [lo, hi], color="0.4", lw=0.8)
        if residual:
            ax.set_xlabel("standard Gumbel quantile")
            ax.set_ylabel("residual quantile")
        else:
            ax.set_xlabel("model quantile")
            ax.set_ylabel("empirical block maximum")
        ax.set_title(division)
        _save(fig, path)
