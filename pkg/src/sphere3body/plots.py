"""Figure rendering for sweep diagrams and parameter-triangle charts.

Used by the command-line report paths: every figure is written straight
to a file next to the delimited data, no interactive backend required.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_VERDICT_STYLE = {
    "stable": dict(color="tab:green", ls="-", lw=1.8),
    "unstable": dict(color="tab:red", ls="--", lw=1.0),
    "marginal": dict(color="tab:orange", ls=":", lw=1.2),
}


def plot_sweep(result, path) -> None:
    """Branch separations against angular momentum, colored by verdict."""
    fig, (ax, ax2) = plt.subplots(
        2, 1, figsize=(8.0, 7.0), sharex=True,
        gridspec_kw={"height_ratios": [4, 1]})
    labeled = set()
    for br in result.branches:
        if not br.samples or br.clazz.mirror:
            continue
        h = np.array([s.H for s in br.samples])
        q = np.array([s.q for s in br.samples])
        verdicts = [s.verdict for s in br.samples]
        # split into runs of constant verdict so the styling tracks it
        start = 0
        for n in range(1, len(h) + 1):
            if n == len(h) or verdicts[n] != verdicts[start]:
                style = _VERDICT_STYLE.get(verdicts[start],
                                           dict(color="gray", ls="-"))
                lbl = None
                if br.clazz.tag not in labeled:
                    lbl = br.clazz.tag
                    labeled.add(br.clazz.tag)
                ax.plot(h[start:n], q[start:n], label=lbl, **style)
                start = n
        mid = len(h) // 2
        ax.annotate(br.family_id.rstrip("+"), (h[mid], q[mid]),
                    fontsize=7, alpha=0.8)
    for ev in result.event_list():
        ax.axvline(ev.H, color="k", lw=0.4, alpha=0.25)
    ax.set_yscale("log")
    ax.set_ylabel("family separation q")
    ax.set_title("equilibrium branches over angular momentum"
                 " (green stable / red unstable)")
    ax2.step(result.H_grid, result.stable_counts, where="mid", color="k")
    ax2.set_xscale("log")
    ax2.set_xlabel("angular momentum H")
    ax2.set_ylabel("stable count")
    ax2.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_region(chart, path) -> None:
    """Sign map of a chart over the mass triangle with its zero line."""
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    mm1, mm3 = np.meshgrid(chart.m1, chart.m3)
    masked = np.ma.masked_invalid(chart.field)
    lim = np.nanmax(np.abs(chart.field)) if np.isfinite(chart.field).any() else 1.0
    pcm = ax.pcolormesh(mm1, mm3, masked, cmap="RdBu", vmin=-lim, vmax=lim,
                        shading="auto")
    fig.colorbar(pcm, ax=ax, label="chart value")
    for line in chart.polylines:
        ax.plot(line[:, 0], line[:, 1], "k-", lw=1.5)
    ax.plot([1 / 3, 1, 1 / 3, 1 / 3], [1 / 3, 0, 0, 1 / 3], color="gray",
            lw=0.8)
    ax.set_xlabel("m1")
    ax.set_ylabel("m3")
    ax.set_title(chart.chart_id)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
