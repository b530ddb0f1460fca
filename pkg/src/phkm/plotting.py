"""Static SVG figures: diagrams, curves and k-means cost traces."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

POINTS_GID = "diagram-points"
TRACE_GID = "cost-trace"


def _save(fig, path):
    try:
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)


def plot_diagram(diagrams, path, title: str | None = None) -> None:
    """Birth/death scatter of one or more diagrams above the diagonal."""
    diagrams = list(diagrams) if isinstance(diagrams, (list, tuple)) else [diagrams]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    pts = [D.points for D in diagrams if len(D)]
    hi = max((p.max() for p in pts), default=1.0)
    lo = min((p.min() for p in pts), default=0.0)
    pad = 0.05 * (hi - lo or 1.0)
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="0.5", lw=1, gid="diagonal")
    for D in diagrams:
        if len(D):
            ax.plot(D.births, D.deaths, "o", ms=4, alpha=0.8, label=f"H{D.dimension}",
                    gid=f"{POINTS_GID}-{D.dimension}")
    ax.set_xlim(lo - pad, hi + pad)
    ax.set_ylim(lo - pad, hi + pad)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    if any(len(D) for D in diagrams):
        ax.legend(loc="lower right")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_curve(vector, path, title: str | None = None) -> None:
    """Betti curve or landscape layers sampled on their grid."""
    g = vector.grid
    t = np.linspace(g["t_min"], g["t_max"], g["G"])
    layers = np.asarray(vector.values).reshape(-1, g["G"])
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for k, row in enumerate(layers):
        label = f"layer {k + 1}" if vector.kind == "landscape" else None
        ax.plot(t, row, lw=1.2, label=label, gid=f"curve-{k}")
    ax.set_xlabel("scale")
    ax.set_ylabel("Betti number" if vector.kind == "betti" else "landscape value")
    if vector.kind == "landscape":
        ax.legend(loc="upper right", fontsize="small")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_cost_trace(trace, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(np.arange(len(trace)), trace, "-o", ms=3, gid=TRACE_GID)
    ax.set_xlabel("iteration")
    ax.set_ylabel("within-cluster cost")
    if title:
        ax.set_title(title)
    _save(fig, path)
