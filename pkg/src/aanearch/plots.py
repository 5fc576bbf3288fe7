"""Static SVG figures. Output is byte-stable: no timestamps, fixed hash salt."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "aanearch", "svg.fonttype": "path", "font.family": "DejaVu Sans"}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def silhouette_chart(report, path):
    """Week-averaged silhouette against K, one line per method."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        tab = report.table
        for m in report.methods:
            ax.plot(report.k_values, [tab[(k, m)] for k in report.k_values], marker="o", label=m)
        ax.set_xlabel("number of clusters K")
        ax.set_ylabel("mean silhouette")
        ax.set_xticks(report.k_values)
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def significance_heatmap(report, timesteps, path):
    """Feature x timestep grid of Kruskal-Wallis -log10(p); hatched cells are non-significant."""
    features = list(dict.fromkeys(r[1] for r in report.omnibus))
    grid = np.full((len(features), len(timesteps)), np.nan)
    col = {t: j for j, t in enumerate(timesteps)}
    for t, f, _, _, p, _ in report.omnibus:
        grid[features.index(f), col[t]] = -np.log10(max(p, 1e-300))
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(1.5 + 0.35 * len(timesteps), 1.2 + 0.35 * len(features)))
        im = ax.imshow(np.minimum(grid, 20), aspect="auto", cmap="viridis", vmin=0, vmax=20)
        for t, f, _, _, p, sig in report.omnibus:
            if not sig:
                ax.text(col[t], features.index(f), "x", ha="center", va="center", color="white")
        ax.set_yticks(range(len(features)), features)
        ax.set_xticks(range(len(timesteps)), [str(t) for t in timesteps])
        ax.set_xlabel("timestep")
        fig.colorbar(im, ax=ax, label="-log10 p (capped at 20)")
        fig.tight_layout()
        return _save(fig, path)


def archetype_timeline(table, path):
    """Aligned cluster label over time for each retained archetype."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for a in table.archetypes:
            jitter = 0.08 * (a.archetype_id % 5 - 2)
            ax.step(range(len(a.signature)), np.array(a.signature) + jitter, where="mid",
                    label=f"archetype {a.archetype_id} (n={a.size})")
        ax.set_xlabel("timestep")
        ax.set_ylabel("aligned cluster label")
        if table.archetypes:
            ax.legend(fontsize="small")
        fig.tight_layout()
        return _save(fig, path)


def projection_scatter(coords, labels, path, title=""):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 4))
        ax.scatter(coords[:, 0], coords[:, 1], c=labels, cmap="tab10", s=12, vmin=0, vmax=9)
        ax.set_xlabel("principal axis 1")
        ax.set_ylabel("principal axis 2")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)
