"""Headless matplotlib rendering of report figures.

Every renderer writes a PNG next to the delimited report it illustrates
and returns the path.  The Agg backend is forced so commands work without
a display.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_EDGE_STYLE = {
    "aa": {"color": "green", "linestyle": "dashdot"},
    "bb": {"color": "orange", "linestyle": "dashed"},
    "ab": {"color": "black", "linestyle": "solid"},
}


def render_graph(graph, path):
    """Interaction graph on a circle: a-sites green, b-sites orange."""
    labels = graph.vertex_labels
    count = len(labels)
    angles = 2 * np.pi * np.arange(count) / count + np.pi / 2
    pos = {lab: (np.cos(t), np.sin(t)) for lab, t in zip(labels, angles)}
    fig, ax = plt.subplots(figsize=(5, 5))
    for kind, i, j in graph.edges:
        u = f"a{i + 1}" if kind[0] == "a" else f"b{i + 1}"
        v = f"b{j + 1}" if kind[1] == "b" else f"a{j + 1}"
        (x0, y0), (x1, y1) = pos[u], pos[v]
        ax.plot([x0, x1], [y0, y1], linewidth=1.2, zorder=1, **_EDGE_STYLE[kind])
    for lab in labels:
        x, y = pos[lab]
        color = "green" if lab.startswith("a") else "orange"
        ax.scatter([x], [y], s=500, c=color, zorder=2, edgecolors="black")
        ax.annotate(lab, (x, y), ha="center", va="center", zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(f"interactions: {graph.n}+{graph.m} sites, {len(graph.edges)} edges")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_spectrum(energies, sectors, path):
    """Level diagram: one column per Sz sector, a tick per eigenvalue."""
    energies = np.asarray(energies, dtype=float)
    sectors = np.asarray(sectors, dtype=float)
    order = np.unique(sectors)[::-1]
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(order)), 4.5))
    for col, sz in enumerate(order):
        for e in energies[sectors == sz]:
            ax.hlines(e, col - 0.35, col + 0.35, color="tab:blue", linewidth=1.0)
    ax.set_xticks(range(len(order)))
    ax.set_xticklabels([f"{sz:g}" for sz in order])
    ax.set_xlabel("total Sz sector")
    ax.set_ylabel("energy")
    ax.set_title("spectrum by sector")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_roots(root_sets, eta, path):
    """Rapidities in the complex plane, one marker set per sector size."""
    fig, ax = plt.subplots(figsize=(5, 4.5))
    seen = set()
    for rs in root_sets:
        if rs.n_roots == 0:
            continue
        label = f"N={rs.n_roots}" if rs.n_roots not in seen else None
        seen.add(rs.n_roots)
        ax.scatter(rs.roots.real, rs.roots.imag, s=40, label=label)
        sing = rs.roots[rs.singular]
        if len(sing):
            ax.scatter(sing.real, sing.imag, s=120, marker="x", c="red", zorder=3)
    ax.axhline(0.0, color="gray", linewidth=0.5)
    ax.axvline(0.0, color="gray", linewidth=0.5)
    ax.set_xlabel("Re v")
    ax.set_ylabel("Im v")
    ax.set_title(f"Bethe rapidities (eta = {eta:g}; x = singular)")
    if seen:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
