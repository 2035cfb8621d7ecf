"""Matplotlib figure rendering for the CLI report paths."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .coding import Excursion
from .trees import MarkedTree


def _layout(tree: MarkedTree, x0: float, base: float, segs: list) -> tuple[float, float]:
    """Append ((x, y0), (x, y1)) edge segments and horizontal connectors;
    return (subtree width, x of this node's edge)."""
    top = base + tree.length
    if not tree.children:
        segs.append(((x0 + 0.5, base), (x0 + 0.5, top)))
        return 1.0, x0 + 0.5
    w = 0.0
    centers = []
    for c in tree.children:
        cw, cx = _layout(c, x0 + w, top, segs)
        centers.append(cx)
        w += cw
    x_here = (min(centers) + max(centers)) / 2.0
    segs.append(((min(centers), top), (max(centers), top)))
    segs.append(((x_here, base), (x_here, top)))
    return w, x_here


def plot_tree(tree: MarkedTree, path: str, title: str = "") -> None:
    segs: list = []
    _layout(tree, 0.0, 0.0, segs)
    fig, ax = plt.subplots(figsize=(6, 4))
    for (xa, ya), (xb, yb) in segs:
        ax.plot([xa, xb], [ya, yb], color="tab:blue", lw=1.5)
    ax.set_ylabel("level")
    ax.set_xticks([])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_excursion(g: Excursion, path: str, title: str = "") -> None:
    xs = [s for s, _ in g.breakpoints]
    ys = [v for _, v in g.breakpoints]
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(xs, ys, color="tab:green", lw=1.2)
    ax.set_xlabel("s")
    ax.set_ylabel("g(s)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_curve(xs, ys, path: str, xlabel: str, ylabel: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, marker="o", ms=3, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_reports(reports, significance: float, path: str) -> None:
    names = [r.name for r in reports]
    # p-values and bound margins share a log axis, floored for display
    vals = [max(r.p_value, 1e-12) for r in reports]
    colors = ["tab:green" if r.passed else "tab:red" for r in reports]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(range(len(names)), vals, color=colors)
    ax.axhline(significance, color="black", ls="--", lw=1, label="significance")
    ax.set_yscale("log")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("p-value / margin")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
