"""Figure rendering for reports: confusion matrices, ablation curves, embeddings.

All functions write a file and close the figure; nothing is shown
interactively (the Agg backend is forced so these work headless).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_confusion(report, path) -> None:
    """Heatmap of the confusion matrix with count annotations."""
    n = len(report.categories)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * n + 2), max(3.5, 0.6 * n + 1.5)))
    im = ax.imshow(report.confusion, cmap="Blues")
    ax.set_xticks(range(n), report.categories, rotation=45, ha="right")
    ax.set_yticks(range(n), report.categories)
    ax.set_xlabel("predicted")
    ax.set_ylabel("ground truth")
    ax.set_title(f"oAcc {report.oacc:.1f}%  mAcc {report.macc:.1f}%  (n={report.n_samples})")
    if n <= 20:
        threshold = report.confusion.max() / 2 if report.confusion.max() else 0
        for i in range(n):
            for j in range(n):
                value = report.confusion[i, j]
                ax.text(
                    j, i, str(value), ha="center", va="center",
                    color="white" if value > threshold else "black", fontsize=8,
                )
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ablation(result, path) -> None:
    """Accuracy mean and spread as a function of the per-class anchor count."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    counts = result.anchor_counts
    ax.errorbar(counts, result.mean_oacc, yerr=result.std_oacc, marker="o",
                capsize=3, label="oAcc")
    ax.errorbar(counts, result.mean_macc, yerr=result.std_macc, marker="s",
                capsize=3, label="mAcc")
    ax.set_xlabel("anchors per class")
    ax.set_ylabel("accuracy (%)")
    ax.set_xticks(list(counts))
    ax.set_title(f"anchor-count ablation ({result.trials} trials, seed {result.seed})")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_embedding(embedding, path, anchor_mask=None) -> None:
    """2-D scatter colored by label; anchors drawn as triangles."""
    labels = list(dict.fromkeys(embedding.labels))
    cmap = plt.get_cmap("tab10")
    color_of = {label: cmap(i % 10) for i, label in enumerate(labels)}
    if anchor_mask is None:
        anchor_mask = np.zeros(len(embedding.coords), dtype=bool)
    anchor_mask = np.asarray(anchor_mask, dtype=bool)

    fig, ax = plt.subplots(figsize=(5.5, 5))
    for label in labels:
        mask = np.array([l == label for l in embedding.labels])
        for is_anchor, marker, size in ((False, "o", 18), (True, "^", 60)):
            pick = mask & (anchor_mask == is_anchor)
            if pick.any():
                ax.scatter(
                    embedding.coords[pick, 0], embedding.coords[pick, 1],
                    marker=marker, s=size, color=color_of[label],
                    label=label if not is_anchor or not (mask & ~anchor_mask).any() else None,
                    edgecolors="black" if is_anchor else "none", linewidths=0.5,
                )
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    ax.set_title("feature embedding (anchors as triangles)")
    ax.legend(fontsize=8, markerscale=0.9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
