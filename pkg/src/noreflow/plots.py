"""Report figures written next to the CSV/JSON artifacts."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .ingest import SEQUENCE_KEYS  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}
GROUP_COLORS = {0: "#4c72b0", 1: "#c44e52"}
GROUP_NAMES = {0: "reflow", 1: "no-reflow"}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # no Software/date metadata so reruns are byte-identical
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_mean_curves(data, path):
    """Outcome-group mean of aligned signals for each (phase, view)."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(8, 5.5), sharey=True)
        for ax, key in zip(axes.ravel(), SEQUENCE_KEYS):
            for label in (0, 1):
                curves = [data.signals[p.id][key].values for p in data.patients
                          if p.label == label and key in data.signals.get(p.id, {})]
                if not curves:
                    continue
                n = min(len(c) for c in curves)
                stack = np.vstack([c[:n] for c in curves])
                t = np.arange(1, n + 1)
                mean, sd = stack.mean(axis=0), stack.std(axis=0)
                ax.plot(t, mean, color=GROUP_COLORS[label], label=f"{GROUP_NAMES[label]} (n={len(curves)})")
                ax.fill_between(t, mean - sd, mean + sd, color=GROUP_COLORS[label], alpha=0.15, lw=0)
            ax.set_title(f"{key[0]} / {key[1]}")
            ax.set_xlabel("frame after onset")
        axes[0, 0].set_ylabel("inverted intensity")
        axes[1, 0].set_ylabel("inverted intensity")
        axes[0, 0].legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def roc_points(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    thresholds = np.unique(scores)[::-1]
    pos, neg = max(labels.sum(), 1), max((1 - labels).sum(), 1)
    fpr, tpr = [0.0], [0.0]
    for thr in thresholds:
        pred = scores >= thr
        tpr.append(float(np.sum(pred & (labels == 1)) / pos))
        fpr.append(float(np.sum(pred & (labels == 0)) / neg))
    return np.array(fpr), np.array(tpr)


def plot_roc(report, path, baseline=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 4))
        entries = [(report, "model")] + ([(baseline, "CLN baseline")] if baseline is not None else [])
        for rep, name in entries:
            fpr, tpr = roc_points(rep.scores, rep.labels)
            auc = rep.metrics.get("auroc")
            ax.step(fpr, tpr, where="post", label=f"{name} (AUROC {auc:.4f})" if auc is not None else name)
        ax.plot([0, 1], [0, 1], ls=":", color="grey", lw=0.8)
        ax.set_xlabel("1 - specificity")
        ax.set_ylabel("recall")
        ax.legend(frameon=False, loc="lower right")
        fig.tight_layout()
        return _save(fig, path)


def plot_importances(report, path, top=15):
    units = list(report.importances)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, max(len(units), 1), figsize=(4.2 * max(len(units), 1), 4.5), squeeze=False)
        for ax, unit in zip(axes[0], units):
            table = report.importances[unit]
            items = sorted(table.items(), key=lambda kv: (-kv[1], kv[0]))[:top][::-1]
            ax.barh([k for k, _ in items], [v for _, v in items], color="#55a868")
            ax.set_title(unit)
            ax.set_xlabel("importance")
            ax.tick_params(axis="y", labelsize=7)
        fig.tight_layout()
        return _save(fig, path)


def plot_group_grid(grid, path):
    """Heat map of the PEAK/SIPS/FLOW x mode AUROC grid."""
    rows = list(dict.fromkeys(c["row"] for c in grid["cells"]))
    cols = list(dict.fromkeys(c["column"] for c in grid["cells"]))
    values = np.full((len(rows), len(cols)), np.nan)
    for c in grid["cells"]:
        if c["auroc"] is not None:
            values[rows.index(c["row"]), cols.index(c["column"])] = c["auroc"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(values, vmin=0.0, vmax=1.0, cmap="viridis", aspect="auto")
        for i in range(len(rows)):
            for j in range(len(cols)):
                text = "NA" if np.isnan(values[i, j]) else f"{values[i, j]:.3f}"
                ax.text(j, i, text, ha="center", va="center", color="white", fontsize=8)
        ax.set_xticks(range(len(cols)), cols)
        ax.set_yticks(range(len(rows)), rows)
        fig.colorbar(im, ax=ax, label="AUROC")
        fig.tight_layout()
        return _save(fig, path)
