"""Figures for run logs, alpha sweeps and ablation tables (PNG via the Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_windows(windows: list, path, title: str = "") -> None:
    """Cumulative and window-local discrimination and accuracy over the stream."""
    t = [w["t_end"] for w in windows]
    fig, (ax_d, ax_a) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax_d.plot(t, [w["disc_pct"] for w in windows], label="cumulative")
    ax_d.plot(t, [w["window_disc_pct"] for w in windows], alpha=0.6, label="window")
    ax_d.axhline(0.0, color="grey", lw=0.5)
    ax_d.set_ylabel("Disc %")
    ax_d.legend(loc="best", fontsize=8)
    ax_a.plot(t, [w["acc_pct"] for w in windows], label="cumulative")
    ax_a.plot(t, [w["window_acc_pct"] for w in windows], alpha=0.6, label="window")
    drift_t = [w["t_end"] for w in windows if w["replacements"]]
    for x in drift_t:
        ax_a.axvline(x, color="red", lw=0.4, alpha=0.4)
    ax_a.set_ylabel("Acc %")
    ax_a.set_xlabel("instances")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(rows: list, path) -> None:
    """Accuracy against discrimination, one point per alpha."""
    fig, ax = plt.subplots(figsize=(5, 4))
    xs = [s["disc_pct"] for _, s in rows]
    ys = [s["acc_pct"] for _, s in rows]
    ax.plot(xs, ys, "o-")
    for (a, _), x, y in zip(rows, xs, ys):
        ax.annotate(f"{a:g}", (x, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel("Disc %")
    ax.set_ylabel("Acc %")
    ax.set_title("custom sampling ratio")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_ablation(rows: list, path) -> None:
    names = [n for n, _ in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    x = range(len(names))
    ax.bar([i - 0.2 for i in x], [s["disc_pct"] for _, s in rows], width=0.4, label="Disc %")
    ax.bar([i + 0.2 for i in x], [s["acc_pct"] for _, s in rows], width=0.4, label="Acc %")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
