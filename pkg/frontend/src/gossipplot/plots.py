"""Figure construction from the simulator's CSV schemas.

Two figure kinds:

  loss_panels        -- one panel per gossip-rate scaling, one curve per
                        network size n (mean over seeds, +-1 sd shading);
  staleness_scaling  -- time-average staleness vs n on a log-x axis with
                        the closed-form bound curves overlaid; also
                        accepts a bounds-only CSV (no empirical points).

Rendering is a pure function of CSV content: fixed style, fixed hash
salt, no timestamps, so identical inputs yield identical image bytes.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from gossipplot.errors import PlotError, SchemaError

plt.rcParams["svg.hashsalt"] = "gossipplot"
plt.rcParams["figure.dpi"] = 100

LOSS_REQUIRED = ["n", "scaling", "seed", "epoch", "mean_loss"]
STALENESS_REQUIRED = ["n", "scaling", "seed", "scheme", "mean_staleness",
                      "lemma1_bound", "thm2_fixed_point", "thm2_printed"]
BOUNDS_REQUIRED = ["n", "scaling", "lemma1_bound", "thm2_fixed_point",
                   "thm2_printed"]


def load_table(path: str, required: list[str]) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise PlotError(f"input CSV not found: {path}") from None
    except pd.errors.EmptyDataError:
        raise PlotError(f"no data in {path}") from None
    for col in required:
        if col not in df.columns:
            raise SchemaError(f"{path}: missing required column {col!r}")
    if df.empty:
        raise PlotError(f"no data in {path} (header only)")
    return df


def _scalings_in_order(df: pd.DataFrame) -> list[str]:
    return list(dict.fromkeys(df["scaling"]))


def plot_loss_panels(path: str):
    """One panel per scaling; per-n mean loss over seeds with +-1 sd shading."""
    df = load_table(path, LOSS_REQUIRED)
    scalings = _scalings_in_order(df)
    fig, axes = plt.subplots(
        1, len(scalings), figsize=(4.2 * len(scalings), 3.4),
        sharey=True, squeeze=False,
    )
    for ax, scaling in zip(axes[0], scalings):
        sub = df[df["scaling"] == scaling]
        for n in sorted(sub["n"].unique()):
            runs = sub[sub["n"] == n]
            grouped = runs.groupby("epoch")["mean_loss"]
            mean = grouped.mean()
            ax.plot(mean.index, mean.values, label=f"n={n}")
            if runs["seed"].nunique() > 1:
                sd = grouped.std()
                ax.fill_between(mean.index, mean - sd, mean + sd, alpha=0.25)
        ax.set_title(f"scaling = {scaling}")
        ax.set_xlabel("epoch")
        ax.legend()
    axes[0, 0].set_ylabel("mean loss")
    fig.tight_layout()
    return fig


def plot_staleness_scaling(path: str):
    """Mean staleness vs n (log-x) with dashed/dotted bound overlays.

    A bounds-only CSV (no mean_staleness column) renders just the bound
    curves.
    """
    probe = load_table(path, ["n", "scaling", "lemma1_bound"])
    bounds_only = "mean_staleness" not in probe.columns
    df = load_table(path, BOUNDS_REQUIRED if bounds_only else STALENESS_REQUIRED)

    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    for scaling in _scalings_in_order(df):
        sub = df[df["scaling"] == scaling].sort_values("n")
        per_n = sub.groupby("n")
        ns = np.array(sorted(sub["n"].unique()))
        opportunistic = (not bounds_only) and (sub["scheme"] == "opportunistic").any()
        color = None
        if not bounds_only:
            emp = per_n["mean_staleness"].mean()
            (line,) = ax.plot(emp.index, emp.values, marker="o",
                              label=f"{scaling} (empirical)")
            color = line.get_color()
        if bounds_only or not opportunistic:
            ax.plot(ns, per_n["lemma1_bound"].first().values, linestyle="--",
                    color=color, label=f"{scaling} harmonic bound")
        if bounds_only or opportunistic:
            ax.plot(ns, per_n["thm2_fixed_point"].first().values, linestyle=":",
                    color=color, label=f"{scaling} floor (fixed point)")
            ax.plot(ns, per_n["thm2_printed"].first().values, linestyle="-.",
                    color=color, alpha=0.7, label=f"{scaling} floor (closed form)")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel("time-average staleness")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def save_figure(fig, out: str, fmt: str) -> None:
    """Write the figure without any timestamp metadata."""
    if fmt == "svg":
        fig.savefig(out, format="svg", metadata={"Date": None})
    elif fmt == "png":
        fig.savefig(out, format="png")
    else:
        raise PlotError(f"unsupported format {fmt!r}, expected png or svg")
    plt.close(fig)
