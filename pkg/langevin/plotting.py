"""SVG figures of benchmark errors.

The figures are for reading only; nothing in the package loads them back.

"""
import os

import matplotlib as mpl
import numpy as np

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from langevin import utilities  # noqa: E402


FIGURE_WIDTH = 6.4
GOLDEN_MEAN = (np.sqrt(5.0) - 1.0) / 2.0
RC_PARAMS = {
    "axes.labelsize": 10,
    "font.size": 10,
    "legend.fontsize": 8,
    "svg.hashsalt": "langevin",
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}


def figure_size(scale=1.0):
    """Return a (width, height) in inches with a golden aspect ratio."""
    width = FIGURE_WIDTH * scale
    return width, width * GOLDEN_MEAN


def plot_benchmark(summary, errors, out_dir):
    """Write the benchmark figures of every functional.

    For each functional three SVG files are written: mean absolute error
    against averaged iterations and against effective passes, one line per
    (sampler, tau, batch) cell, and box plots of the final errors over
    replications.

    Parameters
    ----------
    summary : pandas.DataFrame
        The summary table of run_experiment.
    errors : pandas.DataFrame
        The per-replication error table of run_experiment.
    out_dir : str
        The directory to write to.

    Returns
    -------
    list of str
        The paths written.

    """
    utilities.ensure_directory(out_dir)
    paths = []
    with mpl.rc_context(RC_PARAMS):
        for name in sorted(summary["functional"].unique()):
            rows = summary[summary["functional"] == name]
            for axis, label in (("n", "iterations"), ("passes", "passes")):
                path = os.path.join(
                    out_dir,
                    "error_vs_{}_{}.svg".format(label, name),
                )
                _plot_error_lines(rows, axis, label, name, path)
                paths.append(path)

            path = os.path.join(out_dir, "final_errors_{}.svg".format(name))
            _plot_final_errors(errors[errors["functional"] == name], name,
                               path)
            paths.append(path)
    return paths


def _cell_label(sampler, tau, batch):
    """Label a grid cell in a legend."""
    return "{} tau={:g} batch={}".format(sampler, tau, batch)


def _plot_error_lines(rows, axis, label, name, path):
    """Plot mean absolute error curves on log-log axes."""
    figure, ax = plt.subplots(figsize=figure_size())
    for (sampler, tau, batch), cell in rows.groupby(
        ["sampler", "tau", "batch"],
        sort=True,
    ):
        cell = cell.sort_values("n")
        finite = cell[np.isfinite(cell["mae"]) & (cell["mae"] > 0)]
        if finite.empty:
            continue
        ax.loglog(
            finite[axis],
            finite["mae"],
            marker=".",
            label=_cell_label(sampler, tau, batch),
        )
    ax.set_xlabel(label)
    ax.set_ylabel("mean absolute error of {}".format(name))
    ax.legend(loc="best")
    _save(figure, path)


def _plot_final_errors(errors, name, path):
    """Box-plot the final errors of every grid cell."""
    final = errors[errors["n"] == errors["n"].max()]
    labels = []
    samples = []
    for (sampler, tau, batch), cell in final.groupby(
        ["sampler", "tau", "batch"],
        sort=True,
    ):
        labels.append(_cell_label(sampler, tau, batch))
        samples.append(cell["error"].dropna().to_numpy())

    figure, ax = plt.subplots(figsize=figure_size())
    ax.boxplot(samples)
    ax.set_xticks(np.arange(1, len(labels) + 1))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("final absolute error of {}".format(name))
    figure.tight_layout()
    _save(figure, path)


def _save(figure, path):
    """Save a figure as SVG and release it."""
    figure.savefig(path, format="svg", metadata={"Date": None})
    plt.close(figure)
