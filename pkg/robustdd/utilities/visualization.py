# -*- coding: utf-8 -*-
"""
Plots of the tightening coefficients and of closed loop traces,
saved as svg.
"""
import numpy as np
import matplotlib
import matplotlib.pyplot as plt

from robustdd.tightening import COEFFICIENT_NAMES

# keep labels as text and make the files reproducible
matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "robustdd"

# line style per provenance of the constants
PROVENANCE_STYLES = {
    "data": {"ls": "-", "marker": "o"},
    "oracle": {"ls": "--", "marker": None},
}
COLORS = ['#332288', '#88CCEE', '#44AA99', '#117733', '#999933',
          '#DDCC77', '#CC6677', '#882255']


class CurvePlotter:
    """
    Class for plotting families of curves over k.

    Instructions
    ------------
    1. Use cp.plot_curve(k, values) once or more.
    2. When all lines are plotted, use cp.apply_layout() once for proper
        scaling, ylims, etc.

    """
    def __init__(self):
        # White space added below and above points
        self.y_lim_padding = [0.05, 0.10]
        self._ypoints = np.array([])

    def plot_curve(self, k, values, label=None, color=None, ls="-", marker=None, lw=1.):
        """ Plot one curve, nan values are skipped. """
        k, values = skip_nans((np.asarray(k, dtype=float), np.asarray(values, dtype=float)))
        self._ypoints = np.concatenate((self._ypoints, values))
        plt.plot(k, values, color=color, ls=ls, marker=marker, markersize=3,
                 lw=lw, label=label, zorder=3)

    def apply_layout(self, title=None, x_label="k", y_label="value", grid=True,
                     legend=True, logy=False, hlines=None):
        """
        Apply given layout.

        Parameters
        ----------
        title : str, optional
        x_label, y_label : str
        grid, legend, logy : bool
        hlines : dict, optional
            Label -> y position of horizontal reference lines, e.g. bounds.

        """
        if hlines:
            for label, y in hlines.items():
                plt.axhline(y, color="k", lw=0.8, ls=":", label=label)
                self._ypoints = np.append(self._ypoints, y)
        if logy:
            plt.yscale("log")
        elif self._ypoints.size:
            plt.ylim(get_ylims(self._ypoints, fraction=self.y_lim_padding))
        if legend:
            plt.legend(loc="best", fontsize="small")
        plt.xlabel(x_label)
        plt.ylabel(y_label)
        if title is not None:
            plt.title(title)
        if grid:
            plt.grid(True, zorder=0, linestyle='dotted')


def skip_nans(data):
    """ Skip over points with y = nan, so that all dots are connected. """
    not_nan = ~np.isnan(data[1])
    return data[0][not_nan], data[1][not_nan]


def get_ylims(y_points, fraction=0.25):
    """
    Y limits of the points with some white space below and above.

    Parameters
    ----------
    y_points : ndarray
    fraction : float or List
        How much whitespace of the total y range is added below and above.

    """
    y_points = y_points[np.isfinite(y_points)]
    if y_points.size == 0:
        return -1., 1.
    y_lims = np.amin(y_points), np.amax(y_points)
    if y_lims[0] == y_lims[1]:
        y_range = 0.1 * abs(y_lims[0]) or 1.
    else:
        y_range = y_lims[1] - y_lims[0]
    try:
        fraction = float(fraction)
        padding = [fraction, fraction]
    except TypeError:
        padding = fraction
    return y_lims[0] - padding[0] * y_range, y_lims[1] + padding[1] * y_range


def _save(fig, file):
    # no date in the metadata, so reruns give identical files
    fig.savefig(file, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_coefficients(coefficients, file, family="a", bound=None):
    """
    Plot one family of tightening coefficients over k.

    Parameters
    ----------
    coefficients : dict
        Provenance ('data', 'oracle') -> TighteningCoefficients.
        Curves of all given provenances are overlaid.
    file : str
        Path of the svg.
    family : str
        'a' for the state, 'b' for the input tightening.
    bound : float, optional
        x_max or u_max, drawn as reference line.

    """
    plt.ioff()
    fig = plt.figure(figsize=(6.4, 4.2))
    cp = CurvePlotter()
    names = [name for name in COEFFICIENT_NAMES if name.startswith(family + "_")]
    for provenance, coeff in sorted(coefficients.items()):
        style = PROVENANCE_STYLES.get(provenance, {})
        k = np.arange(coeff.horizon)
        for i, name in enumerate(names):
            cp.plot_curve(k, getattr(coeff, name), label=f"{name} ({provenance})",
                          color=COLORS[i % len(COLORS)], **style)
    hlines = None
    if bound is not None:
        hlines = {("x_max" if family == "a" else "u_max"): bound}
    cp.apply_layout(
        title="State tightening" if family == "a" else "Input tightening",
        hlines=hlines)
    _save(fig, file)


def plot_trace(trace, file):
    """
    Plot the signal, the input and J* of a closed loop trace.

    Parameters
    ----------
    trace : robustdd.mpc.ClosedLoopTrace
    file : str
        Path of the svg.

    """
    plt.ioff()
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(6.4, 7.2))
    t = trace.t
    letter = "x" if trace.kind == "state" else "y"

    signals = trace.signals
    for i in range(trace.dim):
        axes[0].plot(t, signals[:, i], color=COLORS[i % len(COLORS)], label=f"{letter}{i}")
    axes[0].axhline(trace.bound, color="k", lw=0.8, ls=":")
    axes[0].axhline(-trace.bound, color="k", lw=0.8, ls=":")
    axes[0].set_ylabel(letter)

    inputs = trace.inputs
    for i in range(trace.m):
        axes[1].step(t, inputs[:, i], where="post", color=COLORS[i % len(COLORS)], label=f"u{i}")
    axes[1].set_ylabel("u")

    times, j_star = trace.j_star
    if j_star.size:
        axes[2].plot(times, j_star, color=COLORS[0], marker="o", markersize=3, label="J*")
        if np.all(j_star > 0):
            axes[2].set_yscale("log")
    axes[2].set_ylabel("J*")
    axes[2].set_xlabel("t")

    for ax in axes:
        ax.grid(True, zorder=0, linestyle="dotted")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(loc="upper right", fontsize="small")
    _save(fig, file)
