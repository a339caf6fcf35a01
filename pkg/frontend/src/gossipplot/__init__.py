"""Plotting front end for gossipsim CSV outputs.

Consumes only the documented CSV schemas (loss.csv, staleness.csv,
bounds.csv); it has no dependency on the simulator package itself.
"""

from gossipplot.errors import PlotError, SchemaError
from gossipplot.plots import plot_loss_panels, plot_staleness_scaling, save_figure

__all__ = [
    "PlotError",
    "SchemaError",
    "plot_loss_panels",
    "plot_staleness_scaling",
    "save_figure",
]
