"""Post-hoc figures from the solver's CSV time series and field snapshots."""

from .figures import FigureSpec, plot_drift, plot_energy, plot_order, plot_snapshot
from .readers import Snapshot, TimeSeries, read_snapshot, read_timeseries

__version__ = "0.1.0"
