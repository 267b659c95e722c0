"""Offline visualization of cksf run artifacts.

Reads the simulator's external interfaces only (diagnostics.csv and CKSF1
snapshot files) and renders time series and field heatmap panels.
"""

from .artifacts import COLUMNS, CSV_HEADER, BadHeader, RunArtifacts, SchemaMismatch, Snapshot
from .fields import count_local_maxima, plot_fields
from .timeseries import plot_timeseries

__version__ = "0.1.0"
