"""Batch figure generation for llg-wire CSV artifacts."""

from .figures import PlotSpec, plot_profiles, plot_run, render

__version__ = "0.1.0"
