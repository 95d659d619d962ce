"""Spike-and-wave discharge detection from moving-average residual statistics.

Each window is reduced to the residual between a short and a long
two-sided moving average.  The Gaussian MLE mean and standard deviation
of that residual feed a one-hidden-layer sigmoid network.
"""

__version__ = "0.1.0"

SWD = "SWD"
NSWD = "nSWD"
LABELS = (SWD, NSWD)
