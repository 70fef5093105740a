"""Prediction and Monte-Carlo measurement of adaptive low-rank filter SINR loss.

The package covers a spiked covariance model of low-rank jamming plus white
noise on a uniform linear array, random-matrix deterministic equivalents for
the low-rank SINR loss, and a reproducible simulation harness.
"""

from lrsinr.errors import LrsinrError, NumericalError, RegimeError

__version__ = "0.1.0"

__all__ = ["LrsinrError", "NumericalError", "RegimeError", "__version__"]
