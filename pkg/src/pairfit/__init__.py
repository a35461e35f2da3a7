"""pairfit: minimax density estimation and robust testing via pairwise scores.

The package builds estimators that compare model candidates through families
of pairwise score statistics, one family per loss (total variation, squared
Hellinger, Kullback-Leibler, Wasserstein-1, L_j and L_inf norms), together
with robust two-point tests, closed-form risk-bound evaluators, and a seeded
Monte Carlo harness.
"""

from .errors import ConfigError, NumericalError, PairfitError

__version__ = "0.1.0"

__all__ = ["ConfigError", "NumericalError", "PairfitError", "__version__"]
