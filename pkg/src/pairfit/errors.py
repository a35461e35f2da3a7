"""Exception hierarchy shared across the package.

Conventions:
    * ``ConfigError`` signals an invalid user-supplied configuration (bad field,
      missing key, out-of-range parameter).  The CLI maps it to exit code 2.
    * ``NumericalError`` signals a numerical routine that could not reach its
      documented accuracy (quadrature budget exhausted, non-finite integrand).
      The CLI maps it to exit code 3.
"""


class PairfitError(Exception):
    """Base class for package-specific failures."""


class ConfigError(PairfitError, ValueError):
    """A configuration record or argument is invalid."""


class NumericalError(PairfitError, RuntimeError):
    """A numerical routine failed to reach its documented accuracy."""
