"""Exception taxonomy shared across the package.

Errors split into three families so the CLI can map them onto exit codes:
validation problems (bad parameters, malformed inputs) exit 2, numerical
failures (non-convergence, spectral bounds, degenerate searches) exit 3,
and I/O problems exit 4 (plain OSError is used for those).
"""

from __future__ import annotations


class NetmonError(Exception):
    """Base class for package errors."""


class ValidationError(NetmonError, ValueError):
    """Invalid parameters, domains, or input data."""


class SchemaError(ValidationError):
    """Tabular input violates the facility schema; message carries row/column detail."""


class NumericalError(NetmonError, RuntimeError):
    """Numerical failure: non-convergence, out-of-bound spectral radius, failed search."""


class ConvergenceError(NumericalError):
    """An iterative routine exceeded its iteration budget."""


class SpectralBoundError(NumericalError):
    """A resolvent was requested at or beyond the spectral radius bound."""


class NoSignChangeError(NumericalError):
    """A bracketing search found no sign change over its interval."""


class ScanDisagreementError(NumericalError):
    """Closed-form classification contradicts the brute-force integer scan."""
