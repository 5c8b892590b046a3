"""Estimation toolkit: panel construction, OLS, break search, variance tests."""

from .breaks import (
    BootstrapSupF,
    BreakResult,
    BreakSearch,
    KinkFit,
    bootstrap_supf,
    break_search,
    kink_fit,
)
from .ols import OLS, RegressionResult, ols
from .panel import (
    COLUMNS,
    DEFAULT_CHAIN_CUTOFF,
    DEFAULT_COUNTY_CUTOFF,
    OWNERSHIP_LEVELS,
    derive_columns,
    peer_means,
    validate_panel,
)
from .spillovers import deterioration_regression, spillover_regression
from .variance import LeveneResult, levene_test, variance_by_threshold

__all__ = [
    "BootstrapSupF",
    "BreakResult",
    "BreakSearch",
    "COLUMNS",
    "DEFAULT_CHAIN_CUTOFF",
    "DEFAULT_COUNTY_CUTOFF",
    "KinkFit",
    "LeveneResult",
    "OLS",
    "OWNERSHIP_LEVELS",
    "RegressionResult",
    "bootstrap_supf",
    "break_search",
    "derive_columns",
    "deterioration_regression",
    "kink_fit",
    "levene_test",
    "ols",
    "peer_means",
    "spillover_regression",
    "validate_panel",
    "variance_by_threshold",
]
