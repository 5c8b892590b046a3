"""Monitoring equilibria on networks and the estimation pipeline around them.

The library has three layers:

* closed-form theory: equilibrium effort and welfare under decentralized and
  centralized monitoring (`game`), spectral generalizations to arbitrary
  networks (`network`), and stochastic shock amplification (`shocks`);
* econometrics: peer-spillover regressions, kink search with bootstrap sup-F
  inference, and variance comparisons (`econometrics`);
* a synthetic facility-data generator with planted ground truth (`synth`)
  that the estimation layer is validated against.

The `netmon` command line exposes the same functionality as subcommands.
"""

from .errors import (
    ConvergenceError,
    NetmonError,
    NoSignChangeError,
    NumericalError,
    ScanDisagreementError,
    SchemaError,
    SpectralBoundError,
    ValidationError,
)
from .game import (
    ModelParams,
    NStarClassification,
    RegimeDiagnostic,
    RegimeSolution,
    equilibrium_effort,
    lambda_star,
    n_star,
    optimal_mu,
    optimal_welfare,
    regime_diagnostic,
    solve_regime,
    welfare_gap,
)
from .network import (
    Graph,
    SpectralSummary,
    dominant_eigenvalue,
    graph_from_descriptor,
    kappa_star,
    make_graph,
    read_edge_list,
    resolvent_sum,
    s_bar,
    spectral_radius,
    spectral_welfare,
    uniform_complete_family,
    write_edge_list,
)
from .shocks import (
    AmplificationProfile,
    ShockSpec,
    SimResult,
    amplification_profile,
    effort_variance_closed_form,
    equilibrium_with_shocks,
    monte_carlo_variance,
    outcome_covariance,
    posterior_mean,
    shock_covariance,
)
from .synth import (
    GeneratorConfig,
    chain_table,
    county_table,
    generate,
    latent_moments,
    read_csv,
    sff_intensity,
    simulate_county_counts,
    summarize,
    write_csv,
)
from . import econometrics

__version__ = "0.1.0"

__all__ = [
    "AmplificationProfile",
    "ConvergenceError",
    "GeneratorConfig",
    "Graph",
    "ModelParams",
    "NStarClassification",
    "NetmonError",
    "NoSignChangeError",
    "NumericalError",
    "RegimeDiagnostic",
    "RegimeSolution",
    "ScanDisagreementError",
    "SchemaError",
    "ShockSpec",
    "SimResult",
    "SpectralBoundError",
    "SpectralSummary",
    "ValidationError",
    "amplification_profile",
    "chain_table",
    "county_table",
    "dominant_eigenvalue",
    "econometrics",
    "effort_variance_closed_form",
    "equilibrium_effort",
    "equilibrium_with_shocks",
    "generate",
    "graph_from_descriptor",
    "kappa_star",
    "lambda_star",
    "latent_moments",
    "make_graph",
    "monte_carlo_variance",
    "n_star",
    "optimal_mu",
    "optimal_welfare",
    "outcome_covariance",
    "posterior_mean",
    "read_csv",
    "read_edge_list",
    "regime_diagnostic",
    "resolvent_sum",
    "s_bar",
    "sff_intensity",
    "shock_covariance",
    "simulate_county_counts",
    "solve_regime",
    "spectral_radius",
    "spectral_welfare",
    "summarize",
    "uniform_complete_family",
    "welfare_gap",
    "write_csv",
    "write_edge_list",
    "__version__",
]
