"""Hearability of base stations for positioning in Poisson cellular networks.

The package answers one question in several ways: with what probability
can a device receive at least L base stations well enough to localize?

Modules
-------
``model``     scenario/realization containers and exact distributions.
``analytic``  closed-form bounds and integral approximations of P_L.
``reuse``     P_L under K-fold frequency reuse via a counting recursion.
``simulate``  Monte Carlo ground truth on Poisson and hex deployments.
``e911``      TDOA location fixes and FCC E911 accuracy compliance.
``numerics``  adaptive quadrature, root finding, Poisson/Erlang helpers.
``cli``       sweep-to-CSV command line front end and figure recipes.
"""

from .analytic import (
    Method,
    evaluate,
    mean_i1,
    mean_i2,
    min_processing_gain,
    pl_alpha4,
    pl_double_integral,
    pl_nearfield_alpha4,
    pl_perfect_coord,
    pl_single_integral_general,
    pl_upper_bound,
)
from .e911 import (
    E911Config,
    FixOutcome,
    Observations,
    collect_trials,
    default_scenario,
    fcc_compliance,
    ranging_stddev,
    solve_tdoa,
)
from .model import (
    Realization,
    Scenario,
    ShadowingSpec,
    effective_density,
    hex_grid_density,
    pdf_rl,
    pmf_omega,
    sinr_of,
)
from .numerics import (
    NonConvergenceError,
    QuadratureSpec,
    erlang_quantile,
    integrate_adaptive,
    poisson_cdf,
)
from .reuse import ReuseQuery, exact_count_pmf, pl_with_reuse
from .simulate import (
    Deployment,
    McEstimate,
    SimConfig,
    TruthMode,
    collect_margins,
    estimate_pl,
    estimate_pl_curve,
    estimate_pl_reuse,
    hearability_curve,
    participation_metric,
    reuse_success_curve,
    sample_hex,
    sample_ppp,
)

__version__ = "0.1.0"

__all__ = [
    "Method",
    "evaluate",
    "mean_i1",
    "mean_i2",
    "min_processing_gain",
    "pl_alpha4",
    "pl_double_integral",
    "pl_nearfield_alpha4",
    "pl_perfect_coord",
    "pl_single_integral_general",
    "pl_upper_bound",
    "E911Config",
    "FixOutcome",
    "Observations",
    "collect_trials",
    "default_scenario",
    "fcc_compliance",
    "ranging_stddev",
    "solve_tdoa",
    "Realization",
    "Scenario",
    "ShadowingSpec",
    "effective_density",
    "hex_grid_density",
    "pdf_rl",
    "pmf_omega",
    "sinr_of",
    "NonConvergenceError",
    "QuadratureSpec",
    "erlang_quantile",
    "integrate_adaptive",
    "poisson_cdf",
    "ReuseQuery",
    "exact_count_pmf",
    "pl_with_reuse",
    "Deployment",
    "McEstimate",
    "SimConfig",
    "TruthMode",
    "collect_margins",
    "estimate_pl",
    "estimate_pl_curve",
    "estimate_pl_reuse",
    "hearability_curve",
    "participation_metric",
    "reuse_success_curve",
    "sample_hex",
    "sample_ppp",
    "__version__",
]
