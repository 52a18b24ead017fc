"""Stochastic H-infinity norms of linear systems with multiplicative noise.

The heavy lifting happens in the compiled extension; this package only
re-exports it under stable names.
"""

from ._core import (
    BracketFailureError,
    MSUnstableError,
    StochasticSystem,
    __version__,
    default_profile_grid,
    det_hinf_norm,
    heat_system,
    load_manifest,
    mc_norm_lower_bound,
    ms_stability,
    ms_stable,
    newton_solve,
    profile,
    random_general_system,
    random_system,
    save_manifest,
    stoch_hinf_norm,
)

__all__ = [
    "BracketFailureError",
    "MSUnstableError",
    "StochasticSystem",
    "__version__",
    "default_profile_grid",
    "det_hinf_norm",
    "heat_system",
    "load_manifest",
    "mc_norm_lower_bound",
    "ms_stability",
    "ms_stable",
    "newton_solve",
    "profile",
    "random_general_system",
    "random_system",
    "save_manifest",
    "stoch_hinf_norm",
]
