"""Multi-matrix models: Schwinger-Dyson moments, planar maps, Langevin sampling, free entropy."""

from ._core import (
    BetaSeries,
    Error,
    FixedPointOptions,
    FixedPointResult,
    InfeasibleError,
    NCPoly,
    NumericError,
    OneCutSolution,
    Potential,
    SimConfig,
    ValidationError,
    convexity_probe,
    count_maps,
    coupling_slope,
    cyclic_gradient,
    free_entropy,
    gap_statistic,
    gaussian_genus_expansion,
    involution,
    ks_distance,
    nc_derivative,
    necklaces,
    normalized_trace,
    simulate,
    solve_fixed_point,
    solve_one_cut,
    solve_series,
)

__version__ = "0.3.0"

__all__ = [name for name in dir() if not name.startswith("_")]
