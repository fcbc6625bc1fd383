"""Numerical optimal transport toolkit.

Solvers (exact 1-D, transportation simplex, multiscale refinement,
auction, entropic Sinkhorn), transport-based signal transforms (CDT,
Radon-CDT, LOT embeddings, sliced Wasserstein) and geodesic utilities
(displacement interpolation, morphing, color transfer), plus file
codecs and the ``otkit`` command line.
"""

from .errors import (
    AllZeroError,
    DimensionError,
    DimensionMismatchError,
    EmptyCorpusError,
    FormatError,
    InfeasibleError,
    InvalidOrderError,
    NoConvergenceError,
    NonMonotoneMapError,
    OtkitError,
    OutOfBoundsError,
    PlanMismatchError,
    RangeError,
    RefinementInfeasibleError,
    UnequalMassError,
    ZeroDensityError,
)
from .measures import (
    Cdf,
    CostMatrix,
    DiscreteMeasure,
    GridDensity,
    as_discrete,
    cdf,
    cost_matrix,
    normalize,
    pseudoinverse,
)
from .exact1d import MonotoneMap1D, optimal_map_1d, wasserstein_1d
from .lp import MultiscaleConfig, TransportPlan, solve_auction, solve_lp, solve_multiscale

__version__ = "0.1.0"

__all__ = [
    "AllZeroError",
    "Cdf",
    "CostMatrix",
    "DimensionError",
    "DimensionMismatchError",
    "DiscreteMeasure",
    "EmptyCorpusError",
    "FormatError",
    "GridDensity",
    "InfeasibleError",
    "InvalidOrderError",
    "MonotoneMap1D",
    "MultiscaleConfig",
    "NoConvergenceError",
    "NonMonotoneMapError",
    "OtkitError",
    "OutOfBoundsError",
    "PlanMismatchError",
    "RangeError",
    "RefinementInfeasibleError",
    "TransportPlan",
    "UnequalMassError",
    "ZeroDensityError",
    "as_discrete",
    "cdf",
    "cost_matrix",
    "normalize",
    "optimal_map_1d",
    "pseudoinverse",
    "solve_auction",
    "solve_lp",
    "solve_multiscale",
    "wasserstein_1d",
]
