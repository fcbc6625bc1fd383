"""Closed-form one-dimensional transport.

On the line the optimal plan never crosses itself, so the p-Wasserstein
distance reduces to an integral of quantile differences and the optimal
map to a composition of one CDF with the pseudoinverse of the other.
Discrete-discrete distances are evaluated exactly by merging the two CDF
breakpoint sets; grid inputs use midpoint quadrature in quantile space.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InvalidOrderError,
    RangeError,
    ZeroDensityError,
)
from .measures import Cdf, DiscreteMeasure, GridDensity, cdf, pseudoinverse


@dataclass(frozen=True, eq=False)
class MonotoneMap1D:
    """A nondecreasing map sampled on increasing knots.

    Between knots the map is evaluated by linear interpolation, which
    preserves monotonicity.
    """

    domain_knots: np.ndarray
    image_values: np.ndarray

    def __init__(self, domain_knots, image_values):
        x = np.asarray(domain_knots, dtype=np.float64)
        y = np.asarray(image_values, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape or x.size < 1:
            raise DimensionError("knots and values must be equal-length 1-D arrays")
        if np.any(np.diff(x) <= 0):
            raise RangeError("domain knots must be strictly increasing")
        if np.any(np.diff(y) < -1e-9 * max(1.0, float(np.abs(y).max()))):
            raise RangeError("image values must be nondecreasing")
        x = x.copy()
        y = np.maximum.accumulate(y)  # absorb roundoff-scale inversions
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "domain_knots", x)
        object.__setattr__(self, "image_values", y)

    def __call__(self, x):
        vals = np.interp(np.asarray(x, dtype=np.float64), self.domain_knots, self.image_values)
        return vals if vals.ndim else float(vals)


def _require_1d(measure, name):
    if isinstance(measure, (DiscreteMeasure, GridDensity)):
        if measure.dim != 1:
            raise DimensionError(f"{name} must be one-dimensional, got d={measure.dim}")
        return
    raise DimensionError(f"{name} must be a DiscreteMeasure or GridDensity")


def _discrete_quantile_cost(fa: Cdf, fb: Cdf, p: float) -> float:
    # Both pseudoinverses are piecewise constant in z with breakpoints at the
    # cumulative masses; sum |x - y|^p over the merged partition of (0, 1).
    levels = np.union1d(fa.cumulative, fb.cumulative)
    levels = levels[(levels > 0) & (levels <= 1)]
    lo = np.concatenate(([0.0], levels[:-1]))
    widths = levels - lo
    mids = 0.5 * (levels + lo)
    xa = fa.knots[np.searchsorted(fa.cumulative, mids, side="left")]
    xb = fb.knots[np.searchsorted(fb.cumulative, mids, side="left")]
    return float(np.sum(widths * np.abs(xa - xb) ** p))


def wasserstein_1d(mu, nu, p: float = 2.0, n_quantiles: int = 1000) -> float:
    """p-Wasserstein distance between one-dimensional measures.

    Exact (no quadrature error) when both inputs are discrete; otherwise
    the quantile integral is approximated by the midpoint rule over
    ``n_quantiles`` equal bins.
    """
    if p < 1:
        raise InvalidOrderError(f"order must satisfy p >= 1, got {p}")
    _require_1d(mu, "mu")
    _require_1d(nu, "nu")
    fa, fb = cdf(mu), cdf(nu)
    if fa.kind == "step" and fb.kind == "step":
        return float(_discrete_quantile_cost(fa, fb, p) ** (1.0 / p))
    if n_quantiles < 1:
        raise RangeError("n_quantiles must be positive")
    z = (np.arange(n_quantiles) + 0.5) / n_quantiles
    qa = pseudoinverse(fa, z)
    qb = pseudoinverse(fb, z)
    return float(np.mean(np.abs(qa - qb) ** p) ** (1.0 / p))


def optimal_map_1d(mu: GridDensity, nu: GridDensity) -> MonotoneMap1D:
    """Optimal transport map between strictly positive 1-D grid densities.

    Returns the monotone rearrangement sampled at the source cell
    centers: the composition of the target quantile function with the
    source CDF.
    """
    _require_1d(mu, "mu")
    _require_1d(nu, "nu")
    if not isinstance(mu, GridDensity) or not isinstance(nu, GridDensity):
        raise DimensionError("optimal_map_1d expects grid densities")
    if np.any(mu.values <= 0) or np.any(nu.values <= 0):
        raise ZeroDensityError(
            "densities must be strictly positive; apply normalize(..., epsilon > 0) first"
        )
    f_mu, f_nu = cdf(mu), cdf(nu)
    knots = mu.knots()
    levels = f_mu(knots)
    # cell centers of a positive density sit strictly inside (0, 1)
    levels = np.clip(levels, 1e-15, 1.0 - 1e-15)
    image = pseudoinverse(f_nu, levels)
    return MonotoneMap1D(knots, image)
