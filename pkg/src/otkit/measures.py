"""Core data model shared by every solver.

Discrete measures (weighted point sets), densities on regular grids,
power cost matrices, and cumulative distribution functions with their
pseudoinverses.  All containers are immutable after construction and all
operations are pure functions, so everything here is safe to use from
concurrent code.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    AllZeroError,
    DimensionError,
    DimensionMismatchError,
    InvalidOrderError,
    RangeError,
)

#: tolerance on total mass after normalization
MASS_TOL = 1e-9


def _frozen(a, dtype=np.float64):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted point set ``sum_i w_i * delta(x_i)``.

    Parameters
    ----------
    points : array-like, shape (n,) or (n, d)
        Atom coordinates; a flat input is treated as one-dimensional.
    weights : array-like, shape (n,)
        Nonnegative masses.  Normalized to total mass one unless
        ``normalize=False`` is passed (solvers that require probability
        measures validate the total themselves).
    """

    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points, weights, normalize=True):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DimensionError("points must be a nonempty (n, d) array")
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] != pts.shape[0]:
            raise DimensionMismatchError(
                f"{w.shape[0] if w.ndim == 1 else w.shape} weights for {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise RangeError("points and weights must be finite")
        if np.any(w < 0):
            raise RangeError("weights must be nonnegative")
        if normalize:
            total = w.sum()
            if total <= 0:
                raise AllZeroError("cannot normalize a measure with zero total mass")
            w = w / total
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def total_mass(self):
        return float(self.weights.sum())


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Nonnegative intensity field on a regular d-dimensional grid.

    ``values[k]`` is the density at the cell center
    ``origin + k * spacing`` (per axis); the mass of a cell is its value
    times the cell volume.  Signals use d=1, images d=2.
    """

    values: np.ndarray
    spacing: tuple
    origin: tuple

    def __init__(self, values, spacing=1.0, origin=0.0):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim < 1 or v.size < 1:
            raise DimensionError("values must be a nonempty array")
        d = v.ndim
        sp = np.broadcast_to(np.asarray(spacing, dtype=np.float64), (d,)).copy()
        og = np.broadcast_to(np.asarray(origin, dtype=np.float64), (d,)).copy()
        if np.any(sp <= 0) or not np.all(np.isfinite(sp)) or not np.all(np.isfinite(og)):
            raise RangeError("spacing must be positive and finite, origin finite")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise RangeError("density values must be finite and nonnegative")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "spacing", tuple(float(s) for s in sp))
        object.__setattr__(self, "origin", tuple(float(o) for o in og))

    @property
    def dims(self):
        return self.values.shape

    @property
    def dim(self):
        return self.values.ndim

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def total_mass(self):
        return float(self.values.sum() * self.cell_volume)

    def knots(self):
        """Cell-center coordinates along axis 0 (one-dimensional grids only)."""
        if self.dim != 1:
            raise DimensionError("knots() is defined for one-dimensional grids")
        n = self.dims[0]
        return self.origin[0] + self.spacing[0] * np.arange(n)

    def cell_centers(self):
        """(n_cells, d) array of all cell-center coordinates, C-order."""
        axes = [o + s * np.arange(n) for o, s, n in zip(self.origin, self.spacing, self.dims)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Pairwise transport costs ``|x_i - y_j|^p`` (or user-supplied entries)."""

    entries: np.ndarray
    order: float

    def __init__(self, entries, order):
        e = np.asarray(entries, dtype=np.float64)
        if e.ndim != 2:
            raise DimensionError("cost entries must form a matrix")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise RangeError("cost entries must be finite and nonnegative")
        if order < 1:
            raise InvalidOrderError(f"cost exponent must satisfy p >= 1, got {order}")
        object.__setattr__(self, "entries", _frozen(e))
        object.__setattr__(self, "order", float(order))

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class Cdf:
    """Cumulative distribution function on the line.

    ``kind`` is ``"step"`` for CDFs of discrete measures (right-continuous
    jumps at the knots) and ``"linear"`` for CDFs of grid densities
    (piecewise linear between cell edges).
    """

    knots: np.ndarray
    cumulative: np.ndarray
    kind: str

    def __init__(self, knots, cumulative, kind):
        k = np.asarray(knots, dtype=np.float64)
        c = np.asarray(cumulative, dtype=np.float64)
        if kind not in ("step", "linear"):
            raise RangeError(f"unknown cdf kind {kind!r}")
        if k.ndim != 1 or k.shape != c.shape or k.size < 1:
            raise DimensionMismatchError("knots and cumulative must be equal-length 1-D arrays")
        if np.any(np.diff(k) <= 0):
            raise RangeError("knots must be strictly increasing")
        if np.any(np.diff(c) < -1e-12) or c[0] < -1e-12 or abs(c[-1] - 1.0) > 1e-12:
            raise RangeError("cumulative must be nondecreasing from >= 0 to 1")
        object.__setattr__(self, "knots", _frozen(k))
        object.__setattr__(self, "cumulative", _frozen(c))
        object.__setattr__(self, "kind", kind)

    def __call__(self, x):
        """Evaluate F(x) (vectorized)."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "step":
            idx = np.searchsorted(self.knots, x, side="right")
            vals = np.concatenate(([0.0], self.cumulative))[idx]
        else:
            vals = np.interp(x, self.knots, self.cumulative)
        return vals if vals.ndim else float(vals)


def normalize(raw: GridDensity, epsilon: Union[float, None] = None) -> GridDensity:
    """Floor a density at ``epsilon`` and rescale it to unit mass.

    ``epsilon`` is added to every cell before rescaling so that the
    result is strictly positive whenever ``epsilon > 0``.  When omitted
    it defaults to ``1e-8 * max(values)``, which keeps originally zero
    cells from dominating while satisfying solvers that need positive
    densities.  Raises :class:`AllZeroError` for an identically zero
    input with ``epsilon == 0``.
    """
    v = raw.values
    if epsilon is None:
        epsilon = 1e-8 * float(v.max())
    if epsilon < 0:
        raise RangeError("epsilon must be nonnegative")
    if epsilon == 0 and not np.any(v > 0):
        raise AllZeroError("density is identically zero and epsilon is 0")
    out = v + epsilon
    total = out.sum() * raw.cell_volume
    return GridDensity(out / total, raw.spacing, raw.origin)


def _cdf_discrete(measure: DiscreteMeasure) -> Cdf:
    x = measure.points[:, 0]
    w = measure.weights
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    # merge coincident atoms, drop zero-weight ones
    knots, inverse = np.unique(x, return_inverse=True)
    mass = np.zeros(knots.shape[0])
    np.add.at(mass, inverse, w)
    keep = mass > 0
    knots, mass = knots[keep], mass[keep]
    cum = np.cumsum(mass)
    cum /= cum[-1]
    cum[-1] = 1.0
    return Cdf(knots, cum, "step")


def _cdf_grid(density: GridDensity) -> Cdf:
    n = density.dims[0]
    step = density.spacing[0]
    left = density.origin[0] - 0.5 * step
    edges = left + step * np.arange(n + 1)
    cum = np.concatenate(([0.0], np.cumsum(density.values * step)))
    total = cum[-1]
    if total <= 0:
        raise AllZeroError("cannot build a CDF from a zero-mass density")
    cum /= total
    cum[-1] = 1.0
    return Cdf(edges, cum, "linear")


def cdf(measure) -> Cdf:
    """Cumulative distribution function of a one-dimensional measure.

    Discrete measures give a right-continuous step CDF; grid densities
    give the piecewise-linear CDF of midpoint integration (running sum
    of value times spacing).
    """
    if isinstance(measure, DiscreteMeasure):
        if measure.dim != 1:
            raise DimensionError(f"cdf needs a 1-D measure, got d={measure.dim}")
        return _cdf_discrete(measure)
    if isinstance(measure, GridDensity):
        if measure.dim != 1:
            raise DimensionError(f"cdf needs a 1-D density, got d={measure.dim}")
        return _cdf_grid(measure)
    raise DimensionError(f"cdf expects a DiscreteMeasure or GridDensity, got {type(measure)!r}")


def pseudoinverse(f: Cdf, z):
    """Generalized quantile ``inf{x : F(x) >= z}`` for ``z`` in (0, 1).

    Accepts a scalar or an array of quantile levels; step CDFs return the
    leftmost knot attaining the level, linear CDFs invert the segment
    crossing it.
    """
    z_arr = np.asarray(z, dtype=np.float64)
    if np.any(z_arr <= 0) or np.any(z_arr >= 1):
        raise RangeError("quantile levels must lie strictly inside (0, 1)")
    if f.kind == "step":
        idx = np.searchsorted(f.cumulative, z_arr, side="left")
        out = f.knots[idx]
    else:
        cum, knots = f.cumulative, f.knots
        idx = np.searchsorted(cum, z_arr, side="left")
        idx = np.clip(idx, 1, cum.size - 1)
        c0, c1 = cum[idx - 1], cum[idx]
        k0, k1 = knots[idx - 1], knots[idx]
        frac = np.where(c1 > c0, (z_arr - c0) / np.where(c1 > c0, c1 - c0, 1.0), 0.0)
        out = k0 + frac * (k1 - k0)
    return out if out.ndim else float(out)


def cost_matrix(source: DiscreteMeasure, target: DiscreteMeasure, p: float = 2.0) -> CostMatrix:
    """Build ``c(x_i, y_j) = |x_i - y_j|^p`` from Euclidean distances."""
    if p < 1:
        raise InvalidOrderError(f"cost exponent must satisfy p >= 1, got {p}")
    if source.dim != target.dim:
        raise DimensionMismatchError(
            f"source lives in d={source.dim} but target in d={target.dim}"
        )
    diff = source.points[:, None, :] - target.points[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    if p == 2:
        entries = sq
    elif p == 1:
        entries = np.sqrt(sq)
    else:
        entries = sq ** (p / 2.0)
    return CostMatrix(entries, p)


def as_discrete(density: GridDensity, drop_zero: bool = True) -> DiscreteMeasure:
    """View a grid density as a discrete measure on its cell centers."""
    masses = (density.values * density.cell_volume).ravel()
    pts = density.cell_centers()
    if drop_zero:
        keep = masses > 0
        pts, masses = pts[keep], masses[keep]
    return DiscreteMeasure(pts, masses, normalize=False)
