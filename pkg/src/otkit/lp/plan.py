"""Sparse transport plan container shared by the discrete solvers."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatchError, RangeError


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Coupling between a source of size M and a target of size N.

    Stored sparsely as parallel arrays ``rows``, ``cols``, ``masses``;
    ``couplings`` iterates ``(i, j, mass)`` triples.  ``total_cost`` is
    the transport term ``sum_ij c_ij * mass_ij`` of the solver that
    produced the plan.  ``info`` carries solver diagnostics (iteration
    counts, method name) and is not part of the mathematical payload.
    """

    rows: np.ndarray
    cols: np.ndarray
    masses: np.ndarray
    source_size: int
    target_size: int
    total_cost: float
    info: dict = field(default_factory=dict)

    def __init__(self, rows, cols, masses, source_size, target_size, total_cost, info=None):
        r = np.asarray(rows, dtype=np.int64)
        c = np.asarray(cols, dtype=np.int64)
        m = np.asarray(masses, dtype=np.float64)
        if not (r.shape == c.shape == m.shape) or r.ndim != 1:
            raise DimensionMismatchError("rows, cols and masses must be equal-length 1-D arrays")
        if r.size and (r.min() < 0 or r.max() >= source_size):
            raise RangeError("row index out of range")
        if c.size and (c.min() < 0 or c.max() >= target_size):
            raise RangeError("column index out of range")
        if np.any(m < 0):
            raise RangeError("coupling masses must be nonnegative")
        for a in (r, c, m):
            a.setflags(write=False)
        object.__setattr__(self, "rows", r)
        object.__setattr__(self, "cols", c)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "source_size", int(source_size))
        object.__setattr__(self, "target_size", int(target_size))
        object.__setattr__(self, "total_cost", float(total_cost))
        object.__setattr__(self, "info", dict(info) if info else {})

    @property
    def couplings(self):
        """List of ``(i, j, mass)`` triples."""
        return [(int(i), int(j), float(m)) for i, j, m in zip(self.rows, self.cols, self.masses)]

    @property
    def n_couplings(self):
        return int(self.rows.size)

    def marginals(self):
        """Row and column sums as dense vectors."""
        p = np.zeros(self.source_size)
        q = np.zeros(self.target_size)
        np.add.at(p, self.rows, self.masses)
        np.add.at(q, self.cols, self.masses)
        return p, q

    def to_dense(self):
        g = np.zeros((self.source_size, self.target_size))
        np.add.at(g, (self.rows, self.cols), self.masses)
        return g
