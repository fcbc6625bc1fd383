"""Auction solver for the equal-weight assignment case.

When both measures carry N atoms of mass 1/N the Kantorovich problem
has a permutation solution; the solver bids for target atoms with
epsilon-complementary slackness, shrinking epsilon by 4 each scaling
round until optimality of the final assignment is guaranteed (the last
epsilon is pushed below the smallest positive cost gap divided by N+1,
or to a floor fine enough that the cost error is below 1e-9 scale).
"""

import numpy as np

from ..errors import DimensionMismatchError, UnequalMassError
from ..measures import CostMatrix, DiscreteMeasure
from .plan import TransportPlan

#: shrink factor of the epsilon-scaling schedule
EPS_SHRINK = 4.0


def _final_epsilon(costs, n):
    """Epsilon small enough that an eps-optimal assignment is optimal."""
    scale = max(1.0, float(costs.max()))
    flat = np.unique(costs.ravel())
    gaps = np.diff(flat)
    gaps = gaps[gaps > 0]
    gap_bound = gaps.min() / (n + 1.0) if gaps.size else scale
    return max(min(gap_bound, 1e-10 * scale), 1e-15 * scale)


def _auction_round(benefit, prices, eps):
    """One forward-auction pass; returns the assignment (person -> object)."""
    n = benefit.shape[0]
    owner = np.full(n, -1, dtype=np.int64)
    assigned = np.full(n, -1, dtype=np.int64)
    queue = list(range(n - 1, -1, -1))
    bids = 0
    while queue:
        person = queue.pop()
        values = benefit[person] - prices
        best = int(np.argmax(values))
        if n == 1:
            increment = eps
        else:
            v_best = values[best]
            values[best] = -np.inf
            increment = v_best - values.max() + eps
            values[best] = v_best
        prices[best] += increment
        previous = owner[best]
        if previous >= 0:
            assigned[previous] = -1
            queue.append(int(previous))
        owner[best] = person
        assigned[person] = best
        bids += 1
        if bids > 50_000_000:
            raise RuntimeError("auction failed to terminate")
    return assigned, bids


def solve_auction(
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    cost: CostMatrix,
    epsilon_scaling: bool = True,
) -> TransportPlan:
    """Optimal assignment between equal-weight measures of equal size.

    Raises :class:`UnequalMassError` unless ``M == N`` and every weight
    equals ``1/N``.  Returns a permutation plan with ``N`` couplings of
    mass ``1/N`` each.
    """
    n = source.size
    if target.size != n or np.any(np.abs(source.weights - 1.0 / n) > 1e-12) or np.any(
        np.abs(target.weights - 1.0 / n) > 1e-12
    ):
        raise UnequalMassError(
            "auction needs equally many atoms on both sides, all of weight 1/N"
        )
    if cost.shape != (n, n):
        raise DimensionMismatchError(f"cost matrix {cost.shape} does not match size {n}")

    c_mat = cost.entries
    benefit = -c_mat
    eps_final = _final_epsilon(c_mat, n)
    c_max = float(c_mat.max())
    prices = np.zeros(n)
    rounds = 0
    total_bids = 0
    if epsilon_scaling and c_max > 0:
        eps = c_max / 2.0
        while True:
            assigned, bids = _auction_round(benefit, prices, eps)
            rounds += 1
            total_bids += bids
            if eps <= eps_final:
                break
            eps = max(eps / EPS_SHRINK, eps_final)
    else:
        assigned, total_bids = _auction_round(benefit, prices, eps_final)
        rounds = 1

    rows = np.arange(n, dtype=np.int64)
    masses = np.full(n, 1.0 / n)
    total = float(c_mat[rows, assigned].sum() / n)
    return TransportPlan(
        rows,
        assigned,
        masses,
        n,
        n,
        total,
        info={
            "method": "auction",
            "rounds": rounds,
            "iterations": total_bids,
            "final_epsilon": eps_final,
        },
    )
