"""Exact discrete Kantorovich solvers.

``solve_lp`` runs a transportation simplex on the dense problem,
``solve_multiscale`` refines coarse solutions on grid densities, and
``solve_auction`` handles the equal-weight assignment special case.
"""

from .plan import TransportPlan
from .simplex import solve_lp
from .multiscale import MultiscaleConfig, solve_multiscale
from .auction import solve_auction

__all__ = [
    "TransportPlan",
    "solve_lp",
    "MultiscaleConfig",
    "solve_multiscale",
    "solve_auction",
]
