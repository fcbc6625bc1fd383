"""Primal transportation simplex on an explicit arc list.

The solver works on a caller-supplied list of admissible arcs so the
same core serves both the dense Kantorovich problem and the
support-restricted subproblems of the multiscale scheme.  Marginals are
perturbed lexicographically before the dense solve (row ``i`` gains
``(i+1) * 1e-12``, compensated on the last column) so every pivot makes
strict progress; the perturbation is removed from the reported masses by
re-solving the final basis tree against the original marginals.
"""

import numpy as np

from ..errors import DimensionMismatchError, InfeasibleError
from ..measures import CostMatrix, DiscreteMeasure
from .plan import TransportPlan

#: lexicographic degeneracy perturbation
PERTURB = 1e-12

#: marginal balance tolerance for the probability-measure precondition
BALANCE_TOL = 1e-9


def northwest_corner(p, q):
    """Initial basic solution; returns (rows, cols, masses) of M+N-1 arcs."""
    m_cnt, n_cnt = len(p), len(q)
    rows, cols, masses = [], [], []
    i = j = 0
    rem_p, rem_q = p[0], q[0]
    while True:
        take = rem_p if rem_p <= rem_q else rem_q
        rows.append(i)
        cols.append(j)
        masses.append(take)
        rem_p -= take
        rem_q -= take
        if i == m_cnt - 1 and j == n_cnt - 1:
            break
        if rem_p <= rem_q and i < m_cnt - 1:
            i += 1
            rem_p = p[i]
        else:
            j += 1
            rem_q = q[j]
    return rows, cols, masses


def least_cost_allocation(p, q, cost_flat, n_cols):
    """Greedy cheapest-cell allocation; a near-optimal acyclic start.

    Each allocation exhausts at least one marginal, so the support is a
    forest; with perturbed (tie-free) marginals it is a spanning tree.
    Returns (rows, cols, masses).
    """
    order = np.argsort(cost_flat, kind="stable")
    rem_p = np.asarray(p, dtype=np.float64).copy()
    rem_q = np.asarray(q, dtype=np.float64).copy()
    target = rem_p.size + rem_q.size - 1
    rows, cols, masses = [], [], []
    live = rem_p.size + rem_q.size
    for e in order:
        i = int(e) // n_cols
        j = int(e) - i * n_cols
        a, b = rem_p[i], rem_q[j]
        if a <= 0.0 or b <= 0.0:
            continue
        take = a if a <= b else b
        rows.append(i)
        cols.append(j)
        masses.append(take)
        rem_p[i] = a - take
        rem_q[j] = b - take
        live -= (rem_p[i] <= 0.0) + (rem_q[j] <= 0.0)
        if live == 0 or len(rows) == target:
            break
    return rows, cols, masses


def connect_forest(n_rows, n_cols, arcs):
    """(row, col) pairs that join the forest's components into one tree.

    ``arcs`` is an iterable of (row, col) pairs.  Components are merged
    through sample nodes, deterministically.
    """
    parent = list(range(n_rows + n_cols))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in arcs:
        parent[find(i)] = find(n_rows + j)
    samples = {}  # root -> [sample_row, sample_col]
    for i in range(n_rows):
        s = samples.setdefault(find(i), [None, None])
        if s[0] is None:
            s[0] = i
    for j in range(n_cols):
        s = samples.setdefault(find(n_rows + j), [None, None])
        if s[1] is None:
            s[1] = j
    ordered = [samples[r] for r in sorted(samples)]
    pool_row, pool_col = ordered[0]
    connectors = []
    pending = ordered[1:]
    while pending:
        rest = []
        progressed = False
        for row_s, col_s in pending:
            if row_s is not None and pool_col is not None:
                connectors.append((row_s, pool_col))
            elif col_s is not None and pool_row is not None:
                connectors.append((pool_row, col_s))
            else:
                rest.append((row_s, col_s))
                continue
            pool_row = pool_row if pool_row is not None else row_s
            pool_col = pool_col if pool_col is not None else col_s
            progressed = True
        if not progressed and rest:
            raise RuntimeError("cannot connect basis components")
        pending = rest
    return connectors


def dense_initial_basis(p, q, cost_flat, n_cols):
    """Least-cost spanning-tree start for a dense problem.

    Returns (basis_arc_indices, basis_masses) over the dense arc
    numbering ``i * n_cols + j``.
    """
    rows, cols, masses = least_cost_allocation(p, q, cost_flat, n_cols)
    extra = connect_forest(len(p), n_cols, zip(rows, cols))
    for i, j in extra:
        rows.append(i)
        cols.append(j)
        masses.append(0.0)
    basis = [i * n_cols + j for i, j in zip(rows, cols)]
    return basis, masses


def _dfs_duals(adj, arc_cost, arc_i, arc_j, n_rows, n_nodes):
    """Duals, parent pointers and preorder from one DFS over the basis tree."""
    du = np.zeros(n_nodes)
    parent_node = np.full(n_nodes, -1, dtype=np.int64)
    parent_arc = np.full(n_nodes, -1, dtype=np.int64)
    seen = np.zeros(n_nodes, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        a = stack.pop()
        da = du[a]
        for b, e in adj[a]:
            if not seen[b]:
                seen[b] = True
                du[b] = arc_cost[e] - da
                parent_node[b] = a
                parent_arc[b] = e
                stack.append(b)
    return du, parent_node, parent_arc


def _path_to_root(node, parent_node, parent_arc):
    nodes, arcs = [node], []
    while parent_node[node] >= 0:
        arcs.append(parent_arc[node])
        node = parent_node[node]
        nodes.append(node)
    return nodes, arcs


def _cycle_arcs(row_node, col_node, parent_node, parent_arc):
    """Arcs on the tree path from ``col_node`` back to ``row_node``."""
    na, aa = _path_to_root(row_node, parent_node, parent_arc)
    nb, ab = _path_to_root(col_node, parent_node, parent_arc)
    pos_a = {n: k for k, n in enumerate(na)}
    k = next(i for i, n in enumerate(nb) if n in pos_a)
    lca_in_a = pos_a[nb[k]]
    # path col -> lca -> row
    return ab[:k] + aa[:lca_in_a][::-1]


def simplex_arcs(p, q, arc_i, arc_j, arc_cost, basis_arcs, basis_mass, pricing="dantzig"):
    """Optimize a basic feasible solution over the supplied arcs in place.

    ``basis_arcs`` must index a spanning tree of the bipartite node set
    and ``basis_mass`` must be the (nonnegative) tree flow for marginals
    ``p``, ``q``.  Returns ``(basis_arcs, basis_mass, n_pivots)``.
    """
    n_rows = len(p)
    n_nodes = n_rows + len(q)
    tol = 1e-11 * max(1.0, float(arc_cost.max() if arc_cost.size else 0.0))
    basis_arcs = list(basis_arcs)
    basis_mass = np.asarray(basis_mass, dtype=np.float64).copy()
    pos_of_arc = {e: k for k, e in enumerate(basis_arcs)}

    adj = [[] for _ in range(n_nodes)]
    for e in basis_arcs:
        a, b = int(arc_i[e]), n_rows + int(arc_j[e])
        adj[a].append((b, e))
        adj[b].append((a, e))

    pivots = 0
    stalled = 0
    max_pivots = 100 * n_nodes + 10000
    while True:
        du, parent_node, parent_arc = _dfs_duals(adj, arc_cost, arc_i, arc_j, n_rows, n_nodes)
        red = arc_cost - du[arc_i] - du[n_rows + arc_j]
        if pricing == "dantzig":
            enter = int(np.argmin(red))
            if red[enter] >= -tol:
                break
        else:  # bland: lowest-index improving arc
            worse = np.flatnonzero(red < -tol)
            if worse.size == 0:
                break
            enter = int(worse[0])

        row_node = int(arc_i[enter])
        col_node = n_rows + int(arc_j[enter])
        path = _cycle_arcs(row_node, col_node, parent_node, parent_arc)
        # entering arc gets +theta; path arcs alternate starting with -theta
        minus = path[0::2]
        theta = np.inf
        leave = -1
        for e in minus:
            m = basis_mass[pos_of_arc[e]]
            if m < theta:
                theta = m
                leave = e
        for k, e in enumerate(path):
            basis_mass[pos_of_arc[e]] += theta if k % 2 else -theta
        # swap leaving arc for entering arc
        k = pos_of_arc.pop(leave)
        pos_of_arc[enter] = k
        basis_arcs[k] = enter
        basis_mass[k] = theta
        la, lb = int(arc_i[leave]), n_rows + int(arc_j[leave])
        adj[la].remove((lb, leave))
        adj[lb].remove((la, leave))
        adj[row_node].append((col_node, enter))
        adj[col_node].append((row_node, enter))

        pivots += 1
        stalled = stalled + 1 if theta <= PERTURB * 0.25 else 0
        if pricing == "dantzig" and stalled > 2 * n_nodes + 10:
            pricing = "bland"
            stalled = 0
        if pivots > max_pivots:
            raise RuntimeError("transportation simplex exceeded its pivot budget")
    return basis_arcs, basis_mass, pivots


def tree_masses(n_rows, n_cols, basis_i, basis_j, p, q):
    """Unique tree flow for the given spanning tree, by leaf elimination."""
    n_nodes = n_rows + n_cols
    n_arcs = len(basis_i)
    adj = [[] for _ in range(n_nodes)]
    for k in range(n_arcs):
        a, b = int(basis_i[k]), n_rows + int(basis_j[k])
        adj[a].append((b, k))
        adj[b].append((a, k))
    rem = np.concatenate([p, q]).astype(np.float64)
    deg = np.array([len(a) for a in adj])
    used = np.zeros(n_arcs, dtype=bool)
    masses = np.zeros(n_arcs)
    leaves = [n for n in range(n_nodes) if deg[n] == 1]
    while leaves:
        leaf = leaves.pop()
        if deg[leaf] != 1:
            continue
        other = arc = None
        for b, k in adj[leaf]:
            if not used[k]:
                other, arc = b, k
                break
        if arc is None:
            continue
        used[arc] = True
        masses[arc] = rem[leaf]
        rem[other] -= rem[leaf]
        rem[leaf] = 0.0
        deg[leaf] -= 1
        deg[other] -= 1
        if deg[other] == 1:
            leaves.append(other)
    return masses


def perturbed_marginals(p, q):
    """Lexicographic anti-degeneracy perturbation of balanced marginals."""
    m_cnt = len(p)
    pp = p + PERTURB * (np.arange(m_cnt) + 1.0)
    qq = q.astype(np.float64).copy()
    qq[-1] += PERTURB * (m_cnt * (m_cnt + 1) / 2.0)
    return pp, qq


def solve_lp(source: DiscreteMeasure, target: DiscreteMeasure, cost: CostMatrix) -> TransportPlan:
    """Exact optimal transport plan by the transportation simplex.

    Both measures must be probability measures (total mass one within
    1e-9); anything else signals a normalization bug upstream and raises
    :class:`InfeasibleError`.  The returned plan is an optimal vertex of
    the transportation polytope and is deterministic: entering arcs are
    chosen by most-negative reduced cost with lowest-index tie-breaking.
    """
    p = np.asarray(source.weights, dtype=np.float64)
    q = np.asarray(target.weights, dtype=np.float64)
    n_rows, n_cols = p.size, q.size
    if cost.shape != (n_rows, n_cols):
        raise DimensionMismatchError(
            f"cost matrix {cost.shape} does not match measures ({n_rows}, {n_cols})"
        )
    if abs(p.sum() - 1.0) > BALANCE_TOL or abs(q.sum() - 1.0) > BALANCE_TOL:
        raise InfeasibleError(
            "marginals must each sum to 1 within 1e-9; normalize the measures first"
        )
    c_mat = cost.entries
    arc_i = np.repeat(np.arange(n_rows, dtype=np.int64), n_cols)
    arc_j = np.tile(np.arange(n_cols, dtype=np.int64), n_rows)
    arc_cost = np.ascontiguousarray(c_mat.ravel())

    pp, qq = perturbed_marginals(p, q)
    basis0, mass0 = dense_initial_basis(pp, qq, arc_cost, n_cols)
    basis, _, pivots = simplex_arcs(pp, qq, arc_i, arc_j, arc_cost, basis0, mass0)

    b_i = [e // n_cols for e in basis]
    b_j = [e % n_cols for e in basis]
    masses = tree_masses(n_rows, n_cols, b_i, b_j, p, q)
    masses = np.where(masses > 0, masses, 0.0)
    keep = masses > 0
    rows = np.asarray(b_i, dtype=np.int64)[keep]
    cols = np.asarray(b_j, dtype=np.int64)[keep]
    kept = masses[keep]
    total = float(np.sum(c_mat[rows, cols] * kept))
    return TransportPlan(
        rows, cols, kept, n_rows, n_cols, total,
        info={"method": "lp", "iterations": pivots},
    )
