"""Coarse-to-fine transportation solver for grid densities.

Both densities are aggregated (mass sums over 2x2 blocks per axis) down
to a coarsest grid, the dense problem is solved there, and each
refinement re-solves a problem restricted to the children of the
previous support dilated by ``neighbor_radius`` cells per side.  Every
refined level is warm-started from the projected coarse plan, so the
simplex only polishes an already near-optimal basis.  A final pricing
pass over the full dense arc set certifies optimality of the finest
plan (and finishes the optimization in the rare case the support
assumption failed), so the returned cost matches a direct dense solve.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError, InfeasibleError, RangeError, RefinementInfeasibleError
from ..measures import GridDensity
from .plan import TransportPlan
from .simplex import (
    connect_forest,
    dense_initial_basis,
    northwest_corner,
    perturbed_marginals,
    simplex_arcs,
    tree_masses,
)

#: restricted problems above this many dense pairs skip the certification pass
CERTIFY_ARC_LIMIT = 4_000_000


@dataclass(frozen=True)
class MultiscaleConfig:
    """Knobs of the coarse-to-fine scheme (refinement factor is fixed at 2)."""

    coarsest_cells: int = 8
    neighbor_radius: int = 1

    def __post_init__(self):
        if self.coarsest_cells < 2:
            raise RangeError("coarsest_cells must be at least 2")
        if self.neighbor_radius < 1:
            raise RangeError("neighbor_radius must be at least 1")

    @property
    def refinement_factor(self):
        return 2


class _Level:
    """Nonzero atoms of one side at one scale."""

    def __init__(self, mass_grid, spacing, origin, level):
        self.shape = mass_grid.shape
        flat = mass_grid.ravel()
        self.atom_cells = np.flatnonzero(flat > 0)
        self.mass = flat[self.atom_cells]
        self.multi = np.stack(np.unravel_index(self.atom_cells, self.shape), axis=1)
        step = np.asarray(spacing) * (2 ** level)
        start = np.asarray(origin) + (2 ** level - 1) * np.asarray(spacing) / 2.0
        self.centers = start + self.multi * step
        # atom index lookup by flat cell id
        self.atom_of_cell = np.full(flat.size, -1, dtype=np.int64)
        self.atom_of_cell[self.atom_cells] = np.arange(self.atom_cells.size)

    @property
    def n(self):
        return self.atom_cells.size


def _block_sum(mass, d):
    shape = []
    for s in mass.shape:
        shape.extend([s // 2, 2])
    return mass.reshape(shape).sum(axis=tuple(range(1, 2 * d, 2)))


def _n_levels(shape_a, shape_b, coarsest):
    levels = 0
    sa, sb = list(shape_a), list(shape_b)
    while (
        all(s % 2 == 0 and s // 2 >= coarsest for s in sa)
        and all(s % 2 == 0 and s // 2 >= coarsest for s in sb)
    ):
        sa = [s // 2 for s in sa]
        sb = [s // 2 for s in sb]
        levels += 1
    return levels


def _pair_cost(centers_a, centers_b, ia, jb, p_order):
    diff = centers_a[ia] - centers_b[jb]
    sq = np.einsum("ij,ij->i", diff, diff)
    if p_order == 2:
        return sq
    if p_order == 1:
        return np.sqrt(sq)
    return sq ** (p_order / 2.0)


def _dilate_pairs(sup_a, sup_b, shape_a, shape_b, radius, d):
    """All (cellA, cellB) multi-index pairs within Chebyshev ``radius``."""
    offsets = np.array(list(itertools.product(range(-radius, radius + 1), repeat=d)))
    a = (sup_a[:, None, :] + offsets[None, :, :]).reshape(-1, d)
    b = np.repeat(sup_b, offsets.shape[0], axis=0)
    a2 = np.repeat(a, offsets.shape[0], axis=0)
    b2 = (b[:, None, :] + offsets[None, :, :]).reshape(-1, d)
    ok = np.ones(a2.shape[0], dtype=bool)
    for ax in range(d):
        ok &= (a2[:, ax] >= 0) & (a2[:, ax] < shape_a[ax])
        ok &= (b2[:, ax] >= 0) & (b2[:, ax] < shape_b[ax])
    return a2[ok], b2[ok]


def _children(multi, d):
    """Fine multi-indices (2^d per cell) of coarse cells, stacked."""
    offs = np.array(list(itertools.product((0, 1), repeat=d)))
    return (2 * multi[:, None, :] + offs[None, :, :]).reshape(-1, d)


def _basicify(n_rows, n_cols, arc_masses):
    """Turn a feasible sparse flow into an acyclic (forest) flow.

    ``arc_masses`` maps ``(i, j)`` to mass.  Cycles are cancelled by
    draining the off-forest arc around its tree cycle; a forest arc that
    empties first swaps out instead.  Returns the forest as a dict.
    """
    items = sorted(arc_masses.items(), key=lambda kv: (-kv[1], kv[0]))
    parent = list(range(n_rows + n_cols))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj = [[] for _ in range(n_rows + n_cols)]
    forest = {}
    extras = []
    for (i, j), m in items:
        a, b = i, n_rows + j
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            forest[(i, j)] = m
            adj[a].append(b)
            adj[b].append(a)
        else:
            extras.append(((i, j), m))

    for (i, j), m in extras:
        a, b = i, n_rows + j
        # tree path a -> b
        prev = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                break
            for y in adj[x]:
                if y not in prev:
                    prev[y] = x
                    stack.append(y)
        if b not in prev:
            # the swaps moved these endpoints into different components
            forest[(i, j)] = m
            adj[a].append(b)
            adj[b].append(a)
            continue
        path_nodes = [b]
        while path_nodes[-1] != a:
            path_nodes.append(prev[path_nodes[-1]])
        path_nodes.reverse()  # a ... b
        path_arcs = []
        for x, y in zip(path_nodes[:-1], path_nodes[1:]):
            r, c = (x, y - n_rows) if x < n_rows else (y, x - n_rows)
            path_arcs.append((r, c))
        # draining (i, j) by delta adds delta on even path arcs, removes on odd
        limit = m
        limiting = None
        for k in range(1, len(path_arcs), 2):
            fm = forest[path_arcs[k]]
            if fm < limit:
                limit = fm
                limiting = path_arcs[k]
        for k, arc in enumerate(path_arcs):
            forest[arc] += limit if k % 2 == 0 else -limit
        if limiting is None:
            continue  # extra fully drained
        # swap: limiting leaves the forest, the extra joins with the rest
        del forest[limiting]
        la, lb = limiting[0], n_rows + limiting[1]
        adj[la].remove(lb)
        adj[lb].remove(la)
        forest[(i, j)] = m - limit
        adj[a].append(b)
        adj[b].append(a)
    return forest


def _spanning_connectors(n_rows, n_cols, forest):
    """Artificial (row, col) arcs joining forest components into one tree."""
    try:
        return connect_forest(n_rows, n_cols, forest)
    except RuntimeError as exc:
        raise RefinementInfeasibleError(str(exc)) from exc


def _solve_level(level_a, level_b, p_order, allowed=None, warm=None):
    """One level's transportation problem; returns (pairs, masses, pivots)."""
    pa, qb = level_a.mass, level_b.mass
    n_rows, n_cols = level_a.n, level_b.n
    if allowed is None:
        arc_ia = np.repeat(np.arange(n_rows, dtype=np.int64), n_cols)
        arc_jb = np.tile(np.arange(n_cols, dtype=np.int64), n_rows)
    else:
        arc_ia, arc_jb = allowed
    arc_cost = _pair_cost(level_a.centers, level_b.centers, arc_ia, arc_jb, p_order)
    c_big = (n_rows + n_cols + 3.0) * (float(arc_cost.max()) + 1.0) if arc_cost.size else 1.0

    if allowed is not None:
        key_table = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(arc_ia, arc_jb))}
        key_of = key_table.__getitem__
    else:
        key_of = lambda ij: ij[0] * n_cols + ij[1]  # noqa: E731 - dense arc index

    if warm is None:
        pp, qq = perturbed_marginals(pa, qb)
        rows0, cols0, mass0 = northwest_corner(pp, qq)
        if allowed is None:
            basis0 = [i * n_cols + j for i, j in zip(rows0, cols0)]
        else:
            basis0 = []
            extra_i, extra_j, extra_c = [], [], []
            for i, j in zip(rows0, cols0):
                k = key_table.get((i, j))
                if k is None:
                    k = arc_ia.size + len(extra_i)
                    extra_i.append(i)
                    extra_j.append(j)
                    extra_c.append(c_big)
                basis0.append(k)
            if extra_i:
                arc_ia = np.concatenate([arc_ia, np.asarray(extra_i, dtype=np.int64)])
                arc_jb = np.concatenate([arc_jb, np.asarray(extra_j, dtype=np.int64)])
                arc_cost = np.concatenate([arc_cost, np.asarray(extra_c)])
        basis, _, pivots = simplex_arcs(pp, qq, arc_ia, arc_jb, arc_cost, basis0, mass0)
    else:
        forest = _basicify(n_rows, n_cols, warm)
        connectors = _spanning_connectors(n_rows, n_cols, forest)
        basis0, mass0 = [], []
        for (i, j), m in sorted(forest.items()):
            basis0.append(key_of((i, j)))
            mass0.append(m)
        if connectors:
            start = arc_ia.size
            arc_ia = np.concatenate([arc_ia, np.asarray([c[0] for c in connectors], dtype=np.int64)])
            arc_jb = np.concatenate([arc_jb, np.asarray([c[1] for c in connectors], dtype=np.int64)])
            arc_cost = np.concatenate([arc_cost, np.full(len(connectors), c_big)])
            basis0.extend(range(start, start + len(connectors)))
            mass0.extend([0.0] * len(connectors))
        basis, _, pivots = simplex_arcs(pa, qb, arc_ia, arc_jb, arc_cost, basis0, mass0)

    b_i = np.asarray([int(arc_ia[e]) for e in basis])
    b_j = np.asarray([int(arc_jb[e]) for e in basis])
    masses = tree_masses(n_rows, n_cols, b_i, b_j, pa, qb)
    big_used = [e for e, m in zip(basis, masses) if arc_cost[e] >= c_big and m > 1e-11]
    if allowed is not None and big_used:
        raise RefinementInfeasibleError("restricted problem kept mass on artificial arcs")
    keep = masses > 0
    return (b_i[keep], b_j[keep]), masses[keep], pivots


def solve_multiscale(
    source: GridDensity,
    target: GridDensity,
    p: float = 2.0,
    config: MultiscaleConfig | None = None,
    certify: bool = True,
) -> TransportPlan:
    """Optimal transport between grid densities by multiscale refinement.

    The returned plan indexes the nonzero cells of each grid in C order
    (the same atom order as ``measures.as_discrete``).  With ``certify``
    (default) the finest solution is re-priced against the full dense
    arc set, which guarantees the cost matches a direct LP solve.
    """
    if config is None:
        config = MultiscaleConfig()
    if source.dim != target.dim:
        raise DimensionMismatchError("grids must share the ambient dimension")
    if abs(source.total_mass - 1.0) > 1e-9 or abs(target.total_mass - 1.0) > 1e-9:
        raise InfeasibleError("densities must be normalized to unit mass")
    d = source.dim

    n_levels = _n_levels(source.dims, target.dims, config.coarsest_cells)
    pyramids = []
    for gd in (source, target):
        masses = [gd.values * gd.cell_volume]
        for _ in range(n_levels):
            masses.append(_block_sum(masses[-1], d))
        pyramids.append(
            [_Level(m, gd.spacing, gd.origin, lvl) for lvl, m in enumerate(masses)]
        )
    src_levels, tgt_levels = pyramids

    total_pivots = 0
    level = n_levels
    (pairs_i, pairs_j), masses, pivots = _solve_level(
        src_levels[level], tgt_levels[level], p
    )
    total_pivots += pivots

    radius = config.neighbor_radius
    while level > 0:
        la_c, lb_c = src_levels[level], tgt_levels[level]
        la_f, lb_f = src_levels[level - 1], tgt_levels[level - 1]
        attempt_radius = radius
        for attempt in range(2):
            sup_a = la_c.multi[pairs_i]
            sup_b = lb_c.multi[pairs_j]
            dil_a, dil_b = _dilate_pairs(sup_a, sup_b, la_c.shape, lb_c.shape, attempt_radius, d)
            # dedupe coarse pairs before expanding to children
            enc = (
                np.ravel_multi_index(dil_a.T, la_c.shape).astype(np.int64)
                * np.int64(np.prod(lb_c.shape))
                + np.ravel_multi_index(dil_b.T, lb_c.shape)
            )
            uniq = np.unique(enc)
            ca = np.stack(
                np.unravel_index(uniq // np.int64(np.prod(lb_c.shape)), la_c.shape), axis=1
            )
            cb = np.stack(
                np.unravel_index(uniq % np.int64(np.prod(lb_c.shape)), lb_c.shape), axis=1
            )
            n_child = 2 ** d
            fine_a = _children(ca, d)
            fine_b = _children(cb, d)
            ia = la_f.atom_of_cell[np.ravel_multi_index(fine_a.T, la_f.shape)]
            jb = lb_f.atom_of_cell[np.ravel_multi_index(fine_b.T, lb_f.shape)]
            ia = ia.reshape(-1, n_child)
            jb = jb.reshape(-1, n_child)
            pair_ia = np.repeat(ia, n_child, axis=1).ravel()
            pair_jb = np.tile(jb, (1, n_child)).ravel()
            ok = (pair_ia >= 0) & (pair_jb >= 0)
            enc_f = pair_ia[ok] * np.int64(lb_f.n) + pair_jb[ok]
            enc_f = np.unique(enc_f)
            allowed = (enc_f // np.int64(lb_f.n), enc_f % np.int64(lb_f.n))

            warm = {}
            for ai, bj, g in zip(pairs_i, pairs_j, masses):
                ch_a = la_f.atom_of_cell[
                    np.ravel_multi_index(_children(la_c.multi[ai : ai + 1], d).T, la_f.shape)
                ]
                ch_b = lb_f.atom_of_cell[
                    np.ravel_multi_index(_children(lb_c.multi[bj : bj + 1], d).T, lb_f.shape)
                ]
                ch_a = ch_a[ch_a >= 0]
                ch_b = ch_b[ch_b >= 0]
                xa = la_f.mass[ch_a]
                xb = lb_f.mass[ch_b]
                xa = xa * (g / xa.sum())
                xb = xb * (g / xb.sum())
                r0, c0, m0 = northwest_corner(xa, xb)
                for r, c, m in zip(r0, c0, m0):
                    key = (int(ch_a[r]), int(ch_b[c]))
                    warm[key] = warm.get(key, 0.0) + m
            try:
                (pairs_i, pairs_j), masses, pivots = _solve_level(
                    la_f, lb_f, p, allowed=allowed, warm=warm
                )
                total_pivots += pivots
                break
            except RefinementInfeasibleError:
                if attempt == 1:
                    raise
                attempt_radius += 1
        level -= 1

    certified = False
    la, lb = src_levels[0], tgt_levels[0]
    if certify and la.n * lb.n <= CERTIFY_ARC_LIMIT:
        warm = {
            (int(i), int(j)): float(m) for i, j, m in zip(pairs_i, pairs_j, masses)
        }
        (pairs_i, pairs_j), masses, pivots = _solve_level(
            la, lb, p, allowed=None, warm=warm
        )
        total_pivots += pivots
        certified = True

    cost = float(np.sum(_pair_cost(la.centers, lb.centers, pairs_i, pairs_j, p) * masses))
    return TransportPlan(
        pairs_i,
        pairs_j,
        masses,
        la.n,
        lb.n,
        cost,
        info={
            "method": "multiscale",
            "levels": n_levels,
            "iterations": total_pivots,
            "certified": certified,
        },
    )
