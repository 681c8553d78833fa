"""Yifan-Hu spring-electrical layout with Barnes-Hut repulsion.

Forces on the undirected projection, with optimal distance ``K``:

* attraction along each edge, magnitude ``d**2 / K``
* repulsion between every pair, magnitude ``C * K**2 / d``

Repulsion is approximated with a quadtree; the tree is traversed for all
query points at once, level by level, so the inner loops stay in numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ForwardGraph

AREA = 1e6
DEPTH = 16
JITTER = 1e-6
PROGRESS_STREAK = 5


@dataclass(frozen=True)
class LayoutParams:
    optimal_distance_scale: float = 1.0
    relative_strength: float = 0.2
    initial_step: float | None = None  # None: 10% of the layout side
    step_ratio: float = 0.95
    barnes_hut_theta: float = 1.2
    convergence_tolerance: float = 1e-4
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.step_ratio < 1:
            raise ValueError("step_ratio must be in (0, 1)")
        for name in ("optimal_distance_scale", "relative_strength", "barnes_hut_theta", "convergence_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.initial_step is not None and self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")

    def optimal_distance(self, n: int) -> float:
        return self.optimal_distance_scale * np.sqrt(AREA / max(n, 1))


@dataclass
class Layout:
    coordinates: dict[str, tuple[float, float]]
    iterations_used: int
    final_energy: float
    initial_energy: float = 0.0
    converged: bool = True


def _spread(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0xFFFFFFFF)
    v = (v | (v << np.uint64(16))) & np.uint64(0x0000FFFF0000FFFF)
    v = (v | (v << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    v = (v | (v << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    v = (v | (v << np.uint64(2))) & np.uint64(0x3333333333333333)
    v = (v | (v << np.uint64(1))) & np.uint64(0x5555555555555555)
    return v


def _compact(v: np.ndarray) -> np.ndarray:
    v = v & np.uint64(0x5555555555555555)
    v = (v | (v >> np.uint64(1))) & np.uint64(0x3333333333333333)
    v = (v | (v >> np.uint64(2))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    v = (v | (v >> np.uint64(4))) & np.uint64(0x00FF00FF00FF00FF)
    v = (v | (v >> np.uint64(8))) & np.uint64(0x0000FFFF0000FFFF)
    v = (v | (v >> np.uint64(16))) & np.uint64(0xFFFFFFFF)
    return v


def _ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenation of ``arange(s, s + c)`` for each pair."""
    first = np.repeat(starts - np.cumsum(counts) + counts, counts)
    return first + np.arange(int(counts.sum()))


def _csum(values: np.ndarray, groups: np.ndarray, size: int) -> np.ndarray:
    return np.bincount(groups, weights=values.real, minlength=size) + 1j * np.bincount(
        groups, weights=values.imag, minlength=size
    )


class QuadTree:
    """Point-region quadtree over unit-mass points, stored as flat arrays.

    Cells are numbered level by level; a cell's children are a contiguous
    block ``child_lo[c]:child_hi[c]`` and a cell's points are the contiguous
    block ``start[c]:end[c]`` of ``self.points`` (points sorted in Morton
    order). Each cell keeps complex moments about its centre of mass up to
    ``ORDER`` for the far-field expansion.

    Positions are handled as complex numbers: the repulsion ``(q - p) / |q -
    p|**2`` equals ``conj(1 / (q - p))``, which expands cleanly around a cell
    centre.
    """

    ORDER = 4
    bucket = 1

    def __init__(self, points: np.ndarray, depth: int = DEPTH):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) == 0:
            raise ValueError("points must be a non-empty (n, 2) array")
        self.depth = depth
        self.lo = points.min(axis=0)
        side = float((points.max(axis=0) - self.lo).max())
        self.side = side if side > 0 else 1.0
        codes = self.encode(points)
        self.order = np.argsort(codes, kind="stable")
        self.codes = codes[self.order]
        self.points = points[self.order]
        self.z = self.points[:, 0] + 1j * self.points[:, 1]
        n = len(points)

        levels, starts_all, ends_all, leaf_all, prefix_all = [], [], [], [], []
        settled = np.zeros(n, dtype=bool)
        for lvl in range(depth + 1):
            pref = self.codes >> np.uint64(2 * (depth - lvl))
            starts = np.flatnonzero(np.r_[True, pref[1:] != pref[:-1]])
            ends = np.r_[starts[1:], n]
            live = ~settled[starts]
            starts, ends = starts[live], ends[live]
            if starts.size == 0:
                break
            leaf = (ends - starts <= self.bucket) | (lvl == depth)
            settled[_ranges(starts[leaf], ends[leaf] - starts[leaf])] = True
            levels.append(np.full(starts.size, lvl))
            starts_all.append(starts)
            ends_all.append(ends)
            leaf_all.append(leaf)
            prefix_all.append(pref[starts])

        self.level = np.concatenate(levels)
        self.start = np.concatenate(starts_all)
        self.end = np.concatenate(ends_all)
        self.leaf = np.concatenate(leaf_all)
        self.prefix = np.concatenate(prefix_all)
        self.size = self.side / 2.0**self.level
        corner = self.prefix << (2 * (depth - self.level)).astype(np.uint64)
        cell = self.side / 2.0**depth
        self.box_lo = self.lo + np.column_stack(
            [_compact(corner).astype(float), _compact(corner >> np.uint64(1)).astype(float)]
        ) * cell

        ncell = len(self.start)
        counts = self.end - self.start
        self.mass = counts.astype(float)
        owner = np.repeat(np.arange(ncell), counts)
        member = _ranges(self.start, counts)
        rel = self.z[member] - self.lo[0] - 1j * self.lo[1]
        self.center = self.lo[0] + 1j * self.lo[1] + _csum(rel, owner, ncell) / self.mass
        offset = self.z[member] - self.center[owner]
        self.moments = []
        power = offset
        for _ in range(2, self.ORDER + 1):
            power = power * offset
            self.moments.append(_csum(power, owner, ncell))

        offsets = np.cumsum([0] + [len(s) for s in starts_all])
        self.child_lo = np.zeros(ncell, dtype=np.int64)
        self.child_hi = np.zeros(ncell, dtype=np.int64)
        for lvl in range(len(starts_all) - 1):
            here = slice(offsets[lvl], offsets[lvl + 1])
            nxt = starts_all[lvl + 1]
            self.child_lo[here] = offsets[lvl + 1] + np.searchsorted(nxt, self.start[here])
            self.child_hi[here] = offsets[lvl + 1] + np.searchsorted(nxt, self.end[here])
        self.child_lo[self.leaf] = self.child_hi[self.leaf] = 0

        # Flat per-cell arrays for the traversal: up to four child slots
        # (-1 when empty), box corner, and the point of single-point leaves.
        self.children = np.full((ncell, 4), -1, dtype=np.int64)
        nkids = self.child_hi - self.child_lo
        for j in range(4):
            has = nkids > j
            self.children[has, j] = self.child_lo[has] + j
        self.box_x = np.ascontiguousarray(self.box_lo[:, 0])
        self.box_y = np.ascontiguousarray(self.box_lo[:, 1])
        self.single = self.leaf & (counts == 1)
        self.single_z = np.where(self.single, self.z[np.minimum(self.start, n - 1)], 0)

    @property
    def com(self) -> np.ndarray:
        return np.column_stack([self.center.real, self.center.imag])

    def encode(self, points: np.ndarray) -> np.ndarray:
        cells = 2**self.depth
        q = np.floor((points - self.lo) / self.side * cells)
        q = np.clip(q, 0, cells - 1).astype(np.uint64)
        return _spread(q[:, 0]) | (_spread(q[:, 1]) << np.uint64(1))

    def repulsion(self, queries: np.ndarray, theta: float, strength: float = 1.0) -> np.ndarray:
        """Approximate ``sum_p strength * (q - p) / |q - p|**2`` for each query.

        A cell is summarised by its far-field expansion when ``size / gap <
        theta``, where ``gap`` is the distance from the query to the cell's
        box. A query inside or on the box has zero gap, so its own cells are
        always opened. Leaves are summed exactly; points coinciding with the
        query contribute nothing.
        """
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        nq = len(queries)
        qx, qy = queries[:, 0], queries[:, 1]
        zq = qx + 1j * qy
        theta2 = theta * theta
        hits, terms = [], []
        qi = np.arange(nq)
        ci = np.zeros(nq, dtype=np.int64)
        while qi.size:
            size = self.size[ci]
            dx = self.box_x[ci] - qx[qi]
            dx = np.maximum(np.maximum(dx, -dx - size), 0.0)
            dy = self.box_y[ci] - qy[qi]
            dy = np.maximum(np.maximum(dy, -dy - size), 0.0)
            leaf = self.leaf[ci]
            accept = ~leaf & (size * size < theta2 * (dx * dx + dy * dy))
            if accept.any():
                a, qa = ci[accept], qi[accept]
                u = 1.0 / (zq[qa] - self.center[a])
                series = np.zeros(a.size, dtype=complex)
                for moment in reversed(self.moments):
                    series = (series + moment[a]) * u
                hits.append(qa)
                terms.append((series * u + self.mass[a]) * u)
            if leaf.any():
                lq, lc = qi[leaf], ci[leaf]
                one = self.single[lc]
                if not one.all():
                    many_q, many_c = lq[~one], lc[~one]
                    counts = self.end[many_c] - self.start[many_c]
                    pq = np.repeat(many_q, counts)
                    diff = zq[pq] - self.z[_ranges(self.start[many_c], counts)]
                    ok = diff != 0
                    hits.append(pq[ok])
                    terms.append(1.0 / diff[ok])
                    lq, lc = lq[one], lc[one]
                diff = zq[lq] - self.single_z[lc]
                ok = diff != 0
                hits.append(lq[ok])
                terms.append(1.0 / diff[ok])
            opened = ~(leaf | accept)
            kids = self.children[ci[opened]].ravel()
            owners = np.repeat(qi[opened], 4)
            keep = kids >= 0
            qi, ci = owners[keep], kids[keep]
        total = np.zeros(nq, dtype=complex)
        if hits:
            total = _csum(np.concatenate(terms), np.concatenate(hits), nq)
        total = strength * np.conj(total)
        return np.column_stack([total.real, total.imag])

    def self_repulsion(self, theta: float, strength: float = 1.0) -> np.ndarray:
        """Repulsion on every tree point from all the others, in input order."""
        forces = self.repulsion(self.points, theta, strength)
        out = np.empty_like(forces)
        out[self.order] = forces
        return out


def quadtree_force(points, query, theta: float, strength: float = 1.0) -> np.ndarray:
    """Barnes-Hut repulsion on one query point; ``theta=0`` gives the exact sum."""
    tree = QuadTree(np.asarray(points, dtype=float))
    return tree.repulsion(np.asarray(query, dtype=float).reshape(1, 2), theta, strength)[0]


def exact_repulsion(points: np.ndarray, strength: float = 1.0) -> np.ndarray:
    """O(n^2) repulsion on every point from all the others."""
    points = np.asarray(points, dtype=float)
    d = points[:, None, :] - points[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(dist2, np.inf)
    dist2[dist2 == 0] = np.inf
    return strength * np.einsum("ijk,ij->ik", d, 1.0 / dist2)


def _undirected_edges(graph: ForwardGraph) -> np.ndarray:
    idx = graph.index
    pairs = {tuple(sorted((idx[s], idx[t]))) for s, t in graph.edges if s != t}
    return np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)


def _separate(pos: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Nudge exactly coincident points apart with a tiny seeded perturbation."""
    while True:
        _, first, counts = np.unique(pos, axis=0, return_index=True, return_counts=True)
        if len(first) == len(pos):
            return pos
        dup = np.ones(len(pos), dtype=bool)
        dup[first] = False
        pos[dup] += rng.uniform(-1, 1, size=(int(dup.sum()), 2)) * scale


def spring_electrical_forces(
    pos: np.ndarray,
    edges: np.ndarray,
    k: float,
    strength: float,
    theta: float,
) -> np.ndarray:
    n = len(pos)
    forces = QuadTree(pos).self_repulsion(theta, strength * k * k)
    if len(edges):
        i, j = edges[:, 0], edges[:, 1]
        d = pos[j] - pos[i]
        pull = d * (np.sqrt(np.einsum("ij,ij->i", d, d)) / k)[:, None]
        forces[:, 0] += np.bincount(i, weights=pull[:, 0], minlength=n) - np.bincount(j, weights=pull[:, 0], minlength=n)
        forces[:, 1] += np.bincount(i, weights=pull[:, 1], minlength=n) - np.bincount(j, weights=pull[:, 1], minlength=n)
    return forces


def yifan_hu(graph: ForwardGraph, params: LayoutParams | None = None) -> Layout:
    """Force-directed layout with the adaptive step-length schedule.

    The step grows after ``PROGRESS_STREAK`` consecutive energy decreases and
    shrinks by ``step_ratio`` whenever the energy rises. Iteration stops when
    the relative energy change or the total displacement (relative to ``K``)
    falls below ``convergence_tolerance``, or after ``max_iterations``.
    """
    params = params or LayoutParams()
    n = graph.node_count
    if n == 0:
        raise ValueError("cannot lay out an empty graph")
    if n == 1:
        return Layout({graph.ids[0]: (0.0, 0.0)}, 0, 0.0, 0.0, True)

    rng = np.random.default_rng(params.seed)
    side = np.sqrt(AREA)
    k = params.optimal_distance(n)
    pos = rng.uniform(-side / 2, side / 2, size=(n, 2))
    pos = _separate(pos, JITTER * k, rng)
    edges = _undirected_edges(graph)
    step = params.initial_step if params.initial_step is not None else 0.1 * side
    tol = params.convergence_tolerance

    energy = np.inf
    initial_energy = None
    progress = 0
    converged = False
    it = 0
    while it < params.max_iterations:
        it += 1
        forces = spring_electrical_forces(pos, edges, k, params.relative_strength, params.barnes_hut_theta)
        norms = np.sqrt(np.einsum("ij,ij->i", forces, forces))
        energy0, energy = energy, float(np.dot(norms, norms))
        if initial_energy is None:
            initial_energy = energy
        moving = norms > 0
        move = np.zeros_like(pos)
        move[moving] = step * forces[moving] / norms[moving, None]
        pos = pos + move
        displacement = float(np.sqrt(np.einsum("ij,ij->", move, move)))

        if energy < energy0:
            progress += 1
            if progress >= PROGRESS_STREAK:
                progress = 0
                step /= params.step_ratio
        else:
            progress = 0
            step *= params.step_ratio

        if np.isfinite(energy0) and energy0 > 0 and abs(energy - energy0) / energy0 < tol:
            converged = True
            break
        if displacement < k * tol:
            converged = True
            break

    pos = _separate(pos, JITTER * k, rng)
    final = spring_electrical_forces(pos, edges, k, params.relative_strength, params.barnes_hut_theta)
    final_energy = float(np.einsum("ij,ij->", final, final))
    coords = {key: (float(x), float(y)) for key, (x, y) in zip(graph.ids, pos)}
    return Layout(coords, it, final_energy, initial_energy if initial_energy is not None else final_energy, converged)
