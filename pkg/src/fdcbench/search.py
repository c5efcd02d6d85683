"""Finding (k, r)-decompositions: an exhaustive oracle and greedy heuristics.

Pieces are always the r-components of the color classes, so a search only
has to choose a coloring.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotFound, TooLarge
from .metric import Subspace, component_labels
from .witness import Bounded, DecompositionWitness, verify_witness

EXHAUSTIVE = "exhaustive"
HEURISTIC = "heuristic"
AUTO = "auto"


@dataclass
class SearchBudget:
    max_k: int = 8
    max_points: int = 12
    mode: str = AUTO


def witness_from_coloring(S, coloring, r, D, k=None):
    """Witness whose pieces are the r-components of each color class."""
    labels = {}
    colors = sorted(set(coloring))
    for c in colors:
        pts = [p for p, x in zip(S.pts, coloring) if x == c]
        sub = Subspace(S.ambient, pts)
        _, lab = component_labels(S.ambient, sub.idx, r)
        first = {}
        for p, t in zip(sub.pts, lab):
            labels[p] = (c, first.setdefault(int(t), len(first)))
    k = k if k is not None else (max(colors) + 1 if colors else 1)
    return DecompositionWitness(S, k, r, labels, Bounded(D))


def _dist_rows(S):
    m = S.matrix
    return [[int(v) if isinstance(v, np.integer) else v for v in row] for row in m]


def _search(dist, n, k, r, D):
    """Lexicographically smallest coloring with at most ``k`` colors, or None.

    Color classes only gain points, so an r-component whose diameter already
    exceeds ``D`` can never recover; that prunes the branch.  Colors are
    tried in restricted-growth order, which keeps the lexicographic minimum.
    """
    coloring = [-1] * n
    members = [[] for _ in range(k)]

    def ok(p, c):
        group = members[c]
        comp = [p]
        seen = {p}
        i = 0
        while i < len(comp):
            u = comp[i]
            du = dist[u]
            for v in group:
                if v not in seen and du[v] <= r:
                    seen.add(v)
                    comp.append(v)
            i += 1
        for a in range(len(comp)):
            da = dist[comp[a]]
            for b in range(a + 1, len(comp)):
                if da[comp[b]] > D:
                    return False
        return True

    def rec(i, used):
        if i == n:
            return True
        for c in range(min(used + 1, k)):
            if ok(i, c):
                coloring[i] = c
                members[c].append(i)
                if rec(i + 1, max(used, c + 1)):
                    return True
                members[c].pop()
        coloring[i] = -1
        return False

    return list(coloring) if rec(0, 0) else None


def oracle_min_k(S, r, D, max_k=None, max_points=12):
    """Smallest ``k`` admitting a ``(k, r)``-decomposition of ``S`` over Bounded(D).

    Returns ``(k, witness)``; the witness uses the lexicographically smallest
    valid coloring at that ``k``.
    """
    n = len(S)
    if n > max_points:
        raise TooLarge(f"{n} points exceeds the exhaustive cutoff of {max_points}")
    if n == 0:
        return 1, DecompositionWitness(S, 1, r, {}, Bounded(D))
    max_k = n if max_k is None else max_k
    dist = _dist_rows(S)
    for k in range(1, max_k + 1):
        coloring = _search(dist, n, k, r, D)
        if coloring is not None:
            return k, witness_from_coloring(S, coloring, r, D, k)
    raise NotFound(f"no (k, {r})-decomposition over Bounded({D}) with k <= {max_k}")


# -------------------------------------------------------------- heuristics

def _greedy_color(close):
    """Smallest-available-color greedy coloring of a boolean conflict matrix."""
    m = close.shape[0]
    color = [-1] * m
    for i in range(m):
        taken = {color[j] for j in np.nonzero(close[i])[0] if color[j] >= 0 and j != i}
        c = 0
        while c in taken:
            c += 1
        color[i] = c
    return color


def net_coloring(S, r, D):
    """Ball pieces around a maximal D/2-separated net, greedily colored."""
    M = S.matrix
    n = len(S)
    centers = []
    for i in range(n):
        if all(2 * M[i, c] > D for c in centers):
            centers.append(i)
    cidx = np.array(centers, dtype=np.int64)
    to_center = M[:, cidx]
    near = (2 * to_center <= D).astype(bool)
    # first center in net order that covers the point; maximality guarantees one
    owner = np.argmax(near, axis=1)
    pieces = [np.nonzero(owner == t)[0] for t in range(len(centers))]
    m = len(pieces)
    gap = np.empty((m, m), dtype=object if M.dtype == object else M.dtype)
    rowmin = np.stack([M[P].min(axis=0) for P in pieces])
    for j, P in enumerate(pieces):
        gap[:, j] = rowmin[:, P].min(axis=1)
    close = (gap <= r).astype(bool)
    piece_color = _greedy_color(close)
    coloring = [0] * n
    for t, P in enumerate(pieces):
        for i in P:
            coloring[i] = piece_color[t]
    return coloring


def first_fit_coloring(S, r, D):
    """Put each point in the first color whose r-components stay within D."""
    M = S.matrix
    n = len(S)
    comps = []  # per color: list of [indices array, diameter]
    coloring = [0] * n
    for p in range(n):
        placed = False
        for c, clist in enumerate(comps):
            near = [t for t, (idx, _) in enumerate(clist) if M[p, idx].min() <= r]
            if not near:
                merged, diam = np.array([p]), 0
            elif len(near) == 1:
                idx, dd = clist[near[0]]
                merged = np.append(idx, p)
                diam = max(dd, M[p, idx].max())
            else:
                merged = np.concatenate([clist[t][0] for t in near] + [np.array([p])])
                diam = M[np.ix_(merged, merged)].max()
            if diam <= D:
                keep = [x for t, x in enumerate(clist) if t not in near]
                comps[c] = keep + [[merged, diam]]
                coloring[p] = c
                placed = True
                break
        if not placed:
            comps.append([[np.array([p]), 0]])
            coloring[p] = len(comps) - 1
    return coloring


def heuristic_decompose(S, r, D):
    """Best verified witness from the net and first-fit constructions."""
    if len(S) == 0:
        return DecompositionWitness(S, 1, r, {}, Bounded(D))
    best = None
    for build in (net_coloring, first_fit_coloring):
        w = witness_from_coloring(S, build(S, r, D), r, D)
        if verify_witness(w).valid and (best is None or w.k < best.k):
            best = w
    if best is None:
        raise NotFound(f"heuristics found no valid decomposition at r={r}, D={D}")
    return best


# ---------------------------------------------------------------- profiles

@dataclass
class ProfileRow:
    r: object
    D: object
    k: int
    witness: DecompositionWitness
    mode: str

    def as_tuple(self):
        return (self.r, self.k)


def default_d_rule(r):
    return 2 * r


def asdim_profile(S, scales, d_rule=None, mode=AUTO, max_points=12, max_k=None):
    """Minimal (or best heuristic) color count at each scale."""
    if d_rule is None:
        d_rule = default_d_rule
    elif isinstance(d_rule, dict):
        d_rule = d_rule.__getitem__
    rows = []
    for r in scales:
        D = d_rule(r)
        use_oracle = mode == EXHAUSTIVE or (mode == AUTO and len(S) <= max_points)
        if use_oracle:
            k, w = oracle_min_k(S, r, D, max_k=max_k, max_points=max_points)
            rows.append(ProfileRow(r, D, k, w, EXHAUSTIVE))
        else:
            w = heuristic_decompose(S, r, D)
            rows.append(ProfileRow(r, D, w.k, w, HEURISTIC))
    return rows
