"""Exact finite metric spaces, subspaces, families and coarse maps.

Distances are integers or :class:`fractions.Fraction`; nothing here ever
touches floating point, so strict tests like ``d(A, B) > r`` are exact.
"""
from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Hashable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (AmbientMismatch, DisconnectedGraph, EmptySet,
                     MetricAxiomViolation, NotSubspace)

Point = Hashable


def _exact(d):
    if isinstance(d, (bool, np.bool_)):
        raise MetricAxiomViolation(f"distance {d!r} is not a number")
    if isinstance(d, (int, np.integer)):
        return int(d)
    if isinstance(d, Fraction):
        return d.numerator if d.denominator == 1 else d
    if isinstance(d, str):
        return _exact(Fraction(d))
    raise MetricAxiomViolation(f"distance {d!r} is not an exact integer or rational")


def _as_matrix(rows):
    """Integer matrices become int64 arrays, anything rational stays object."""
    n = len(rows)
    if all(isinstance(v, int) for row in rows for v in row):
        return np.array(rows, dtype=np.int64).reshape(n, n)
    m = np.empty((n, n), dtype=object)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            m[i, j] = v
    return m


class FiniteMetricSpace:
    """An immutable finite metric space backed by a dense distance matrix."""

    def __init__(self, id, points, matrix, graph_edges=None):
        self.id = str(id)
        self.points = tuple(points)
        self.index = {p: i for i, p in enumerate(self.points)}
        if len(self.index) != len(self.points):
            raise MetricAxiomViolation(f"space {self.id}: duplicate point ids")
        self.matrix = matrix
        self.matrix.flags.writeable = False
        # kept for DOT export and JSON round trips of graph-backed spaces
        self.graph_edges = None if graph_edges is None else tuple(graph_edges)
        self.extra = {}

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"FiniteMetricSpace({self.id!r}, n={len(self)})"

    def d(self, x, y):
        v = self.matrix[self.index[x], self.index[y]]
        return int(v) if isinstance(v, np.integer) else v

    def indices(self, pts):
        return np.fromiter((self.index[p] for p in pts), dtype=np.int64)

    def block(self, idx_a, idx_b=None):
        if idx_b is None:
            idx_b = idx_a
        return self.matrix[np.ix_(idx_a, idx_b)]

    @cached_property
    def diameter(self):
        return _max(self.matrix) if len(self) else 0

    def whole(self):
        return Subspace(self, self.points)

    def subspace(self, pts):
        return Subspace(self, pts)

    def validate(self):
        m = self.matrix
        n = len(self)
        for i in range(n):
            if m[i, i] != 0:
                raise MetricAxiomViolation(f"d({self.points[i]!r}, {self.points[i]!r}) = {m[i, i]} != 0")
        for i, j in zip(*np.nonzero(m != m.T)):
            raise MetricAxiomViolation(
                f"asymmetric pair ({self.points[i]!r}, {self.points[j]!r}): {m[i, j]} != {m[j, i]}")
        off = ~np.eye(n, dtype=bool)
        bad = np.argwhere(off & (m <= 0).astype(bool))
        if len(bad):
            i, j = bad[0]
            raise MetricAxiomViolation(
                f"d({self.points[i]!r}, {self.points[j]!r}) = {m[i, j]} must be > 0")
        for k in range(n):
            viol = (m > m[:, [k]] + m[[k], :]).astype(bool)
            if viol.any():
                i, j = np.argwhere(viol)[0]
                raise MetricAxiomViolation(
                    f"triangle inequality fails on ({self.points[i]!r}, {self.points[k]!r}, "
                    f"{self.points[j]!r}): {m[i, j]} > {m[i, k]} + {m[k, j]}")
        return self


def _max(a):
    v = a.max() if a.size else 0
    return int(v) if isinstance(v, np.integer) else v


def _min(a):
    v = a.min()
    return int(v) if isinstance(v, np.integer) else v


class Subspace:
    """A subset of an ambient space with the induced metric."""

    def __init__(self, ambient, pts):
        index = ambient.index
        seen = set()
        for p in pts:
            if p not in index:
                raise NotSubspace(f"point {p!r} is not in space {ambient.id}")
            seen.add(p)
        self.ambient = ambient
        self.pts = tuple(sorted(seen, key=index.__getitem__))

    @cached_property
    def idx(self):
        return self.ambient.indices(self.pts)

    @cached_property
    def pointset(self):
        return frozenset(self.pts)

    @cached_property
    def key(self):
        return (self.ambient.id, self.pointset)

    def __len__(self):
        return len(self.pts)

    def __iter__(self):
        return iter(self.pts)

    def __contains__(self, p):
        return p in self.pointset

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        body = ", ".join(map(repr, self.pts[:6])) + (", ..." if len(self.pts) > 6 else "")
        return f"Subspace({self.ambient.id}: {{{body}}})"

    def d(self, x, y):
        return self.ambient.d(x, y)

    @cached_property
    def matrix(self):
        return self.ambient.block(self.idx)

    @cached_property
    def diameter(self):
        return _max(self.matrix) if len(self) else 0

    def issubset(self, other):
        return self.ambient.id == other.ambient.id and self.pointset <= other.pointset

    def restrict(self, pts):
        return Subspace(self.ambient, [p for p in pts if p in self.pointset])

    def union(self, other):
        _same_ambient(self, other)
        return Subspace(self.ambient, self.pointset | other.pointset)

    def minus(self, other):
        _same_ambient(self, other)
        return Subspace(self.ambient, self.pointset - other.pointset)

    def intersect(self, other):
        _same_ambient(self, other)
        return Subspace(self.ambient, self.pointset & other.pointset)


def _same_ambient(a, b):
    if a.ambient.id != b.ambient.id:
        raise AmbientMismatch(f"subspaces live in {a.ambient.id} and {b.ambient.id}")


@dataclass
class MetricFamily:
    members: list
    bound: object = None

    def __post_init__(self):
        self.members = list(self.members)
        if self.bound is not None:
            for m in self.members:
                if m.diameter > self.bound:
                    raise MetricAxiomViolation(
                        f"family member {m!r} has diameter {m.diameter} > bound {self.bound}")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def key(self):
        """Set-level identity; empty members are ignored everywhere."""
        return frozenset(m.key for m in self.members if len(m))

    def same_as(self, other):
        return self.key == other.key

    def sup_diameter(self):
        return max((m.diameter for m in self.members), default=0)


# ---------------------------------------------------------------- builders

def build_space(points, distances, id="X", validate=True):
    """Build a space from a total table of pairwise distances.

    ``distances`` is either a mapping ``{(u, v): d}`` or an iterable of
    ``(u, v, d)`` triples; each unordered pair must appear.
    """
    points = list(points)
    index = {p: i for i, p in enumerate(points)}
    if len(index) != len(points):
        raise MetricAxiomViolation("duplicate point ids")
    items = distances.items() if isinstance(distances, dict) else (((u, v), d) for u, v, d in distances)
    n = len(points)
    rows = [[0] * n for _ in range(n)]
    given = set()
    for (u, v), d in items:
        if u not in index or v not in index:
            raise MetricAxiomViolation(f"distance given for unknown pair ({u!r}, {v!r})")
        d = _exact(d)
        i, j = index[u], index[v]
        if i == j:
            if d != 0:
                raise MetricAxiomViolation(f"d({u!r}, {u!r}) = {d} != 0")
            continue
        pair = (min(i, j), max(i, j))
        if pair in given and rows[i][j] != d:
            raise MetricAxiomViolation(f"asymmetric pair ({u!r}, {v!r}): {rows[i][j]} != {d}")
        given.add(pair)
        rows[i][j] = rows[j][i] = d
    for i, j in combinations(range(n), 2):
        if (i, j) not in given:
            raise MetricAxiomViolation(f"missing distance for pair ({points[i]!r}, {points[j]!r})")
    space = FiniteMetricSpace(id, points, _as_matrix(rows))
    return space.validate() if validate else space


def space_from_matrix(points, matrix, id="X", validate=True, graph_edges=None):
    rows = [[_exact(v) for v in row] for row in matrix]
    space = FiniteMetricSpace(id, points, _as_matrix(rows), graph_edges=graph_edges)
    return space.validate() if validate else space


def bfs_distances(vertices, adjacency, source):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def graph_metric(vertices, edges, id="G"):
    """Shortest-path hop metric of a connected undirected graph."""
    vertices = list(vertices)
    index = {v: i for i, v in enumerate(vertices)}
    edges = [tuple(e) for e in edges]
    n = len(vertices)
    rows, cols = [], []
    for u, v in edges:
        if u not in index or v not in index:
            raise DisconnectedGraph(f"edge ({u!r}, {v!r}) mentions an unknown vertex")
        if u != v:
            rows += [index[u], index[v]]
            cols += [index[v], index[u]]
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    if n:
        ncomp, labels = connected_components(adj, directed=False)
        if ncomp > 1:
            other = vertices[int(np.argmax(labels != labels[0]))]
            raise DisconnectedGraph(f"graph {id} is disconnected: {vertices[0]!r} cannot reach {other!r}")
    matrix = _hop_matrix(adj)
    return FiniteMetricSpace(id, vertices, matrix, graph_edges=edges)


def _hop_matrix(adj):
    """All-pairs BFS on a CSR adjacency; exact integers."""
    from scipy.sparse.csgraph import shortest_path
    n = adj.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    d = shortest_path(adj, method="D", unweighted=True, directed=False)
    return d.astype(np.int64)


def path_space(n, id=None):
    return graph_metric(range(n), [(i, i + 1) for i in range(n - 1)], id=id or f"P{n}")


def grid_space(w, h=None, id=None):
    h = w if h is None else h
    verts = [f"{x},{y}" for y in range(h) for x in range(w)]
    edges = []
    for y in range(h):
        for x in range(w):
            if x + 1 < w:
                edges.append((f"{x},{y}", f"{x + 1},{y}"))
            if y + 1 < h:
                edges.append((f"{x},{y}", f"{x},{y + 1}"))
    return graph_metric(verts, edges, id=id or f"grid{w}x{h}")


def cycle_space(n, id=None):
    return graph_metric(range(n), [(i, (i + 1) % n) for i in range(n)], id=id or f"C{n}")


def complete_space(n, id=None):
    return graph_metric(range(n), list(combinations(range(n), 2)), id=id or f"K{n}")


# ------------------------------------------------------------- operations

def set_distance(A, B):
    _same_ambient(A, B)
    if not len(A) or not len(B):
        raise EmptySet("set distance needs two nonempty sets")
    return _min(A.ambient.block(A.idx, B.idx))


def component_labels(space, idx, r):
    """Connected components of ``dist <= r`` on the points ``idx``."""
    if len(idx) == 0:
        return 0, np.zeros(0, dtype=np.int64)
    close = (space.block(idx) <= r).astype(bool)
    return connected_components(csr_matrix(close), directed=False)


def r_components(S, r):
    """Partition ``S`` into classes of the transitive closure of ``d <= r``.

    Classes are ordered by their first point in ambient order.
    """
    n, labels = component_labels(S.ambient, S.idx, r)
    groups = {}
    for p, lab in zip(S.pts, labels):
        groups.setdefault(int(lab), []).append(p)
    return [Subspace(S.ambient, g) for g in groups.values()]


# ----------------------------------------------------------- coarse maps

@dataclass(frozen=True)
class Modulus:
    """A monotone step function given by breakpoints ``(t, value)``.

    ``m(d)`` is the value at the largest breakpoint ``t <= d``; the last
    value extends rightward and the first extends leftward.
    """

    table: tuple

    def __init__(self, table):
        table = tuple(sorted((_exact(t), _exact(v)) for t, v in table))
        if not table:
            raise ValueError("empty modulus table")
        vals = [v for _, v in table]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("modulus table must be nondecreasing")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_keys", [t for t, _ in table])

    def __call__(self, d):
        i = bisect.bisect_right(self._keys, d) - 1
        return self.table[max(i, 0)][1]

    @classmethod
    def identity(cls, upto):
        return cls([(t, t) for t in range(int(upto) + 1)])

    @classmethod
    def from_function(cls, f, upto):
        return cls([(t, f(t)) for t in range(int(upto) + 1)])

    def apply(self, arr):
        keys = np.array(self._keys, dtype=object if any(isinstance(k, Fraction) for k in self._keys) else np.int64)
        vals = [v for _, v in self.table]
        pos = np.searchsorted(keys, arr, side="right") - 1
        pos = np.clip(pos, 0, len(vals) - 1)
        return np.array(vals, dtype=object if any(isinstance(v, Fraction) for v in vals) else np.int64)[pos]


@dataclass
class CoarseMapWitness:
    source: FiniteMetricSpace
    target: FiniteMetricSpace
    map: dict
    rho_plus: Modulus = None
    rho_minus: Modulus = None
    contractive: bool = False

    def image_indices(self, pts=None):
        pts = self.source.points if pts is None else pts
        return self.target.indices(self.map[p] for p in pts)


@dataclass
class CoarseMapReport:
    valid: bool
    contractive: bool
    upper_violations: list = field(default_factory=list)
    lower_violations: list = field(default_factory=list)
    contraction_violations: list = field(default_factory=list)
    missing: list = field(default_factory=list)

    def as_dict(self):
        return {"valid": self.valid, "contractive": self.contractive,
                "upper_violations": [list(map(str, v)) for v in self.upper_violations],
                "lower_violations": [list(map(str, v)) for v in self.lower_violations],
                "contraction_violations": [list(map(str, v)) for v in self.contraction_violations],
                "missing": [str(p) for p in self.missing]}


def check_coarse_map(w, max_listed=20):
    """Check every modulus inequality of ``w`` over all source pairs."""
    missing = [p for p in w.source.points if p not in w.map or w.map[p] not in w.target.index]
    if missing:
        return CoarseMapReport(False, False, missing=missing[:max_listed])
    src = w.source.matrix
    img = w.image_indices()
    tgt = w.target.matrix[np.ix_(img, img)]
    pts = w.source.points

    def pairs(mask):
        ii, jj = np.nonzero(np.triu(mask.astype(bool), 1))
        return [(pts[i], pts[j], src[i, j], tgt[i, j]) for i, j in zip(ii[:max_listed], jj[:max_listed])]

    upper = pairs(tgt > w.rho_plus.apply(src)) if w.rho_plus is not None else []
    lower = pairs(w.rho_minus.apply(src) > tgt) if w.rho_minus is not None else []
    shrink = tgt > src
    is_contractive = not shrink.astype(bool).any()
    contraction = pairs(shrink) if w.contractive else []
    valid = not (upper or lower or contraction)
    return CoarseMapReport(valid, is_contractive, upper, lower, contraction)
