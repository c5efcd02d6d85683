"""Word-metric windows of groups with closed-form geodesic normal forms.

Supported: free groups, free abelian groups, finite cyclic groups, and free
products of these (relatively hyperbolic relative to their factors).
Generators are lowercase letters, inverses uppercase; the identity is "e".
Factors of a free product use consecutive letters.
"""
from __future__ import annotations

import string
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import BudgetExceeded, LeavesWindow, MalformedElement, NoPeripherals
from .metric import FiniteMetricSpace, Subspace

LETTERS = string.ascii_lowercase


class _Group:
    peripherals = ()

    def letters(self):
        return [(i, s) for i in range(self.ngens) for s in (1, -1)]

    def generators(self):
        """The symmetric generating set S, deduplicated, in letter order."""
        out = []
        for i, s in self.letters():
            g = self.gen_element(i, s)
            if g != self.identity() and g not in out:
                out.append(g)
        return out

    def name(self, g, offset=0):
        if g == self.identity():
            return "e"
        return "".join(LETTERS[offset + i] if s > 0 else LETTERS[offset + i].upper()
                       for i, s in self.word(g, offset=0))

    def parse(self, name):
        name = name.strip()
        g = self.identity()
        if name in ("e", ""):
            return g
        for ch in name:
            i = LETTERS.find(ch.lower())
            if i < 0 or i >= self.ngens:
                raise MalformedElement(f"letter {ch!r} is not a generator of {self.label}")
            g = self.mul(g, self.gen_element(i, 1 if ch.islower() else -1))
        return g

    def distance(self, g, h):
        return self.length(self.mul(self.inv(g), h))

    def sort_key(self, g):
        return (self.length(g), self.key(g))


@dataclass(frozen=True)
class Free(_Group):
    rank: int

    @property
    def ngens(self):
        return self.rank

    @property
    def label(self):
        return f"F{self.rank}"

    def identity(self):
        return ()

    def gen_element(self, i, s):
        return ((i + 1) * s,)

    def check(self, g):
        if not isinstance(g, tuple) or any(not isinstance(x, int) or x == 0 or abs(x) > self.rank for x in g):
            raise MalformedElement(f"{g!r} is not a word over F{self.rank}")
        if any(a == -b for a, b in zip(g, g[1:])):
            raise MalformedElement(f"{g!r} is not freely reduced")

    def mul(self, g, h):
        out = list(g)
        for x in h:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def inv(self, g):
        return tuple(-x for x in reversed(g))

    def length(self, g):
        return len(g)

    def distance(self, g, h):
        c = 0
        for a, b in zip(g, h):
            if a != b:
                break
            c += 1
        return len(g) + len(h) - 2 * c

    def word(self, g, offset=0):
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in g]

    def key(self, g):
        # a < A < b < B ...
        return tuple(2 * (abs(x) - 1) + (x < 0) for x in g)


@dataclass(frozen=True)
class FreeAbelian(_Group):
    rank: int

    @property
    def ngens(self):
        return self.rank

    @property
    def label(self):
        return f"Z^{self.rank}"

    def identity(self):
        return (0,) * self.rank

    def gen_element(self, i, s):
        v = [0] * self.rank
        v[i] = s
        return tuple(v)

    def check(self, g):
        if not isinstance(g, tuple) or len(g) != self.rank or not all(isinstance(x, int) for x in g):
            raise MalformedElement(f"{g!r} is not an exponent vector of length {self.rank}")

    def mul(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def inv(self, g):
        return tuple(-a for a in g)

    def length(self, g):
        return sum(abs(a) for a in g)

    def distance(self, g, h):
        return sum(abs(a - b) for a, b in zip(g, h))

    def word(self, g, offset=0):
        return [(i, 1 if a > 0 else -1) for i, a in enumerate(g) for _ in range(abs(a))]

    def key(self, g):
        return tuple((abs(a), a < 0) for a in g)


@dataclass(frozen=True)
class Cyclic(_Group):
    m: int

    @property
    def ngens(self):
        return 1 if self.m > 1 else 0

    @property
    def label(self):
        return f"Z/{self.m}"

    def identity(self):
        return 0

    def gen_element(self, i, s):
        return s % self.m

    def check(self, g):
        if not isinstance(g, int) or not 0 <= g < self.m:
            raise MalformedElement(f"{g!r} is not a residue mod {self.m}")

    def mul(self, g, h):
        return (g + h) % self.m

    def inv(self, g):
        return (-g) % self.m

    def length(self, g):
        return min(g, self.m - g)

    def word(self, g, offset=0):
        return [(0, 1)] * g if g <= self.m - g else [(0, -1)] * (self.m - g)

    def key(self, g):
        return (self.length(g), g > self.m - g)


@dataclass(frozen=True)
class FreeProduct(_Group):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if sum(f.ngens for f in self.factors) > len(LETTERS):
            raise ValueError("too many generators")

    @property
    def ngens(self):
        return sum(f.ngens for f in self.factors)

    @property
    def label(self):
        return "*".join(f.label if not isinstance(f, FreeProduct) else f"({f.label})" for f in self.factors)

    @property
    def peripherals(self):
        return tuple(range(len(self.factors)))

    @cached_property
    def _offsets(self):
        out, t = [], 0
        for f in self.factors:
            out.append(t)
            t += f.ngens
        return out

    def _locate(self, i):
        for j, f in enumerate(self.factors):
            if self._offsets[j] <= i < self._offsets[j] + f.ngens:
                return j, i - self._offsets[j]
        raise MalformedElement(f"generator index {i} out of range")

    def identity(self):
        return ()

    def embed(self, j, x):
        return () if x == self.factors[j].identity() else ((j, x),)

    def gen_element(self, i, s):
        j, loc = self._locate(i)
        return self.embed(j, self.factors[j].gen_element(loc, s))

    def check(self, g):
        if not isinstance(g, tuple):
            raise MalformedElement(f"{g!r} is not a syllable sequence")
        for t, syl in enumerate(g):
            if not (isinstance(syl, tuple) and len(syl) == 2 and 0 <= syl[0] < len(self.factors)):
                raise MalformedElement(f"bad syllable {syl!r}")
            f = self.factors[syl[0]]
            f.check(syl[1])
            if syl[1] == f.identity():
                raise MalformedElement(f"trivial syllable in {g!r}")
            if t and g[t - 1][0] == syl[0]:
                raise MalformedElement(f"adjacent syllables from one factor in {g!r}")

    def mul(self, g, h):
        out = list(g)
        for j, x in h:
            if out and out[-1][0] == j:
                y = self.factors[j].mul(out[-1][1], x)
                if y == self.factors[j].identity():
                    out.pop()
                else:
                    out[-1] = (j, y)
            else:
                out.append((j, x))
        return tuple(out)

    def inv(self, g):
        return tuple((j, self.factors[j].inv(x)) for j, x in reversed(g))

    def length(self, g):
        return sum(self.factors[j].length(x) for j, x in g)

    def distance(self, g, h):
        c = 0
        for a, b in zip(g, h):
            if a != b:
                break
            c += 1
        rest_g = sum(self.factors[j].length(x) for j, x in g[c + 1:])
        rest_h = sum(self.factors[j].length(x) for j, x in h[c + 1:])
        if c < len(g) and c < len(h) and g[c][0] == h[c][0]:
            j = g[c][0]
            return rest_g + rest_h + self.factors[j].distance(g[c][1], h[c][1])
        mid = 0
        if c < len(g):
            mid += self.factors[g[c][0]].length(g[c][1])
        if c < len(h):
            mid += self.factors[h[c][0]].length(h[c][1])
        return rest_g + rest_h + mid

    def word(self, g, offset=0):
        return [(self._offsets[j] + i, s) for j, x in g for i, s in self.factors[j].word(x)]

    def key(self, g):
        return tuple((j, self.factors[j].key(x)) for j, x in g)

    def syllables(self, g):
        return len(g)

    def coset_key(self, g, i):
        """Identifies the left coset g H_i: g with a trailing H_i-syllable removed."""
        return g[:-1] if g and g[-1][0] == i else g

    def factor_of(self, g):
        """Index of the factor containing g != e, else None."""
        return g[0][0] if len(g) == 1 else None


# -------------------------------------------------------------- spec JSON

def spec_from_json(obj):
    v = obj["variant"]
    if v == "free":
        return Free(int(obj["rank"]))
    if v == "free_abelian":
        return FreeAbelian(int(obj["rank"]))
    if v == "cyclic":
        return Cyclic(int(obj["m"]))
    if v == "free_product":
        return FreeProduct(tuple(spec_from_json(f) for f in obj["factors"]))
    raise ValueError(f"unknown group variant {v!r}")


def spec_to_json(spec):
    if isinstance(spec, Free):
        return {"variant": "free", "rank": spec.rank}
    if isinstance(spec, FreeAbelian):
        return {"variant": "free_abelian", "rank": spec.rank}
    if isinstance(spec, Cyclic):
        return {"variant": "cyclic", "m": spec.m}
    return {"variant": "free_product", "factors": [spec_to_json(f) for f in spec.factors]}


def word_length(spec, g):
    spec.check(g)
    return spec.length(g)


# ---------------------------------------------------------------- windows

def word_matrix(spec, els):
    n = len(els)
    m = np.zeros((n, n), dtype=np.int64)
    dist = spec.distance
    for i in range(n):
        gi = els[i]
        row = m[i]
        for j in range(i + 1, n):
            row[j] = dist(gi, els[j])
    return m + m.T


def word_space(spec, names, id):
    """Word-metric space on named elements, rebuilt from the group description alone."""
    space = FiniteMetricSpace(id, list(names), word_matrix(spec, [spec.parse(s) for s in names]))
    space.extra["group"] = spec
    return space


@dataclass(frozen=True)
class Coset:
    rep: str
    members: tuple


class GroupWindow:
    """All elements of word length <= N, with exact d_S and the relative graph.

    ``max_syllables`` (free products only) additionally keeps just the
    elements with at most that many syllables; the result is still closed
    under prefixes of normal forms, so BFS depth equals word length.
    """

    truncated = True

    def __init__(self, spec, N, elements, max_syllables=None):
        self.spec = spec
        self.N = N
        self.max_syllables = max_syllables
        self.elements = elements
        self.index = {g: i for i, g in enumerate(elements)}
        self.names = [spec.name(g) for g in elements]
        self.name_index = {s: i for i, s in enumerate(self.names)}
        self.lengths = np.array([spec.length(g) for g in elements], dtype=np.int64)
        suffix = f"s{max_syllables}" if max_syllables is not None else ""
        self.id = f"{spec.label}|N{N}{suffix}"
        self._spaces = {}

    def __len__(self):
        return len(self.elements)

    def __contains__(self, name):
        return name in self.name_index

    def element(self, name):
        i = self.name_index.get(name)
        return self.elements[i] if i is not None else self.spec.parse(name)

    @property
    def has_peripherals(self):
        return bool(self.spec.peripherals)

    # -- word metric
    def s_distance(self, x, y):
        return self.spec.distance(self.element(x), self.element(y))

    def s_matrix(self, names):
        return word_matrix(self.spec, [self.element(s) for s in names])

    def space_on(self, names, id):
        """Finite metric space on ``names`` carrying the exact word metric."""
        if id in self._spaces:
            return self._spaces[id]
        names = sorted(set(names), key=lambda s: self.spec.sort_key(self.element(s)))
        space = FiniteMetricSpace(id, names, self.s_matrix(names))
        space.extra["group"] = self.spec
        self._spaces[id] = space
        return space

    def s_space(self):
        return self.space_on(self.names, self.id)

    # -- relative graph
    def coset_groups(self, i):
        if not self.has_peripherals:
            raise NoPeripherals(f"{self.spec.label} has no peripheral subgroups")
        groups = {}
        for t, g in enumerate(self.elements):
            groups.setdefault(self.spec.coset_key(g, i), []).append(t)
        return groups

    @cached_property
    def s_edges(self):
        out = set()
        gens = self.spec.generators()
        for t, g in enumerate(self.elements):
            for s in gens:
                u = self.index.get(self.spec.mul(g, s))
                if u is not None and u != t:
                    out.add((min(t, u), max(t, u)))
        return sorted(out)

    @cached_property
    def h_edges(self):
        """``(t, u, i)`` for every pair in a common coset of H_i."""
        out = []
        for i in self.spec.peripherals:
            for members in self.coset_groups(i).values():
                for a in range(len(members)):
                    for b in range(a + 1, len(members)):
                        out.append((members[a], members[b], i))
        return out

    @cached_property
    def _rel_adjacency(self):
        if not self.has_peripherals:
            raise NoPeripherals(f"{self.spec.label} has no peripheral subgroups")
        pairs = list(self.s_edges) + [(t, u) for t, u, _ in self.h_edges]
        rows = [t for t, u in pairs] + [u for t, u in pairs]
        cols = [u for t, u in pairs] + [t for t, u in pairs]
        n = len(self)
        return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))

    @cached_property
    def rel_from_identity(self):
        d = shortest_path(self._rel_adjacency, method="D", unweighted=True, directed=False, indices=0)
        return d.astype(np.int64)

    @cached_property
    def rel_matrix(self):
        d = shortest_path(self._rel_adjacency, method="D", unweighted=True, directed=False)
        return d.astype(np.int64)

    def rel_space(self):
        key = self.id + "|rel"
        if key not in self._spaces:
            space = FiniteMetricSpace(key, self.names, self.rel_matrix)
            space.extra["window"] = self
            self._spaces[key] = space
        return self._spaces[key]

    def sub_window(self, N):
        keep = [g for g in self.elements if self.spec.length(g) <= N]
        return GroupWindow(self.spec, N, keep, self.max_syllables)


def enumerate_ball(spec, N, budget=250_000, max_syllables=None):
    if N < 0:
        raise ValueError("radius must be nonnegative")
    gens = spec.generators()
    e = spec.identity()
    depth = {e: 0}
    queue = deque([e])
    while queue:
        g = queue.popleft()
        if depth[g] == N:
            continue
        for s in gens:
            h = spec.mul(g, s)
            if h in depth:
                continue
            if max_syllables is not None and spec.syllables(h) > max_syllables:
                continue
            depth[h] = depth[g] + 1
            if len(depth) > budget:
                raise BudgetExceeded(f"ball of radius {N} in {spec.label} exceeds {budget} elements")
            queue.append(h)
    for g, dd in depth.items():
        if dd != spec.length(g):
            raise AssertionError(f"normal-form length of {spec.name(g)} disagrees with BFS depth")
    elements = sorted(depth, key=spec.sort_key)
    return GroupWindow(spec, N, elements, max_syllables)


def relative_ball(window, n):
    """Elements within relative distance ``n`` of e, as a subspace with d_S."""
    if not window.has_peripherals:
        raise NoPeripherals(f"{window.spec.label} has no peripheral subgroups")
    names = [window.names[t] for t in np.nonzero(window.rel_from_identity <= n)[0]]
    space = window.space_on(names, f"{window.id}|B{n}")
    return space.whole()


def coset_partition(window, i, base):
    """Cosets rH_i ∩ window met by ``base``; representatives are shortest, then lexicographic."""
    groups = window.coset_groups(i)
    spec = window.spec
    keys = []
    for name in base:
        ck = spec.coset_key(window.element(name), i)
        if ck not in keys:
            keys.append(ck)
    out = []
    for ck in keys:
        members = groups.get(ck, [])
        names = tuple(window.names[t] for t in members)
        rep = min((window.elements[t] for t in members), key=spec.sort_key)
        out.append(Coset(spec.name(rep), names))
    out.sort(key=lambda c: spec.sort_key(window.element(c.rep)))
    return out


@dataclass(frozen=True)
class TranslationAction:
    """Left multiplication by a fixed group element."""

    spec: object
    element: object

    def apply(self, g):
        return self.spec.mul(self.element, g)

    def map_point(self, name):
        return self.spec.name(self.apply(self.spec.parse(name)))


def translate(window, g, X):
    """Left-translate the subspace ``X`` by ``g`` (a name or element)."""
    spec = window.spec
    if isinstance(g, str):
        g = window.element(g)
    act = TranslationAction(spec, g)
    out = []
    for name in X.pts:
        h = act.map_point(name)
        if h not in window:
            raise LeavesWindow(f"{spec.name(g)}·{name} = {h} leaves the window of radius {window.N}", point=name)
        out.append(h)
    ambient = X.ambient
    if all(h in ambient.index for h in out):
        return Subspace(ambient, out)
    return Subspace(window.s_space(), out)
