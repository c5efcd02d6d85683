"""Decomposition witnesses, chains, their verifiers, and certificate rewrites.

A witness labels each point of a (sub)space with ``(color, piece)``.  It is
valid when the labels cover the space, same-colored pieces are pairwise more
than ``r`` apart, and every piece is accepted by the target class.  Chains
are sequences of family-level witnesses whose pieces feed the next step.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from math import floor

import numpy as np

from .errors import (AmbientMismatch, BadK, FamilyMismatch, InvalidInput,
                     ModulusMissing, NotSeparated, NotSubspace, ScaleCollapse,
                     ScaleMismatch, ScaleOrderViolation, TargetClash)
from .metric import MetricFamily, Subspace, component_labels, set_distance


# ------------------------------------------------------------ target classes

@dataclass(frozen=True)
class Bounded:
    D: object

    def accepts(self, piece):
        return piece.diameter <= self.D

    def describe(self):
        return f"Bounded({self.D})"


class _MemberTarget:
    kind = ""

    def __init__(self, members):
        self.members = tuple(members)

    def __eq__(self, other):
        return type(self) is type(other) and self.keys == other.keys

    def __hash__(self):
        return hash((type(self), self.keys))

    def __repr__(self):
        return f"{type(self).__name__}({len(self.members)} members)"

    @cached_property
    def keys(self):
        return frozenset(m.key for m in self.members)

    @cached_property
    def _by_point(self):
        index = {}
        for i, m in enumerate(self.members):
            for p in m.pts:
                index.setdefault((m.ambient.id, p), []).append(i)
        return index

    def describe(self):
        return f"{self.kind}({len(self.members)} members)"


class Explicit(_MemberTarget):
    """Accepts a piece iff it equals a listed member as a point set."""

    kind = "Explicit"

    def accepts(self, piece):
        return not len(piece) or piece.key in self.keys


class ClosureOf(_MemberTarget):
    """Accepts a piece iff it is contained in some listed member."""

    kind = "ClosureOf"

    def accepts(self, piece):
        if not len(piece):
            return True
        first = (piece.ambient.id, piece.pts[0])
        return any(piece.pointset <= self.members[i].pointset
                   for i in self._by_point.get(first, ()))


def subspace_closure(fam):
    return ClosureOf(fam.members)


def _describe(target):
    return "unconstrained" if target is None else target.describe()


# ------------------------------------------------------------------ witness

def _piece_order(label):
    c, j = label
    return (c, (0, j) if isinstance(j, int) else (1, str(j)))


@dataclass
class DecompositionWitness:
    space: Subspace
    k: int
    r: object
    labels: dict
    target: object = None  # None: pieces unconstrained (chain steps link explicitly)

    @cached_property
    def pieces(self):
        """``{(color, piece_id): Subspace}`` in color / piece order."""
        groups = {}
        for p in self.space.pts:
            if p in self.labels:
                groups.setdefault(tuple(self.labels[p]), []).append(p)
        return {lab: Subspace(self.space.ambient, groups[lab])
                for lab in sorted(groups, key=_piece_order)}

    def color_class(self, c):
        return Subspace(self.space.ambient, [p for p in self.space.pts if self.labels.get(p, (None,))[0] == c])

    def pieces_family(self):
        return MetricFamily([P for P in self.pieces.values() if len(P)])

    def piece_of(self, p):
        return self.pieces[tuple(self.labels[p])]

    def canonical(self):
        """Same witness with piece ids renumbered 0.. within each color."""
        labels = {}
        count = {}
        for (c, j), P in self.pieces.items():
            n = count.get(c, 0)
            count[c] = n + 1
            for p in P.pts:
                labels[p] = (c, n)
        return replace(self, labels=labels)

    def with_scale(self, r):
        return replace(self, r=r)


@dataclass
class Violation:
    kind: str
    message: str
    data: dict = field(default_factory=dict)

    def as_dict(self):
        return {"kind": self.kind, "message": self.message}


@dataclass
class Report:
    valid: bool
    violations: list = field(default_factory=list)
    children: list = field(default_factory=list)

    def __bool__(self):
        return self.valid

    def messages(self):
        out = [v.message for v in self.violations]
        for child in self.children:
            out += child.messages()
        return out

    def as_dict(self):
        return {"valid": self.valid,
                "violations": [v.as_dict() for v in self.violations],
                "children": [c.as_dict() for c in self.children]}


def verify_witness(w, max_pairs=50):
    out = []
    space = w.space
    for p in w.labels:
        if p not in space.pointset:
            out.append(Violation("extra", f"label for point {p!r} outside the space"))
    for p in space.pts:
        if p not in w.labels:
            out.append(Violation("uncovered", f"point {p!r} is not covered"))
    if not isinstance(w.k, int) or w.k < 1:
        out.append(Violation("bad-k", f"k = {w.k!r} must be a positive integer"))
    for p, (c, _) in w.labels.items():
        if not isinstance(c, int) or not 0 <= c < w.k:
            out.append(Violation("bad-color", f"point {p!r} has color {c!r} outside 0..{w.k - 1}"))
    pieces = w.pieces
    by_color = {}
    for lab, P in pieces.items():
        by_color.setdefault(lab[0], []).append((lab, P))
    ambient = space.ambient
    for c, plist in by_color.items():
        if len(plist) < 2:
            continue
        cls = [p for _, P in plist for p in P.pts]
        owner = [i for i, (_, P) in enumerate(plist) for _ in P.pts]
        _, comp = component_labels(ambient, ambient.indices(cls), w.r)
        touching = {}
        for o, lab in zip(owner, comp):
            touching.setdefault(int(lab), set()).add(o)
        for group in touching.values():
            group = sorted(group)
            for a in range(len(group)):
                for b in range(a + 1, len(group)):
                    (la, A), (lb, B) = plist[group[a]], plist[group[b]]
                    dist = set_distance(A, B)
                    if dist <= w.r and len(out) < max_pairs:
                        out.append(Violation(
                            "not-separated",
                            f"d(X_{{{la[0]},{la[1]}}}, X_{{{lb[0]},{lb[1]}}}) = {dist} ≤ r = {w.r}",
                            {"pieces": (la, lb), "distance": dist}))
    if w.target is not None:
        for lab, P in pieces.items():
            if not w.target.accepts(P):
                out.append(Violation(
                    "rejected",
                    f"piece X_{{{lab[0]},{lab[1]}}} (diameter {P.diameter}) rejected by {_describe(w.target)}",
                    {"piece": lab}))
    return Report(not out, out)


def trivial_witness(S, r, target=None):
    return DecompositionWitness(S, 1, r, {p: (0, 0) for p in S.pts}, target)


def pad_witness(w, k_new):
    if k_new < w.k:
        raise BadK(f"cannot pad a {w.k}-color witness down to {k_new} colors")
    return replace(w, k=k_new)


def restrict_to_subspace(w, S):
    if S.ambient.id != w.space.ambient.id or not S.pointset <= w.space.pointset:
        raise NotSubspace(f"{S!r} is not contained in {w.space!r}")
    target = w.target
    if isinstance(target, (Explicit, ClosureOf)):
        target = ClosureOf(target.members)
    return DecompositionWitness(S, w.k, w.r, {p: w.labels[p] for p in S.pts}, target)


# ------------------------------------------------------------------ families

@dataclass
class FamilyWitness:
    members: list
    witnesses: list
    k: int
    r: object
    target: object = None

    @property
    def source(self):
        return MetricFamily(self.members)

    def pieces_family(self):
        seen = {}
        for w in self.witnesses:
            for P in w.pieces.values():
                if len(P) and P.key not in seen:
                    seen[P.key] = P
        return MetricFamily(list(seen.values()))

    @cached_property
    def _member_index(self):
        return {m.key: i for i, m in reversed(list(enumerate(self.members)))}

    @cached_property
    def _point_index(self):
        index = {}
        for i, m in enumerate(self.members):
            for p in m.pts:
                index.setdefault((m.ambient.id, p), []).append(i)
        return index

    def witness_of(self, member):
        i = self._member_index.get(member.key)
        return None if i is None else self.witnesses[i]

    def containing(self, P):
        """Index of the first member that contains ``P``."""
        if not len(P):
            return None
        for i in self._point_index.get((P.ambient.id, P.pts[0]), ()):
            if P.pointset <= self.members[i].pointset:
                return i
        return None

    def with_scale(self, r):
        return replace(self, r=r, witnesses=[w.with_scale(r) for w in self.witnesses])


def family_witness(members, witnesses, r, target=None):
    k = max((w.k for w in witnesses), default=1)
    return FamilyWitness(list(members), [replace(w, k=k, r=r) for w in witnesses], k, r, target)


def verify_family(fw):
    out, children = [], []
    if len(fw.members) != len(fw.witnesses):
        out.append(Violation("shape", f"{len(fw.members)} members but {len(fw.witnesses)} witnesses"))
    for i, (m, w) in enumerate(zip(fw.members, fw.witnesses)):
        if w.space.key != m.key:
            out.append(Violation("member", f"witness {i} covers {w.space!r}, not member {m!r}"))
        if w.k > fw.k or w.r < fw.r:
            out.append(Violation("params", f"witness {i} has (k, r) = ({w.k}, {w.r}), family needs ({fw.k}, {fw.r})"))
        rep = verify_witness(replace(w, k=fw.k, r=fw.r))
        if not rep.valid:
            out.append(Violation("member-witness", f"witness {i} for {m!r} is invalid"))
            children.append(rep)
    if fw.target is not None:
        for P in fw.pieces_family():
            if not fw.target.accepts(P):
                out.append(Violation("rejected", f"piece {P!r} rejected by {_describe(fw.target)}"))
    return Report(not out, out, children)


# -------------------------------------------------------------------- chains

@dataclass
class DecompositionChain:
    start: list
    steps: list
    final_bound: object
    strict: bool = True

    @property
    def scales(self):
        return [s.r for s in self.steps]

    @property
    def ks(self):
        return [s.k for s in self.steps]

    def final_family(self):
        return self.steps[-1].pieces_family() if self.steps else MetricFamily(self.start)

    def witness_for(self, level, P):
        """Witness for ``P`` at step ``level``, restricted from the member holding it."""
        step = self.steps[level]
        i = step.containing(P)
        if i is None:
            raise NotSubspace(f"{P!r} lies in no member of step {level}")
        w = step.witnesses[i]
        return w if w.space.key == P.key else restrict_to_subspace(w, P)


def verify_chain(c):
    out, children = [], []
    if c.steps and MetricFamily(c.start).key != MetricFamily(c.steps[0].members).key:
        out.append(Violation("start", "first step does not decompose the start family"))
    for i, step in enumerate(c.steps):
        rep = verify_family(step)
        if not rep.valid:
            out.append(Violation("step", f"step {i + 1} (k={step.k}, r={step.r}) does not verify"))
            children.append(rep)
        if i + 1 < len(c.steps):
            if step.pieces_family().key != MetricFamily(c.steps[i + 1].members).key:
                out.append(Violation("link", f"pieces of step {i + 1} are not the members of step {i + 2}"))
    sc = c.scales
    for a, b in zip(sc, sc[1:]):
        if (c.strict and not a < b) or (not c.strict and b < a):
            out.append(Violation("scale-order", f"scales {sc} violate the {'strict' if c.strict else 'monotone'} ordering"))
            break
    for P in c.final_family():
        if P.diameter > c.final_bound:
            out.append(Violation("unbounded", f"final member {P!r} has diameter {P.diameter} > {c.final_bound}"))
            if len(out) > 50:
                break
    return Report(not out, out, children)


def _strictly_increasing(sc):
    return all(a < b for a, b in zip(sc, sc[1:]))


def relabel_scales(chain, scales):
    """Lower each step's scale; valid because an r-decomposition is one at every r' <= r."""
    scales = list(scales)
    if len(scales) != len(chain.steps):
        raise ScaleOrderViolation(f"{len(scales)} scales for a {len(chain.steps)}-step chain")
    for new, old in zip(scales, chain.scales):
        if new > old:
            raise ScaleOrderViolation(f"cannot raise scale {old} to {new}")
    steps = [s.with_scale(r) for s, r in zip(chain.steps, scales)]
    return DecompositionChain(chain.start, steps, chain.final_bound, _strictly_increasing(scales))


def chain_from_kfold(fw):
    """Rewrite one ``(k, s)``-decomposition into ``k`` two-fold steps at scale ``s``.

    Level ``l`` holds the pieces of colors below ``l`` plus the leftover union
    of colors ``l..k-1``; step ``l`` splits the leftover into the pieces of
    color ``l`` and the next leftover.
    """
    rep = verify_family(fw)
    if not rep.valid:
        raise InvalidInput("input family witness does not verify: " + "; ".join(rep.messages()[:3]))
    final_bound = fw.target.D if isinstance(fw.target, Bounded) else fw.pieces_family().sup_diameter()
    if fw.k == 1:
        return DecompositionChain(list(fw.members), [fw], final_bound, strict=False)
    s = fw.r
    per_member = []
    for X, w in zip(fw.members, fw.witnesses):
        pieces_by_color = [[] for _ in range(fw.k)]
        for (c, _), P in w.pieces.items():
            if len(P):
                pieces_by_color[c].append(P)
        color_of = {p: w.labels[p][0] for p in X.pts}
        leftovers = [Subspace(X.ambient, [p for p in X.pts if color_of[p] >= l]) for l in range(fw.k + 1)]
        per_member.append((pieces_by_color, leftovers))
    steps = []
    for l in range(fw.k):
        last = l == fw.k - 1
        members, witnesses = {}, {}
        for pieces_by_color, leftovers in per_member:
            for c in range(l):
                for P in pieces_by_color[c]:
                    if P.key not in members:
                        members[P.key] = P
                        witnesses[P.key] = trivial_witness(P, s, fw.target if last else None)
            L = leftovers[l]
            if len(L) and L.key not in members:
                labels = {}
                for j, P in enumerate(pieces_by_color[l]):
                    for p in P.pts:
                        labels[p] = (0, j)
                for p in leftovers[l + 1].pts:
                    labels[p] = (1, 0)
                members[L.key] = L
                witnesses[L.key] = DecompositionWitness(L, 2, s, labels, fw.target if last else None)
        steps.append(family_witness(members.values(), witnesses.values(), s))
    return DecompositionChain(list(fw.members), steps, final_bound, strict=False)


def string_chains(head, tail, head_scales=None):
    """Concatenate two chains; ``head_scales`` first relabels the head's scales."""
    if head_scales is not None:
        head = relabel_scales(head, head_scales)
    if not head.steps and (not head.start or MetricFamily(head.start).key == MetricFamily(tail.start).key):
        return tail
    if head.final_family().key != MetricFamily(tail.start).key:
        raise FamilyMismatch("the head's final family is not the tail's start family")
    if head.steps and tail.steps and max(head.scales) >= min(tail.scales):
        raise ScaleOrderViolation(
            f"head scales {head.scales} must all be below tail scales {tail.scales}")
    return DecompositionChain(head.start, head.steps + tail.steps, tail.final_bound,
                              head.strict and tail.strict)


# ------------------------------------------------------------------- unions

def _merge_targets(a, b):
    if a is None or b is None:
        return None
    if isinstance(a, Bounded) and isinstance(b, Bounded):
        return Bounded(max(a.D, b.D))
    if isinstance(a, (Explicit, ClosureOf)) and isinstance(b, (Explicit, ClosureOf)):
        return ClosureOf(a.members + b.members)
    raise TargetClash(f"cannot merge targets {_describe(a)} and {_describe(b)}")


def merge_many(witnesses):
    """Union of witnesses over subspaces of one ambient; earlier witnesses win overlaps.

    Returns the merged witness and the color offset of each input.
    """
    if not witnesses:
        raise InvalidInput("nothing to merge")
    ambient = witnesses[0].space.ambient
    r = witnesses[0].r
    for w in witnesses:
        if w.space.ambient.id != ambient.id:
            raise AmbientMismatch(f"witnesses over {ambient.id} and {w.space.ambient.id}")
        if w.r != r:
            raise InvalidInput(f"witnesses at different scales {r} and {w.r}")
    target = witnesses[0].target
    for w in witnesses[1:]:
        target = _merge_targets(target, w.target)
    labels, claimed, offsets = {}, set(), []
    offset = 0
    for w in witnesses:
        offsets.append(offset)
        for (c, j), P in w.pieces.items():
            rest = [p for p in P.pts if p not in claimed]
            if not rest:
                continue
            if len(rest) == len(P):
                parts = [rest]
            else:
                sub = Subspace(ambient, rest)
                n, lab = component_labels(ambient, sub.idx, r)
                parts = [[p for p, x in zip(sub.pts, lab) if x == t] for t in range(n)]
            for t, part in enumerate(parts):
                for p in part:
                    labels[p] = (offset + c, (j, t))
        claimed.update(w.space.pts)
        offset += w.k
    space = Subspace(ambient, claimed)
    merged = DecompositionWitness(space, max(offset, 1), r, labels, target).canonical()
    return merged, offsets


def merge_union_witnesses(w1, w2):
    merged, _ = merge_many([w1, w2])
    rep = verify_witness(merged)
    if not rep.valid:
        raise InvalidInput("merged witness fails verification: " + "; ".join(rep.messages()[:3]))
    return merged


def union_assemble(parts, Y, r):
    """Two-color witness over the union of ``parts``: ``Y`` against the ``parts - Y``."""
    if not parts:
        raise InvalidInput("union_assemble needs at least one part")
    ambient = parts[0].ambient
    X = parts[0]
    for P in parts[1:]:
        X = X.union(P)
    if Y.ambient.id != ambient.id or not Y.pointset <= X.pointset:
        raise NotSubspace("Y must be a subset of the union of the parts")
    Z = [P.minus(Y) for P in parts]
    live = [(i, z) for i, z in enumerate(Z) if len(z)]
    pts = [p for _, z in live for p in z.pts]
    owner = [i for i, z in live for _ in z.pts]
    if len(live) > 1:
        _, comp = component_labels(ambient, ambient.indices(pts), r)
        first = {}
        for p, o, lab in zip(pts, owner, comp):
            lab = int(lab)
            if lab in first and first[lab][0] != o:
                i, j = first[lab][0], o
                A, B = Z[i], Z[j]
                block = ambient.block(A.idx, B.idx)
                a, b = np.unravel_index(np.argmin(block), block.shape)
                dist = block[a, b]
                raise NotSeparated(
                    f"Z_{i} and Z_{j} are not {r}-disjoint: d({A.pts[a]!r}, {B.pts[b]!r}) = {dist} ≤ {r}",
                    parts=(i, j), points=(A.pts[a], B.pts[b]))
            first.setdefault(lab, (o, p))
    labels = {p: (0, 0) for p in Y.pts}
    for i, z in live:
        for p in z.pts:
            labels[p] = (1, i)
    target = ClosureOf([Y] + [z for _, z in live])
    return DecompositionWitness(X, 2, r, labels, target).canonical()


# ---------------------------------------------------------- coarse transfer

def _pull_scale(r, emb, cap):
    best = None
    for t in range(0, int(floor(cap)) + 1):
        if emb.rho_plus(t) <= r:
            best = t
        else:
            break
    return best


def _pull_bound(D, emb, cap):
    best = 0
    for t in range(0, int(floor(cap)) + 1):
        if emb.rho_minus(t) <= D:
            best = t
        else:
            break
    return best


class _Pullback:
    def __init__(self, emb):
        if emb.rho_plus is None or emb.rho_minus is None:
            raise ModulusMissing("coarse transfer needs both rho_plus and rho_minus")
        self.emb = emb
        # the map may be partial: only its domain is pulled back
        self.inverse = {}
        domain = [y for y in emb.source.points if y in emb.map]
        for y in domain:
            self.inverse.setdefault(emb.map[y], []).append(y)
        self.diam = Subspace(emb.source, domain).diameter

    def pre(self, M):
        if M.ambient.id != self.emb.target.id:
            raise AmbientMismatch(f"{M!r} is not in the embedding target {self.emb.target.id}")
        return Subspace(self.emb.source, [y for x in M.pts for y in self.inverse.get(x, ())])

    def scale(self, r):
        t = _pull_scale(r, self.emb, max(self.diam, floor(r)))
        if t is None or t < 1:
            raise ScaleCollapse(f"no positive scale r' has rho_plus(r') <= {r}")
        return t

    def bound(self, D):
        return _pull_bound(D, self.emb, self.diam)

    def target(self, target):
        if target is None:
            return None
        if isinstance(target, Bounded):
            return Bounded(self.bound(target.D))
        return ClosureOf([q for q in (self.pre(M) for M in target.members) if len(q)])

    def witness(self, w, r=None):
        S = self.pre(w.space)
        labels = {y: w.labels[self.emb.map[y]] for y in S.pts}
        return DecompositionWitness(S, w.k, self.scale(w.r) if r is None else r, labels, self.target(w.target))


def transfer_along_embedding(cert, emb):
    """Pull a witness or chain over X back along a coarse embedding Y -> X."""
    pb = _Pullback(emb)
    if isinstance(cert, DecompositionWitness):
        return pb.witness(cert)
    scales = [pb.scale(r) for r in cert.scales]
    roots, seen = [], set()
    for M in cert.start:
        q = pb.pre(M)
        if len(q) and q.key not in seen:
            seen.add(q.key)
            roots.append((q, M))
    start = [q for q, _ in roots]
    steps = []
    for step, r in zip(cert.steps, scales):
        members, witnesses, nxt, seen = [], [], [], set()
        for q, M in roots:
            w = step.witness_of(M)
            if w is None:
                raise FamilyMismatch(f"{M!r} has no witness in the source chain")
            members.append(q)
            witnesses.append(pb.witness(w, r))
            for P in w.pieces.values():
                qp = pb.pre(P)
                if len(qp) and qp.key not in seen:
                    seen.add(qp.key)
                    nxt.append((qp, P))
        steps.append(FamilyWitness(members, witnesses, step.k, r))
        roots = nxt
    return DecompositionChain(start, steps, pb.bound(cert.final_bound), _strictly_increasing(scales))


# --------------------------------------------------------- chain assembly

def grow_chains(roots, scales):
    """Run per-member chains side by side as one family-level chain.

    ``roots`` holds ``(P, chain, level)``: ``P`` must lie in a member of
    ``chain`` at ``level``.  Exhausted chains continue with trivial steps.
    Returns the list of family witnesses at ``scales[0], scales[1], ...``.
    """
    steps = []
    roots = _dedupe(roots)
    i = 0
    while any(level < len(ch.steps) for _, ch, level in roots):
        if i >= len(scales):
            raise ScaleMismatch(f"member chains need more than the {len(scales)} scales supplied")
        r = scales[i]
        members, witnesses, nxt = [], [], []
        for P, ch, level in roots:
            if level >= len(ch.steps):
                w = trivial_witness(P, r)
                nxt.append((P, ch, level))
            else:
                w = ch.witness_for(level, P)
                if w.r < r:
                    raise ScaleMismatch(f"member witness at scale {w.r} cannot serve scale {r}")
                w = replace(w, r=r, target=None)
                nxt += [(Q, ch, level + 1) for Q in w.pieces.values() if len(Q)]
            members.append(P)
            witnesses.append(w)
        steps.append(family_witness(members, witnesses, r))
        roots = _dedupe(nxt)
        i += 1
    return steps


def _dedupe(roots):
    seen, out = set(), []
    for root in roots:
        if len(root[0]) and root[0].key not in seen:
            seen.add(root[0].key)
            out.append(root)
    return out


def union_chain(parts, scales):
    """Chain over the union of ``parts`` from one chain per part (finite union).

    ``parts`` is a list of ``(C, chain over {C})``.  The first step merges the
    parts' first witnesses (earlier parts win overlaps); later steps follow
    each merged piece through the chain of the part it came from.
    """
    scales = list(scales)
    firsts = []
    for C, ch in parts:
        if ch.steps:
            w = ch.witness_for(0, C)
            if w.r < scales[0]:
                raise ScaleMismatch(f"part witness at scale {w.r} cannot serve scale {scales[0]}")
            firsts.append(replace(w, r=scales[0], target=None))
        else:
            firsts.append(trivial_witness(C, scales[0]))
    merged, offsets = merge_many(firsts)
    owner = []
    for j, (C, ch) in enumerate(parts):
        owner += [j] * firsts[j].k
    roots = []
    for (c, _), P in merged.pieces.items():
        j = owner[c]
        ch = parts[j][1]
        roots.append((P, ch, 1 if ch.steps else 0))
    steps = [family_witness([merged.space], [merged], scales[0])] + grow_chains(roots, scales[1:])
    bound = max(ch.final_bound for _, ch in parts)
    return DecompositionChain([merged.space], steps, bound, _strictly_increasing(scales[:len(steps)]))


def chain_after_first(first, piece_chains, scales):
    """Chain whose first step is ``first`` and whose pieces continue along ``piece_chains``.

    ``piece_chains`` maps a piece key to a chain over that piece; pieces with
    no entry must already be bounded and stay as they are.
    """
    scales = list(scales)
    roots = []
    bound = 0
    empty = DecompositionChain([], [], 0)
    for P in first.pieces.values():
        if not len(P):
            continue
        ch = piece_chains.get(P.key)
        if ch is None:
            roots.append((P, empty, 0))
            bound = max(bound, P.diameter)
        else:
            roots.append((P, ch, 0))
            bound = max(bound, ch.final_bound)
    steps = [family_witness([first.space], [replace(first, r=scales[0])], scales[0])]
    steps += grow_chains(roots, scales[1:])
    return DecompositionChain([first.space], steps, bound, _strictly_increasing(scales[:len(steps)]))
