"""Certificate pipelines for relatively hyperbolic groups at desk scale.

* :func:`osin_cover` covers the relative ball B(n) by the sets B(n-1)H_i and
  B(n-1)s;
* :func:`find_separating_radius` searches the thickening radius t that makes
  the cosets rH_i minus base·B_S(t) pairwise s-disjoint;
* :func:`ball_chain` runs the induction on n and returns a decomposition
  chain for B(n) with the word metric;
* :func:`pullback_chain` pulls a chain of the base back along a uniformly
  expansive map and continues with chains of the fibers;
* :func:`extend_group_chain` strings all of it together for a free product.

All relative distances are window-truncated (over-estimates of the truth).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
import numpy as np

from .errors import (FDCError, MissingFiber, NoPeripherals, NotFound,
                     NotSeparated, ScaleMismatch, TranslateFailure,
                     WindowTooSmall)
from .groups import (FreeProduct, TranslationAction, coset_partition,
                     enumerate_ball, relative_ball)
from .metric import (CoarseMapWitness, Modulus, Subspace, check_coarse_map)
from .search import AUTO, asdim_profile, heuristic_decompose
from .witness import (DecompositionChain, DecompositionWitness,
                      chain_after_first, family_witness, grow_chains,
                      transfer_along_embedding, union_assemble, union_chain,
                      verify_chain, verify_witness, _strictly_increasing)


# ------------------------------------------------------------- osin cover

@dataclass
class OsinCover:
    n: int
    base: list           # names of B(n-1) inside the interior window W(N-1)
    parts: list          # (label, Subspace of the ball)
    ball: Subspace

    def union_names(self):
        out = set()
        for _, P in self.parts:
            out |= P.pointset
        return out


def _interior_base(window, n):
    inner = window.lengths <= window.N - 1
    rel = window.rel_from_identity
    if not inner.any() or rel[inner].max() < n:
        raise WindowTooSmall(
            f"interior window of radius {window.N - 1} does not reach relative depth {n}")
    return [window.names[t] for t in np.nonzero(inner & (rel <= n - 1))[0]]


def osin_cover(window, n):
    """Cover of B(n) ∩ W by the sets B(n-1)H_i ∩ W and B(n-1)s.

    B(n-1) is taken inside W(N-1) so that every right translate by a
    generator stays in the window.
    """
    if not window.has_peripherals:
        raise NoPeripherals(f"{window.spec.label} has no peripheral subgroups")
    if n < 1:
        raise ValueError("the cover needs n >= 1")
    base = _interior_base(window, n)
    ball = relative_ball(window, n)
    X = ball.ambient
    spec = window.spec
    parts = []
    for i in spec.peripherals:
        names = [x for c in coset_partition(window, i, base) for x in c.members]
        parts.append((f"H{i}", Subspace(X, names)))
    for s in spec.generators():
        names = [spec.name(spec.mul(window.element(b), s)) for b in base]
        leak = [x for x in names if x not in X.index]
        if leak:
            raise WindowTooSmall(f"B({n - 1})·{spec.name(s)} leaves B({n}) ∩ window at {leak[0]}")
        parts.append((f"S{spec.name(s)}", Subspace(X, names)))
    cover = OsinCover(n, base, parts, ball)
    missing = ball.pointset - cover.union_names()
    if missing:
        raise WindowTooSmall(f"cover misses {sorted(missing)[:5]} of B({n}) ∩ window")
    return cover


# ------------------------------------------------------ separating radius

@dataclass
class Separation:
    t: int
    Y: Subspace
    parts: list
    reps: list
    witness: DecompositionWitness


def _digest(names):
    return hashlib.sha1("\x00".join(sorted(names)).encode()).hexdigest()[:10]


def find_separating_radius(window, base, i, s, t_max, ambient=None):
    """Smallest t <= t_max with {rH_i - base·B_S(t)} pairwise s-disjoint in d_S."""
    base = list(base)
    cosets = coset_partition(window, i, base)
    names = [x for c in cosets for x in c.members]
    if ambient is None:
        ambient = window.space_on(names, f"{window.id}|sep{i}|{_digest(base)}")
    parts = [Subspace(ambient, c.members) for c in cosets]
    X = Subspace(ambient, names)
    B = Subspace(ambient, base)
    to_base = ambient.block(B.idx, X.idx).min(axis=0)
    for t in range(0, t_max + 1):
        Y = Subspace(ambient, [p for p, d in zip(X.pts, to_base) if d <= t])
        try:
            w = union_assemble(parts, Y, s)
        except NotSeparated:
            continue
        return Separation(t, Y, parts, [c.rep for c in cosets], w)
    raise NotFound(f"no thickening radius t <= {t_max} separates the cosets at s = {s}")


# ------------------------------------------------------------ ball chains

def bounded_chain(S, scales, D):
    """One heuristic step to Bounded(D), or no step if S is already that small."""
    if S.diameter <= D:
        return DecompositionChain([S], [], D)
    w = heuristic_decompose(S, scales[0], D)
    return DecompositionChain([S], [family_witness([S], [w], scales[0])], D)


def _shifted(scales, by):
    return [r + by for r in scales]


def _isometric_into(source, target, mapping, upto):
    ident = Modulus.identity(upto)
    return CoarseMapWitness(source, target, mapping, ident, ident)


@dataclass
class BallChainResult:
    chain: DecompositionChain
    stages: list = field(default_factory=list)


def ball_chain(window, n, scales, D, t_max=None, stages=None):
    """Decomposition chain for B(n) ∩ W with the word metric, by induction on n.

    The H_i part of the cover is split by the separating thickening (union
    step); its coset pieces reuse the chain of H_i ∩ W moved by translation,
    the thickened set is decomposed directly.  The parts B(n-1)s reuse the
    chain of B(n-1) through the coarse equivalence x -> x s^-1, whose
    distortion is at most 2, so that chain is built at scales shifted by 2.
    """
    scales = list(scales)
    if not _strictly_increasing(scales):
        raise ScaleMismatch(f"scales {scales} must be strictly increasing")
    stages = [] if stages is None else stages
    ball = relative_ball(window, n)
    if n == 0:
        return DecompositionChain([ball], [], max(D, ball.diameter))
    t_max = 2 * window.N if t_max is None else t_max
    cover = osin_cover(window, n)
    stages.append((f"osin_cover(n={n}, N={window.N})", cover, None))
    X = ball.ambient
    spec = window.spec
    parts = []
    for label, C in cover.parts:
        if not label.startswith("H"):
            continue
        i = int(label[1:])
        sep = find_separating_radius(window, cover.base, i, scales[0], t_max, ambient=X)
        stages.append((f"union_assemble(n={n}, H{i}, t={sep.t})", sep.witness, verify_witness(sep.witness)))
        hspace = window.space_on([x for x in window.names if spec.factor_of(window.element(x)) == i] + ["e"],
                                 f"{window.id}|H{i}")
        hchain = bounded_chain(hspace.whole(), scales[1:], D)
        piece_chains = {}
        if len(sep.Y):
            piece_chains[sep.Y.key] = bounded_chain(sep.Y, scales[1:], D)
        for rep, P in zip(sep.reps, sep.parts):
            Z = P.minus(sep.Y)
            if not len(Z):
                continue
            back = TranslationAction(spec, spec.inv(window.element(rep)))
            mapping = {z: back.map_point(z) for z in Z.pts}
            emb = _isometric_into(X, hspace, mapping, max(X.diameter, max(scales)))
            piece_chains[Z.key] = transfer_along_embedding(hchain, emb)
        parts.append((C, chain_after_first(sep.witness, piece_chains, scales)))
    inner = ball_chain(window.sub_window(window.N - 1), n - 1, _shifted(scales, 2), D, t_max, stages)
    inner_space = inner.start[0].ambient
    for label, C in cover.parts:
        if not label.startswith("S"):
            continue
        s_inv = spec.inv(spec.parse(label[1:]))
        mapping = {x: spec.name(spec.mul(window.element(x), s_inv)) for x in C.pts}
        upto = max(X.diameter, max(scales)) + 4
        emb = CoarseMapWitness(X, inner_space, mapping,
                               Modulus.from_function(lambda t: t + 2, upto),
                               Modulus.from_function(lambda t: max(t - 2, 0), upto))
        parts.append((C, transfer_along_embedding(inner, emb)))
    chain = union_chain(parts, scales)
    stages.append((f"ball_chain(n={n}, N={window.N})", chain, verify_chain(chain)))
    return chain


# -------------------------------------------------------------- fibering

@dataclass
class FiberingInput:
    f: CoarseMapWitness
    base_chain: DecompositionChain
    fiber_provider: object = None        # dict key -> chain, or callable(Y, preimage) -> chain | None
    homogeneity: list = field(default_factory=list)
    representative: tuple = None         # (Q: Subspace of E-like space, chain over {Q})


def _preimage(f, inverse, M):
    return Subspace(f.source, [x for y in M.pts for x in inverse.get(y, ())])


def _fiber_chain(inp, Y, Ypre, scales):
    prov = inp.fiber_provider
    chain = None
    if callable(prov):
        chain = prov(Y, Ypre)
    elif isinstance(prov, dict):
        chain = prov.get(Y.key) or prov.get(Ypre.key)
    if chain is not None:
        if len(chain.start) != 1 or chain.start[0].key != Ypre.key:
            raise MissingFiber(f"provided chain does not start at the fiber over {Y!r}")
        return chain
    if inp.representative is None or not inp.homogeneity:
        raise MissingFiber(f"no chain for the fiber over {Y!r}")
    Q, qchain = inp.representative
    for act in inp.homogeneity:
        mapping = {}
        for x in Ypre.pts:
            y = act.map_point(x)
            if y not in Q.pointset:
                break
            mapping[x] = y
        else:
            upto = max(Ypre.diameter, max(scales, default=0))
            emb = _isometric_into(inp.f.source, Q.ambient, mapping, upto)
            return transfer_along_embedding(qchain, emb)
    raise TranslateFailure(f"no supplied isometry moves the fiber over {Y!r} into the representative")


def pullback_chain(inp, scales):
    """Chain for E: preimages of the base chain, then the fiber chains.

    Base step i must sit at scale rho_plus(R_i); pieces more than that far
    apart in the base pull back to pieces more than R_i apart in E.
    """
    scales = list(scales)
    f = inp.f
    base = inp.base_chain
    nb = len(base.steps)
    if len(scales) < nb:
        raise ScaleMismatch(f"{len(scales)} scales for a {nb}-step base chain")
    for i, step in enumerate(base.steps):
        if step.r != f.rho_plus(scales[i]):
            raise ScaleMismatch(f"base step {i + 1} at scale {step.r}, expected rho({scales[i]}) = {f.rho_plus(scales[i])}")
    inverse = {}
    for x in f.source.points:
        inverse.setdefault(f.map[x], []).append(x)
    roots = []
    for M in base.start:
        q = _preimage(f, inverse, M)
        if len(q):
            roots.append((q, M))
    start = [q for q, _ in roots]
    steps = []
    for step, R in zip(base.steps, scales):
        members, witnesses, nxt, seen = [], [], [], set()
        for q, M in roots:
            w = step.witness_of(M)
            labels = {x: w.labels[f.map[x]] for x in q.pts}
            members.append(q)
            witnesses.append(DecompositionWitness(q, w.k, R, labels))
            for P in w.pieces.values():
                qp = _preimage(f, inverse, P)
                if len(qp) and qp.key not in seen:
                    seen.add(qp.key)
                    nxt.append((qp, P))
        steps.append(family_witness(members, witnesses, R))
        roots = nxt
    tail = scales[nb:]
    fiber_roots = []
    bound = 0
    for q, Y in roots:
        ch = _fiber_chain(inp, Y, q, tail)
        fiber_roots.append((q, ch, 0))
        bound = max(bound, ch.final_bound)
    steps += grow_chains(fiber_roots, tail)
    return DecompositionChain(start, steps, bound, _strictly_increasing(scales[:len(steps)]))


# ------------------------------------------------------------- pipeline

@dataclass
class Stage:
    name: str
    certificate: object
    report: object
    ok: bool
    error: str = None


@dataclass
class PipelineReport:
    stages: list
    overall: bool
    parameters: dict


def extend_group_chain(spec, N, n, scales, D=None, t_max=None, base_mode=AUTO):
    """End-to-end chain for the word-metric window of a free product."""
    scales = list(scales)
    D = 2 * max(scales) if D is None else D
    params = {"group": spec.label, "N": N, "n": n, "scales": scales, "D": D}
    stages = []

    def fail(name, err):
        stages.append(Stage(name, None, None, False, f"{type(err).__name__}: {err}"))
        return PipelineReport(stages, False, params)

    # (1) window and relative graph
    try:
        if not isinstance(spec, FreeProduct):
            raise NoPeripherals(f"{spec.label} is not a free product")
        window = enumerate_ball(spec, N)
        osin_cover(window, n)
    except FDCError as err:
        return fail("window", err)
    E = window.s_space()
    B = window.rel_space()
    stages.append(Stage("window", None, {"elements": len(window), "h_edges": len(window.h_edges)}, True))

    # (2) base decomposition of the relative graph, pieces of relative diameter <= n
    try:
        row = asdim_profile(B.whole(), [scales[0]], {scales[0]: n}, mode=base_mode)[0]
        base_w = row.witness
        base_chain = DecompositionChain([B.whole()], [family_witness([B.whole()], [base_w], scales[0])], n)
        rep = verify_chain(base_chain)
        stages.append(Stage("base", base_chain, rep, rep.valid))
        params["base_k"] = row.k
        params["base_mode"] = row.mode
    except FDCError as err:
        return fail("base", err)

    # (3) p: (G, d_S) -> relative graph is the identity on points and a contraction
    ident = {x: x for x in E.points}
    p = CoarseMapWitness(E, B, ident, Modulus.identity(max(E.diameter, max(scales))), contractive=True)
    crep = check_coarse_map(p)
    stages.append(Stage("contraction", None, crep, crep.valid and crep.contractive))

    # (4) representative fiber: B(n) in a window large enough for every translate
    try:
        big = enumerate_ball(spec, 2 * N, max_syllables=n)
        fiber_stages = []
        qchain = ball_chain(big, n, scales[1:], D, t_max, fiber_stages)
        for name, cert, r in fiber_stages:
            if isinstance(cert, (DecompositionChain, DecompositionWitness)):
                stages.append(Stage("fiber:" + name, cert, r, r.valid))
        Q = qchain.start[0]
        params["fiber_window"] = {"N": big.N, "elements": len(big), "ball": len(Q)}
    except FDCError as err:
        return fail("fiber", err)

    # (5) pullback along p, fibers moved by left translations
    try:
        actions = []
        for Y in base_w.pieces.values():
            y0 = min((window.element(x) for x in Y.pts), key=spec.sort_key)
            actions.append(TranslationAction(spec, spec.inv(y0)))
        f = CoarseMapWitness(E, B, ident, Modulus.identity(max(E.diameter, max(scales))), contractive=True)
        inp = FiberingInput(f, base_chain, None, actions, (Q, qchain))
        chain = pullback_chain(inp, scales)
        rep = verify_chain(chain)
        stages.append(Stage("pullback", chain, rep, rep.valid))
        params["final_scales"] = chain.scales
        params["final_ks"] = chain.ks
        params["final_bound"] = chain.final_bound
    except FDCError as err:
        return fail("pullback", err)
    return PipelineReport(stages, all(s.ok for s in stages), params)


# ----------------------------------------------------- grid projection case

def _block_witness(S, r, key, width, D=None):
    """Color points by alternating blocks of ``key(p) // width``; pieces are r-components."""
    from .search import witness_from_coloring
    coloring = [(key(p) // width) % 2 for p in S.pts]
    return witness_from_coloring(S, coloring, r, D if D is not None else S.diameter, 2)


def grid_projection_input(size=21, interval=8, band=6, scales=(3, 5, 9)):
    """First projection of the size x size grid onto a path.

    The base is cut into intervals of ``interval`` points (k=2 at scale
    scales[0]); each strip over an interval is cut into horizontal bands of
    ``band`` rows at scales[1], then each band into two column halves at
    scales[2].
    """
    from .metric import grid_space, path_space
    E = grid_space(size)
    Bsp = path_space(size)
    fmap = {p: int(p.split(",")[0]) for p in E.points}
    R1, R2, R3 = scales
    f = CoarseMapWitness(E, Bsp, fmap, Modulus.identity(2 * size), contractive=True)
    bw = _block_witness(Bsp.whole(), R1, int, interval, interval - 1)
    base = DecompositionChain([Bsp.whole()], [family_witness([Bsp.whole()], [bw], R1)], interval - 1)

    def x_of(p):
        return int(p.split(",")[0])

    def y_of(p):
        return int(p.split(",")[1])

    def fiber(Y, strip):
        w1 = _block_witness(strip, R2, y_of, band)
        members, ws = [], []
        x0 = min(x_of(p) for p in strip.pts)
        half = (interval + 1) // 2
        for P in w1.pieces.values():
            members.append(P)
            ws.append(_block_witness(P, R3, lambda p: x_of(p) - x0, half))
        s1 = family_witness([strip], [w1], R2)
        s2 = family_witness(members, ws, R3)
        bound = max(P.diameter for w in ws for P in w.pieces.values())
        return DecompositionChain([strip], [s1, s2], bound)

    return FiberingInput(f, base, fiber), list(scales)
