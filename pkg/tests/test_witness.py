import random

import pytest
from hypothesis import given, settings, strategies as st

from fdcbench.errors import (BadK, FamilyMismatch, InvalidInput, ModulusMissing,
                             NotSeparated, NotSubspace, ScaleCollapse, ScaleOrderViolation)
from fdcbench.metric import (CoarseMapWitness, MetricFamily, Modulus, Subspace, build_space,
                             path_space, r_components, set_distance)
from fdcbench.search import heuristic_decompose
from fdcbench.witness import (Bounded, DecompositionChain, DecompositionWitness,
                              Explicit, chain_from_kfold, family_witness, merge_union_witnesses,
                              pad_witness, relabel_scales, restrict_to_subspace, string_chains,
                              subspace_closure, transfer_along_embedding, trivial_witness,
                              union_assemble, verify_chain, verify_witness)

from conftest import random_space

P10 = path_space(10)


def labelled(S, groups, k, r, target):
    labels = {}
    for (c, j), pts in groups.items():
        for p in pts:
            labels[p] = (c, j)
    return DecompositionWitness(S, k, r, labels, target)


def p10_witness():
    return labelled(P10.whole(), {(0, 0): [0, 1, 2], (0, 1): [7, 8, 9], (1, 0): [3, 4, 5, 6]},
                    2, 3, Bounded(4))


def test_verify_valid_p10():
    assert verify_witness(p10_witness()).valid


def test_verify_reports_close_pieces():
    w = labelled(P10.whole(), {(0, 0): [0, 1, 2], (0, 1): [5, 6, 7, 8, 9], (1, 0): [3, 4]},
                 2, 3, Bounded(4))
    rep = verify_witness(w)
    assert not rep.valid
    assert "d(X_{0,0}, X_{0,1}) = 3 ≤ r = 3" in rep.messages()


def test_verify_singleton_and_uncovered():
    S = path_space(1)
    assert verify_witness(trivial_witness(S.whole(), 5, Bounded(0))).valid
    w = labelled(P10.whole(), {(0, 0): [0, 1]}, 1, 1, None)
    kinds = {v.kind for v in verify_witness(w).violations}
    assert kinds == {"uncovered"}


def test_verify_rejected_piece_and_bad_color():
    w = labelled(P10.whole(), {(0, 0): list(range(10))}, 1, 3, Bounded(4))
    assert [v.kind for v in verify_witness(w).violations] == ["rejected"]
    w = labelled(P10.whole(), {(2, 0): list(range(10))}, 2, 3, None)
    assert "bad-color" in {v.kind for v in verify_witness(w).violations}


def test_verify_chain_catches_close_blocks():
    S = path_space(21, id="P21")
    w1 = DecompositionWitness(S.whole(), 2, 2, {p: ((p // 7) % 2, p // 7) for p in S.points})
    members = list(w1.pieces.values())
    # inside a 7-block, 3-blocks of equal color sit 4 apart, which is not > 4
    ws = [DecompositionWitness(P, 2, 4, {p: ((p - P.pts[0]) // 3 % 2, (p - P.pts[0]) // 3) for p in P.pts})
          for P in members]
    ch = DecompositionChain([S.whole()], [family_witness([S.whole()], [w1], 2),
                                          family_witness(members, ws, 4)], 2)
    assert not verify_chain(ch).valid


def test_verify_chain_two_steps_valid():
    S = path_space(21, id="P21")
    w1 = DecompositionWitness(S.whole(), 2, 2, {p: ((p // 7) % 2, p // 7) for p in S.points})
    members = list(w1.pieces.values())
    ws = [DecompositionWitness(P, 2, 4, {p: (0, 0) if p - P.pts[0] < 3 else (1, 0) if p - P.pts[0] < 6 else (0, 1)
                                         for p in P.pts}) for P in members]
    # pieces of diameter <= 2 except the middle {3,4,5}; color 0 pieces {0..2} and {6} are 4 apart
    ch = DecompositionChain([S.whole()], [family_witness([S.whole()], [w1], 2), family_witness(members, ws, 3)], 2)
    assert verify_chain(ch).valid
    bad = DecompositionChain(ch.start, [ch.steps[0].with_scale(4), ch.steps[1].with_scale(2)], 2)
    assert "scale-order" in {v.kind for v in verify_chain(bad).violations}


def test_pad():
    w = p10_witness()
    assert pad_witness(w, 2).pieces == w.pieces
    w5 = pad_witness(w, 5)
    assert w5.k == 5 and verify_witness(w5).valid and w5.pieces == w.pieces
    with pytest.raises(BadK):
        pad_witness(w, 1)


def test_chain_from_kfold_k1_and_invalid():
    w = trivial_witness(P10.whole(), 2, Bounded(9))
    fw = family_witness([P10.whole()], [w], 2, Bounded(9))
    ch = chain_from_kfold(fw)
    assert len(ch.steps) == 1 and ch.steps[0] is fw
    bad = family_witness([P10.whole()], [trivial_witness(P10.whole(), 2, Bounded(3))], 2, Bounded(3))
    with pytest.raises(InvalidInput):
        chain_from_kfold(bad)


def test_chain_from_kfold_three_colors():
    X = path_space(9, id="Z9").whole()
    w = labelled(X, {(0, 0): [0, 1], (0, 1): [5, 6], (1, 0): [2, 3], (2, 0): [4], (2, 1): [7, 8]},
                 3, 2, Bounded(1))
    assert verify_witness(w).valid
    fw = family_witness([X], [w], 2, Bounded(1))
    ch = chain_from_kfold(fw)
    assert len(ch.steps) == 3 and ch.scales == [2, 2, 2] and not ch.strict
    first = ch.steps[0].witnesses[0]
    split = sorted(sorted(P.pts) for P in first.pieces.values())
    assert split == [[0, 1], [2, 3, 4, 7, 8], [5, 6]]
    assert first.labels[0][0] == first.labels[5][0] != first.labels[2][0]
    assert all(verify_witness(x).valid for s in ch.steps for x in s.witnesses)
    assert verify_chain(ch).valid
    assert MetricFamily(ch.final_family().members).key == w.pieces_family().key


def test_string_chains_example():
    X = path_space(18, id="P18").whole()
    w = DecompositionWitness(X, 3, 5, {p: ((p // 3) % 3, p // 3) for p in X.pts}, Bounded(2))
    assert verify_witness(w).valid
    head = chain_from_kfold(family_witness([X], [w], 5, Bounded(2)))
    fam = head.final_family().members
    tail = DecompositionChain(fam, [family_witness(fam, [trivial_witness(P, 7) for P in fam], 7),
                                    family_witness(fam, [trivial_witness(P, 9) for P in fam], 9)], 2)
    ch = string_chains(head, tail, [1, 3, 5])
    assert ch.scales == [1, 3, 5, 7, 9] and ch.strict and verify_chain(ch).valid
    assert string_chains(DecompositionChain([], [], 0), tail) is tail
    with pytest.raises(FamilyMismatch):
        string_chains(head, DecompositionChain([X], [], 8))
    with pytest.raises(ScaleOrderViolation):
        string_chains(head, DecompositionChain(fam, [family_witness(fam, [trivial_witness(P, 1) for P in fam], 1)], 2))


def test_relabel_up_is_rejected():
    X = P10.whole()
    ch = DecompositionChain([X], [family_witness([X], [p10_witness()], 3)], 4)
    with pytest.raises(Exception):
        relabel_scales(ch, [5])


def test_merge_union_examples():
    A, B = Subspace(P10, range(5)), Subspace(P10, range(5, 10))
    w1 = trivial_witness(A, 1, Bounded(4))
    w2 = trivial_witness(B, 1, Bounded(4))
    m = merge_union_witnesses(w1, w2)
    assert m.k == 2 and verify_witness(m).valid
    m0 = merge_union_witnesses(w1, trivial_witness(Subspace(P10, []), 1, Bounded(4)))
    assert m0.space == A and verify_witness(m0).valid
    C = Subspace(P10, range(3, 10))
    w3 = labelled(C, {(0, 0): [3, 4, 5], (1, 0): [6, 7, 8, 9]}, 2, 1, Bounded(4))
    m = merge_union_witnesses(w1, w3)
    assert m.labels[3][0] == 0 and verify_witness(m).valid


def test_union_assemble_examples():
    P = path_space(21)
    parts = [Subspace(P, range(11)), Subspace(P, range(10, 21))]
    w = union_assemble(parts, Subspace(P, range(8, 13)), 3)
    assert verify_witness(w).valid and w.k == 2
    zs = sorted(sorted(Q.pts) for (c, _), Q in w.pieces.items() if c == 1)
    assert zs == [list(range(8)), list(range(13, 21))]
    with pytest.raises(NotSeparated) as e:
        union_assemble(parts, Subspace(P, [10]), 3)
    assert e.value.parts == (0, 1)
    w = union_assemble(parts, P.whole(), 3)
    assert all(c == 0 for c, _ in w.labels.values()) and verify_witness(w).valid


def _doubling_embedding(with_minus=True):
    evens = list(range(0, 21, 2))
    Y = build_space(evens, [(a, b, abs(a - b)) for a in evens for b in evens if a < b], id="evens")
    X = path_space(41, id="P41")
    mp = {y: 2 * y for y in evens}
    up = Modulus.from_function(lambda t: 2 * t, 40)
    return Y, X, CoarseMapWitness(Y, X, mp, up, up if with_minus else None)


def test_transfer_doubling():
    Y, X, emb = _doubling_embedding()
    w = heuristic_decompose(X.whole(), 6, 14)
    ch = DecompositionChain([X.whole()], [family_witness([X.whole()], [w], 6)], 14)
    out = transfer_along_embedding(ch, emb)
    assert out.scales == [3] and verify_chain(out).valid
    wy = transfer_along_embedding(w, emb)
    assert wy.r == 3 and verify_witness(wy).valid


def test_transfer_identity_and_errors():
    ident = Modulus.identity(9)
    emb = CoarseMapWitness(P10, P10, {i: i for i in range(10)}, ident, ident)
    ch = DecompositionChain([P10.whole()], [family_witness([P10.whole()], [p10_witness()], 3)], 4)
    out = transfer_along_embedding(ch, emb)
    assert out.scales == [3] and verify_chain(out).valid
    _, _, bad = _doubling_embedding(with_minus=False)
    with pytest.raises(ModulusMissing):
        transfer_along_embedding(ch, bad)
    huge = Modulus.from_function(lambda t: 100 * t + 100, 9)
    with pytest.raises(ScaleCollapse):
        transfer_along_embedding(ch, CoarseMapWitness(P10, P10, {i: i for i in range(10)}, huge, ident))


def test_restrict_examples():
    w = p10_witness()
    same = restrict_to_subspace(w, P10.whole())
    assert same.pieces == w.pieces
    assert verify_witness(restrict_to_subspace(w, Subspace(P10, []))).valid
    odd = restrict_to_subspace(w, Subspace(P10, [1, 3, 5, 7, 9]))
    assert verify_witness(odd).valid and (odd.k, odd.r) == (2, 3)
    with pytest.raises(NotSubspace):
        restrict_to_subspace(w, Subspace(path_space(3, id="other"), [0]))


def test_subspace_closure():
    t = subspace_closure(MetricFamily([P10.whole()]))
    assert t.accepts(Subspace(P10, [3, 4, 5])) and t.accepts(Subspace(P10, []))
    assert not t.accepts(path_space(3, id="other").whole())
    e = Explicit([Subspace(P10, [1, 2])])
    assert e.accepts(Subspace(P10, [1, 2])) and not e.accepts(Subspace(P10, [1]))


# ------------------------------------------------------------- properties

spaces = st.builds(lambda seed, n: random_space(random.Random(seed), n, id=f"w{seed}_{n}"),
                   st.integers(0, 10_000), st.integers(2, 10))


@st.composite
def witnesses(draw):
    S = draw(spaces)
    r = draw(st.integers(1, 3))
    D = draw(st.integers(1, 6))
    return heuristic_decompose(S.whole(), r, D), r, D


@settings(max_examples=50, deadline=None)
@given(witnesses(), st.data())
def test_soundness_and_monotonicity(wrD, data):
    w, r, D = wrD
    assert verify_witness(w).valid
    for c in range(w.k):
        cls = w.color_class(c)
        for comp in r_components(cls, r):
            owners = {w.labels[p] for p in comp.pts}
            assert len(owners) == 1
    r2 = data.draw(st.integers(0, r))
    assert verify_witness(w.with_scale(r2)).valid
    assert verify_witness(DecompositionWitness(w.space, w.k, r, w.labels, Bounded(D + 3))).valid
    k2 = data.draw(st.integers(w.k, w.k + 3))
    assert pad_witness(w, k2).pieces == w.pieces and verify_witness(pad_witness(w, k2)).valid


@settings(max_examples=50, deadline=None)
@given(witnesses(), st.data())
def test_restrict_preserves_validity(wrD, data):
    w, _, _ = wrD
    pts = data.draw(st.lists(st.sampled_from(w.space.pts), unique=True))
    assert verify_witness(restrict_to_subspace(w, Subspace(w.space.ambient, pts))).valid


@settings(max_examples=50, deadline=None)
@given(witnesses())
def test_kfold_rewrite(wrD):
    w, r, D = wrD
    fw = family_witness([w.space], [w], r, Bounded(D))
    ch = chain_from_kfold(fw)
    assert len(ch.steps) == w.k and verify_chain(ch).valid
    assert all(Bounded(D).accepts(P) for P in ch.final_family())


@settings(max_examples=50, deadline=None)
@given(spaces, st.integers(1, 3), st.data())
def test_union_assemble_iff(S, r, data):
    pts = list(S.points)
    cut = data.draw(st.integers(1, len(pts)))
    parts = [Subspace(S, pts[:cut]), Subspace(S, pts[cut - 1:])]
    Y = Subspace(S, data.draw(st.lists(st.sampled_from(pts), unique=True)))
    zs = [P.minus(Y) for P in parts]
    separated = not len(zs[0]) or not len(zs[1]) or set_distance(zs[0], zs[1]) > r
    try:
        w = union_assemble(parts, Y, r)
    except NotSeparated:
        assert not separated
    else:
        assert separated and verify_witness(w).valid


@settings(max_examples=40, deadline=None)
@given(witnesses(), st.integers(1, 3))
def test_transfer_separation(wrD, factor):
    """Pulled-back pieces of one color are more than r' apart whenever rho_plus(r') <= r."""
    w, r, D = wrD
    S = w.space.ambient
    Xs = build_space(S.points, [(a, b, factor * S.d(a, b)) for a in S.points for b in S.points if a < b], id=S.id + "x")
    wx = DecompositionWitness(Xs.whole(), w.k, factor * r, w.labels, None)
    assert verify_witness(wx).valid
    up = Modulus.from_function(lambda t: factor * t, factor * S.diameter + factor * r + 1)
    emb = CoarseMapWitness(S, Xs, {p: p for p in S.points}, up, up)
    back = transfer_along_embedding(wx, emb)
    assert factor * back.r <= wx.r and back.r >= r
    assert verify_witness(back).valid
