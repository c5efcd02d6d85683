import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdcbench.errors import BudgetExceeded, LeavesWindow, MalformedElement, NoPeripherals
from fdcbench.groups import (Cyclic, Free, FreeAbelian, FreeProduct, TranslationAction,
                             coset_partition, enumerate_ball, relative_ball, spec_from_json,
                             spec_to_json, translate, word_length)

from oracles import free_ball_size, z2_ball_size

ZZ = FreeProduct((FreeAbelian(1), FreeAbelian(1)))


def test_ball_sizes_match_closed_forms():
    for N in range(5):
        assert len(enumerate_ball(Free(2), N)) == free_ball_size(2, N)
        assert len(enumerate_ball(FreeAbelian(2), N)) == z2_ball_size(N)
        assert len(enumerate_ball(ZZ, N)) == free_ball_size(2, N)
    assert len(enumerate_ball(Cyclic(3), 5)) == 3


def test_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_ball(Free(3), 8, budget=1000)


def test_word_lengths():
    assert word_length(Free(2), Free(2).parse("abA")) == 3
    F = FreeAbelian(2)
    assert word_length(F, F.parse("aaaBB")) == 5
    assert word_length(ZZ, ZZ.parse("aaB")) == 3
    assert Free(2).parse("aA") == Free(2).identity()
    with pytest.raises(MalformedElement):
        Free(2).parse("az")


def test_names_round_trip():
    for spec in (Free(2), FreeAbelian(2), Cyclic(5), ZZ, FreeProduct((Cyclic(2), Cyclic(3)))):
        W = enumerate_ball(spec, 3)
        for name, g in zip(W.names, W.elements):
            assert spec.parse(name) == g and spec.name(g) == name


def test_spec_json_round_trip():
    spec = FreeProduct((FreeAbelian(1), Cyclic(3), Free(2)))
    assert spec_from_json(spec_to_json(spec)) == spec
    assert spec_from_json({"variant": "free_product", "factors": [{"variant": "free_abelian", "rank": 1}] * 2}) == ZZ


def test_relative_ball_examples():
    W = enumerate_ball(ZZ, 4)
    B1 = relative_ball(W, 1)
    want = {"e"} | {c * k for c in "aAbB" for k in range(1, 5)}
    assert B1.pointset == want
    assert relative_ball(W, 0).pts == ("e",)
    with pytest.raises(NoPeripherals):
        relative_ball(enumerate_ball(Free(2), 2), 1)


def test_coset_partition_examples():
    W = enumerate_ball(ZZ, 4)
    cs = coset_partition(W, 0, ["e"])
    assert len(cs) == 1 and set(cs[0].members) == {"e"} | {c * k for c in "aA" for k in range(1, 5)}
    assert [c.rep for c in coset_partition(W, 0, ["e", "b"])] == ["e", "b"]
    reps = [c.rep for c in coset_partition(W, 0, ["e", "a", "A", "b", "B"])]
    assert sorted(reps) == ["B", "b", "e"]


def test_translate_examples():
    F2 = Free(2)
    W = enumerate_ball(F2, 4)
    X = W.s_space().whole().restrict(["e", "b"])
    Y = translate(W, "a", X)
    assert Y.pointset == {"a", "ab"} and Y.d("a", "ab") == 1
    assert translate(W, "e", X) == X
    with pytest.raises(LeavesWindow):
        translate(W, "aaaa", W.s_space().whole().restrict(["a"]))


def test_rel_metric_bounded_by_word_metric():
    for N in (3, 4):
        W = enumerate_ball(ZZ, N)
        assert (W.rel_matrix <= W.s_space().matrix).all()


def test_window_monotone():
    small, big = enumerate_ball(ZZ, 3), enumerate_ball(ZZ, 5)
    assert set(small.names) <= set(big.names)
    idx = [big.name_index[n] for n in small.names]
    assert (big.rel_matrix[np.ix_(idx, idx)] <= small.rel_matrix).all()


def test_h_edges_are_single_factor_steps():
    W = enumerate_ball(ZZ, 3)
    spec = W.spec
    hset = {(min(t, u), max(t, u)) for t, u, _ in W.h_edges}
    for t in range(len(W)):
        for u in range(t + 1, len(W)):
            g, h = W.elements[t], W.elements[u]
            q = spec.mul(spec.inv(g), h)
            one_factor = spec.syllables(q) == 1
            assert ((t, u) in hset) == one_factor


def test_max_syllables_window():
    W = enumerate_ball(ZZ, 6, max_syllables=2)
    assert all(ZZ.syllables(g) <= 2 for g in W.elements)
    assert "ab" in W and "aba" not in W


groups = st.sampled_from([Free(2), FreeAbelian(2), ZZ, FreeProduct((Cyclic(2), Cyclic(3))), Cyclic(4)])


def _random_word(spec, rng, n):
    letters = [ch for i in range(spec.ngens) for ch in (chr(97 + i), chr(65 + i))]
    return spec.parse("".join(rng.choice(letters) for _ in range(n)) or "e")


@settings(max_examples=80, deadline=None)
@given(groups, st.integers(0, 10**6))
def test_left_invariance(spec, seed):
    rng = random.Random(seed)
    g, x, y = (_random_word(spec, rng, rng.randint(0, 6)) for _ in range(3))
    act = TranslationAction(spec, g)
    assert spec.distance(act.apply(x), act.apply(y)) == spec.distance(x, y)
    assert spec.distance(x, y) == spec.length(spec.mul(spec.inv(x), y))


@settings(max_examples=40, deadline=None)
@given(groups, st.integers(0, 4))
def test_ball_nesting(spec, N):
    a, b = enumerate_ball(spec, N), enumerate_ball(spec, N + 1)
    assert set(a.names) <= set(b.names)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_translation_maps_cosets_to_cosets(seed):
    rng = random.Random(seed)
    g, x = _random_word(ZZ, rng, 4), _random_word(ZZ, rng, 4)
    h = ZZ.parse(rng.choice(["a", "aa", "A", "b", "BB"]))
    i = ZZ.factor_of(h)
    xh = ZZ.mul(x, h)
    assert ZZ.coset_key(x, i) == ZZ.coset_key(xh, i)
    assert ZZ.coset_key(ZZ.mul(g, x), i) == ZZ.coset_key(ZZ.mul(g, xh), i)
