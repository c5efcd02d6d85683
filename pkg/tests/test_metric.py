from fractions import Fraction
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdcbench.errors import (AmbientMismatch, DisconnectedGraph, EmptySet,
                             MetricAxiomViolation, NotSubspace)
from fdcbench.metric import (CoarseMapWitness, MetricFamily, Modulus, Subspace, build_space,
                             check_coarse_map, cycle_space, graph_metric,
                             grid_space, path_space, r_components, set_distance)

from conftest import random_space


def test_single_point_space():
    S = build_space(["x"], [])
    assert S.diameter == 0


def test_triangle_violation_names_triple():
    with pytest.raises(MetricAxiomViolation) as e:
        build_space("abc", [("a", "b", 1), ("b", "c", 1), ("a", "c", 3)])
    assert "a" in str(e.value) and "c" in str(e.value)


def test_zero_distance_and_missing_pair():
    with pytest.raises(MetricAxiomViolation):
        build_space("ab", [("a", "b", 0)])
    with pytest.raises(MetricAxiomViolation):
        build_space("abc", [("a", "b", 1)])


def test_floats_rejected_rationals_kept():
    with pytest.raises(MetricAxiomViolation):
        build_space("ab", [("a", "b", 0.5)])
    S = build_space("abc", [("a", "b", Fraction(1, 2)), ("b", "c", 1), ("a", "c", Fraction(3, 2))])
    assert S.diameter == Fraction(3, 2)


def test_path_and_grid():
    assert path_space(10).diameter == 9
    G = grid_space(3)
    assert G.d("0,0", "2,2") == 4


def test_cycle3_and_disconnected():
    C = cycle_space(3)
    assert all(C.d(a, b) == 1 for a in C.points for b in C.points if a != b)
    with pytest.raises(DisconnectedGraph):
        graph_metric([0, 1, 2, 3], [(0, 1), (2, 3)])


def test_set_distance_examples():
    P = path_space(10)
    assert set_distance(Subspace(P, [0, 1, 2]), Subspace(P, [7, 8, 9])) == 5
    assert set_distance(Subspace(P, [4]), Subspace(P, [4])) == 0
    assert set_distance(Subspace(P, [0]), Subspace(P, [5])) == 5
    with pytest.raises(EmptySet):
        set_distance(Subspace(P, []), Subspace(P, [1]))
    with pytest.raises(AmbientMismatch):
        set_distance(Subspace(P, [0]), Subspace(path_space(3), [0]))


def test_subspace_rejects_foreign_points():
    with pytest.raises(NotSubspace):
        Subspace(path_space(3), [5])


def test_r_components_examples():
    P = path_space(10)
    assert len(r_components(P.whole(), 1)) == 1
    parts = r_components(Subspace(P, [0, 1, 2, 7, 8, 9]), 3)
    assert sorted(sorted(c.pts) for c in parts) == [[0, 1, 2], [7, 8, 9]]
    assert all(len(c) == 1 for c in r_components(P.whole(), 0))


def test_family_bound_checked():
    P = path_space(10)
    with pytest.raises(MetricAxiomViolation):
        MetricFamily([P.whole()], bound=3)
    assert MetricFamily([Subspace(P, [0, 1])], bound=1).sup_diameter() == 1


def test_modulus_step_and_clamp():
    m = Modulus([(0, 0), (2, 5), (4, 7)])
    assert [m(t) for t in range(6)] == [0, 0, 5, 5, 7, 7]
    assert list(m.apply(np.array([0, 3, 9]))) == [0, 5, 7]
    with pytest.raises(ValueError):
        Modulus([(0, 3), (1, 2)])


def _doubling():
    A = path_space(6, id="A")
    B = path_space(11, id="B")
    return A, B, {i: 2 * i for i in range(6)}


def test_coarse_map_examples():
    P = path_space(10)
    rep = check_coarse_map(CoarseMapWitness(P, P, {i: i for i in range(10)}, Modulus.identity(9)))
    assert rep.valid and rep.contractive
    A, B, mp = _doubling()
    rep = check_coarse_map(CoarseMapWitness(A, B, mp, Modulus.from_function(lambda t: 2 * t, 5)))
    assert rep.valid and not rep.contractive
    rep = check_coarse_map(CoarseMapWitness(A, B, mp, Modulus.from_function(lambda t: 2 * t, 5), contractive=True))
    assert not rep.valid
    assert rep.contraction_violations[0][:2] == (0, 1)


def test_coarse_map_missing_point():
    A, B, mp = _doubling()
    del mp[3]
    rep = check_coarse_map(CoarseMapWitness(A, B, mp, Modulus.identity(10)))
    assert not rep.valid and rep.missing == [3]


spaces = st.builds(lambda seed, n: random_space(random.Random(seed), n, id=f"h{seed}_{n}"),
                   st.integers(0, 10_000), st.integers(1, 9))


@settings(max_examples=60, deadline=None)
@given(spaces)
def test_metric_axioms(S):
    M = S.matrix
    n = len(S.points)
    assert (M == M.T).all() and (np.diag(M) == 0).all()
    assert all(M[i, j] > 0 for i in range(n) for j in range(n) if i != j)
    for k in range(n):
        assert (M <= M[:, [k]] + M[[k], :]).all()


@settings(max_examples=60, deadline=None)
@given(spaces, st.integers(0, 4), st.integers(0, 4), st.data())
def test_r_components_properties(S, r, extra, data):
    pts = data.draw(st.lists(st.sampled_from(S.points), unique=True))
    sub = Subspace(S, pts)
    parts = r_components(sub, r)
    assert sorted(p for c in parts for p in c.pts) == sorted(sub.pts)
    for i, a in enumerate(parts):
        for b in parts[i + 1:]:
            assert set_distance(a, b) > r
    coarse = r_components(sub, r + extra)
    for c in parts:
        assert any(c.issubset(d) for d in coarse)


@settings(max_examples=40, deadline=None)
@given(spaces, st.data())
def test_induced_distances(S, data):
    pts = data.draw(st.lists(st.sampled_from(S.points), unique=True, min_size=1))
    sub = Subspace(S, pts)
    for i, x in enumerate(sub.pts):
        for j, y in enumerate(sub.pts):
            assert sub.matrix[i, j] == S.d(x, y)
