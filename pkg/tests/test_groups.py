import pickle

import numpy as np
import pytest

from oracle import heis_matrix, matrix_closure
from towercoh.groups import (LevelGroup, TowerError, closure_of, is_prime, make_abelian_tower,
                             make_custom_tower, make_heisenberg_tower, quotient_element, quotient_tower,
                             trivial_subtower)


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


@pytest.mark.parametrize("N,p,R", [(1, 2, 3), (2, 3, 2), (0, 5, 2)])
def test_abelian_orders(N, p, R):
    T = make_abelian_tower(N, p, R)
    assert [T.order(r) for r in range(R + 1)] == [p ** (N * r) for r in range(R + 1)]
    assert all(T.level(r).is_abelian() for r in range(R + 1))


def test_abelian_example_orders():
    assert make_abelian_tower(2, 3, 2).order(2) == 81
    T0 = make_abelian_tower(0, 2, 3)
    assert all(T0.order(r) == 1 for r in range(4))


def test_bad_prime_and_depth():
    with pytest.raises(TowerError):
        make_abelian_tower(1, 4, 2)
    T = make_abelian_tower(1, 2, 2)
    with pytest.raises(TowerError):
        T.level(3)
    with pytest.raises(TowerError):
        T.projection(0, (0,))


def test_heisenberg_orders_and_exponent():
    T = make_heisenberg_tower(2, 2)
    assert T.order(1) == 8 and T.order(2) == 64
    assert not T.level(1).is_abelian()
    T3 = make_heisenberg_tower(3, 1)
    L = T3.level(1)
    assert L.order == 27
    assert L.exponent() == 3
    # oracle: explicit matrices, every cube is the identity
    for (a, b, c) in L.elements:
        m = heis_matrix(a, b, c, 3)
        assert (np.linalg.matrix_power(m, 3) % 3 == np.eye(3, dtype=np.int64)).all()


def test_heisenberg_group_law_matches_matrices():
    T = make_heisenberg_tower(2, 2)
    L = T.level(2)
    rng = np.random.default_rng(0)
    els = L.elements
    for _ in range(50):
        x, y = els[rng.integers(len(els))], els[rng.integers(len(els))]
        z = L.mul(x, y)
        prod = heis_matrix(*x, 4).dot(heis_matrix(*y, 4)) % 4
        assert (heis_matrix(*z, 4) == prod).all()


def test_heisenberg_projection_entrywise():
    T = make_heisenberg_tower(2, 2)
    for x in T.level(2).elements:
        assert T.projection(2, x) == tuple(a % 2 for a in x)


def test_projection_is_homomorphism():
    for T in (make_abelian_tower(2, 2, 2), make_heisenberg_tower(2, 2), make_heisenberg_tower(3, 2)):
        L, lo = T.level(2), T.level(1)
        for x in L.elements[::3]:
            for y in L.elements[::5]:
                assert T.projection(2, L.mul(x, y)) == lo.mul(T.projection(2, x), T.projection(2, y))


def test_left_translation_is_permutation():
    L = make_heisenberg_tower(2, 1).level(1)
    g = (1, 0, 0)
    perm = L.left_translation(g)
    assert sorted(perm.tolist()) == list(range(L.order))
    # perm[x] = index of g^-1 x
    for i, x in enumerate(L.elements):
        assert perm[i] == L.index(L.mul(L.inv(g), x))


def test_level_group_pickles():
    L = make_heisenberg_tower(2, 1).level(1)
    L.left_translation((1, 0, 0))
    L2 = pickle.loads(pickle.dumps(L))
    assert L2.order == 8 and L2.mul((1, 0, 0), (0, 1, 0)) == L.mul((1, 0, 0), (0, 1, 0))


def test_elements_and_towers():
    T = make_abelian_tower(2, 2, 3)
    x = T.element([3, 5])
    assert x.at(0) == (0, 0) and x.at(1) == (1, 1) and x.at(3) == (3, 5)
    assert T.contains(x)
    assert T.mul(x, T.inv(x)) == T.identity()
    with pytest.raises(TowerError):
        T.element([1, 2, 3])
    H = make_heisenberg_tower(2, 2)
    h = H.element((1, 2, 3))
    assert h.at(1) == (1, 0, 1)


def test_closure_examples():
    T = make_abelian_tower(2, 2, 3)
    H = closure_of([T.element([1, 0])], T)
    assert [len(H.subgroup(r)) for r in range(4)] == [1, 2, 4, 8]
    T1 = make_abelian_tower(1, 2, 3)
    H1 = closure_of([T1.element([2])], T1)
    assert [H1.index(r) for r in range(1, 4)] == [2, 2, 2]


def test_heisenberg_generators_are_dense():
    T = make_heisenberg_tower(2, 2)
    H = closure_of([T.element((1, 0, 0)), T.element((0, 1, 0))], T)
    for r in (1, 2):
        q = 2 ** r
        oracle = matrix_closure([heis_matrix(1, 0, 0, q), heis_matrix(0, 1, 0, q)], q)
        assert len(oracle) == T.order(r)
        assert set(H.subgroup(r)) == oracle
    assert H.is_full()


def test_closure_is_idempotent():
    T = make_heisenberg_tower(2, 2)
    H = closure_of([T.element((1, 1, 0))], T)
    tops = [T.element(x) for x in H.subgroup(2)]
    assert closure_of(tops, T).subgroups == H.subgroups


def test_quotient_heisenberg_by_centre():
    T = make_heisenberg_tower(2, 2)
    Z = closure_of([T.element((0, 0, 1))], T)
    assert Z.is_normal()[0]
    Q = quotient_tower(T, Z)
    assert [Q.order(r) for r in range(3)] == [1, 4, 16]
    assert all(Q.level(r).is_abelian() for r in range(3))
    a, b = T.element((1, 0, 0)), T.element((0, 1, 0))
    qa, qb = quotient_element(Q, a), quotient_element(Q, b)
    assert Q.mul(qa, qb) == Q.mul(qb, qa)


def test_quotient_by_trivial_is_same():
    T = make_abelian_tower(2, 2, 2)
    Q = quotient_tower(T, trivial_subtower(T))
    assert [Q.order(r) for r in range(3)] == [T.order(r) for r in range(3)]


def test_quotient_abelian_by_factor():
    T = make_abelian_tower(2, 2, 3)
    Q = quotient_tower(T, closure_of([T.element([1, 0])], T))
    assert [Q.order(r) for r in range(4)] == [1, 2, 4, 8]
    assert Q.level(3).exponent() == 8  # cyclic


def test_quotient_rejects_non_normal():
    T = make_heisenberg_tower(2, 1)
    H = closure_of([T.element((1, 0, 0))], T)
    ok, witness = H.is_normal()
    assert not ok and witness[0] == 1
    with pytest.raises(TowerError, match="not normal at level 1"):
        quotient_tower(T, H)


def _cyclic_tables(p, R):
    tables = [[[0]]]
    projections = []
    for r in range(1, R + 1):
        q = p ** r
        tables.append([[(i + j) % q for j in range(q)] for i in range(q)])
        projections.append([i % (q // p) for i in range(q)])
    return tables, projections


def test_custom_tower_matches_cyclic():
    tables, projections = _cyclic_tables(2, 3)
    T = make_custom_tower(2, tables, projections)
    assert [T.order(r) for r in range(4)] == [1, 2, 4, 8]
    x = T.element(5)
    assert x.images == (0, 1, 1, 5)


def test_custom_tower_validation():
    tables, projections = _cyclic_tables(2, 2)
    bad = [row[:] for row in tables[2]]
    bad[1][1] = 0
    with pytest.raises(TowerError):
        make_custom_tower(2, [tables[0], tables[1], bad], projections)
    with pytest.raises(TowerError):
        make_custom_tower(2, tables, [projections[0], [0, 1, 1, 1]])


def test_truncate_and_describe():
    T = make_heisenberg_tower(3, 2)
    assert T.truncate(1).depth == 1
    assert "heisenberg" in T.describe()
    with pytest.raises(TowerError):
        T.truncate(5)


def test_level_group_rejects_unknown():
    L = LevelGroup([0, 1], lambda x, y: (x + y) % 2, 0)
    with pytest.raises(TowerError):
        L.index(3)
