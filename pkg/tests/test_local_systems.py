import numpy as np
import pytest

from oracle import brute_complex_types
from towercoh.catalog import build_builtin
from towercoh.complexes import Subcomplex
from towercoh.groups import make_abelian_tower, make_heisenberg_tower
from towercoh.local_systems import (ChainMapError, CochainMap, CoinducedModule, DescriptorError,
                                    cellular_complex, coefficient_inclusion, cover_of, extension_by_zero,
                                    make_descriptor, restricted_complex, restriction, tower_cochain_map,
                                    trivial_descriptor, twisted_complex, validate_descriptor)
from towercoh.smith import cohomology


@pytest.fixture
def torus():
    return build_builtin("torus")


def test_abelian_cocycle_valid(torus):
    T = make_abelian_tower(2, 2, 2)
    d = make_descriptor(torus, T, {"a": [1, 0], "b": [0, 1], "c": [1, 1]})
    assert validate_descriptor(d).ok
    assert d.is_dense()


def test_bad_diagonal_reported_at_first_triangle(torus):
    T = make_abelian_tower(2, 2, 2)
    with pytest.raises(DescriptorError) as err:
        make_descriptor(torus, T, {"a": [1, 0], "b": [0, 1], "c": [1, 0]})
    assert err.value.location[:2] == (2, 0)


def test_circle_any_label_valid():
    c = build_builtin("circle")
    T = make_heisenberg_tower(2, 2)
    assert validate_descriptor(make_descriptor(c, T, {"e": (1, 1, 1)})).ok


def test_unknown_edge_and_bad_label(torus):
    T = make_abelian_tower(1, 2, 2)
    with pytest.raises(DescriptorError, match="missing edge"):
        make_descriptor(torus, T, {"zz": [1]})
    with pytest.raises(DescriptorError):
        make_descriptor(torus, T, {"a": [1, 2]})


def test_heisenberg_standard_labels_flat():
    cx = build_builtin("heisenberg_nilmanifold")
    T = make_heisenberg_tower(2, 2)
    d = make_descriptor(cx, T, cx.meta["labels"]["standard"])
    assert d.is_dense()


def test_circle_d0_matrix():
    c = build_builtin("circle")
    d = make_descriptor(c, make_abelian_tower(1, 2, 1), {"e": [1]})
    tw = twisted_complex(d, None, 1, 1)
    assert tw.matrix(0).tolist() == [[1, 1], [1, 1]]
    H0, H1 = cohomology(tw, 0), cohomology(tw, 1)
    assert H0.exponents == [1] and H1.exponents == [1]


def test_coinduced_action_is_permutation():
    T = make_heisenberg_tower(2, 1)
    M = CoinducedModule(T, 1, 2)
    assert M.rank == 8 and M.modulus == 4
    g, h = (1, 0, 0), (0, 1, 0)
    L = T.level(1)
    # action is a left action: A(g) A(h) = A(gh)
    assert (M.action(g) @ M.action(h) == M.action(L.mul(g, h))).all()


def test_trivial_descriptor_is_tensor_product(torus):
    T = make_abelian_tower(1, 2, 1)
    d = trivial_descriptor(torus, T)
    tw = twisted_complex(d, None, 1, 1)
    cc = cellular_complex(torus, 2, 1)
    for n in range(2):
        assert (tw.matrix(n) == np.kron(cc.matrix(n), np.eye(2, dtype=np.int64)) % 2).all()


def test_relative_degree0_blocks():
    cyl = build_builtin("cylinder")
    Z = Subcomplex(cyl, cyl.meta["subcomplexes"]["boundary"])
    d = make_descriptor(cyl, make_abelian_tower(1, 2, 1), cyl.meta["labels"]["dense"])
    tw = twisted_complex(d, Z, 1, 1)
    # no interior vertices, the two interior edges survive
    assert tw.rank(0) == 0 and tw.rank(1) == 2 * 2
    sub = restricted_complex(d, Z, 1, 1)
    assert sub.rank(0) == 4 and sub.rank(1) == 4


def test_square_zero_everywhere():
    cx = build_builtin("heisenberg_nilmanifold")
    d = make_descriptor(cx, make_heisenberg_tower(2, 1), cx.meta["labels"]["standard"])
    tw = twisted_complex(d, None, 1, 2)
    assert tw.check_square_zero() == (True, None)


def test_coefficient_inclusion_examples():
    T = make_abelian_tower(1, 2, 2)
    inc01 = coefficient_inclusion(T, 0, 1)
    assert inc01.tolist() == [[1], [1]]  # constants
    inc12 = coefficient_inclusion(T, 1, 2)
    # each delta function pulls back to the sum of its two preimages
    assert (inc12.sum(axis=0) == 2).all() and (inc12.sum(axis=1) == 1).all()
    for i, x in enumerate(T.level(2).elements):
        assert inc12[i, T.level(1).index(T.projection(2, x))] == 1
    assert (coefficient_inclusion(T, 0, 2) == inc12 @ inc01).all()


def test_tower_map_is_cochain_map(torus):
    T = make_abelian_tower(2, 2, 2)
    d = make_descriptor(torus, T, torus.meta["labels"]["full"])
    f = tower_cochain_map(d, None, 1, 2, 2)
    f.check()


def test_chain_map_error_has_witness(torus):
    T = make_abelian_tower(2, 2, 1)
    d = make_descriptor(torus, T, torus.meta["labels"]["full"])
    src = twisted_complex(d, None, 1, 1)
    blocks = {0: np.eye(4, dtype=np.int64), 1: np.zeros((12, 12), dtype=np.int64),
              2: np.zeros((8, 8), dtype=np.int64)}
    with pytest.raises(ChainMapError) as err:
        CochainMap(src, src, blocks).check()
    assert err.value.degree == 0 and err.value.entry is not None


def test_extension_and_restriction_are_cochain_maps():
    cyl = build_builtin("cylinder")
    Z = Subcomplex(cyl, cyl.meta["subcomplexes"]["boundary"])
    d = make_descriptor(cyl, make_abelian_tower(1, 2, 2), cyl.meta["labels"]["dense"])
    rel, ab, sub = twisted_complex(d, Z, 2, 2), twisted_complex(d, None, 2, 2), restricted_complex(d, Z, 2, 2)
    extension_by_zero(rel, ab).check()
    restriction(ab, sub).check()


@pytest.mark.parametrize("r,s", [(0, 1), (1, 1), (1, 2), (2, 1)])
def test_shapiro_torus_full(torus, r, s):
    T = make_abelian_tower(2, 2, 2)
    d = make_descriptor(torus, T, torus.meta["labels"]["full"])
    tw = twisted_complex(d, None, r, s)
    cc = cellular_complex(cover_of(d, r).complex, 2, s)
    assert [cohomology(tw, n).exponents for n in range(3)] == [cohomology(cc, n).exponents for n in range(3)]


def test_twisted_matches_enumeration():
    c = build_builtin("circle")
    d = make_descriptor(c, make_abelian_tower(1, 2, 2), {"e": [1]})
    tw = twisted_complex(d, None, 2, 2)
    assert brute_complex_types(tw, 2) == [cohomology(tw, n).exponents for n in range(2)] == [[2], [2]]


def test_level_out_of_range(torus):
    d = trivial_descriptor(torus, make_abelian_tower(1, 2, 1))
    with pytest.raises(Exception):
        twisted_complex(d, None, 3, 1)
    with pytest.raises(ValueError):
        twisted_complex(d, None, 1, 0)
