import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from towercoh.catalog import build_builtin
from towercoh.complex_io import format_complex, parse_complex
from towercoh.complexes import complex_from_simplices, euler_characteristic
from towercoh.groups import make_abelian_tower, make_heisenberg_tower
from towercoh.local_systems import cellular_complex, cover_of, make_descriptor, twisted_complex
from towercoh.smith import (cohomology, cohomology_from_matrices, local_snf, matmul_mod, smith_normal_form,
                            uct_cohomology_type, valuation)

PRIMES = st.sampled_from([2, 3, 5])


@st.composite
def matrices_mod(draw):
    p = draw(PRIMES)
    s = draw(st.integers(1, 3))
    m = draw(st.integers(1, 6))
    n = draw(st.integers(1, 6))
    q = p ** s
    entries = draw(st.lists(st.integers(0, q - 1), min_size=m * n, max_size=m * n))
    return p, s, np.array(entries, dtype=np.int64).reshape(m, n)


@settings(max_examples=150, deadline=None)
@given(matrices_mod())
def test_local_snf_is_certified(data):
    p, s, M = data
    q = p ** s
    L = local_snf(M, p, s, track_rows=True, track_cols=True)
    D = matmul_mod(matmul_mod(L.P, M, q), L.Q, q)
    nz = {(i, j): p ** v for i, j, v in L.pivots}
    for (i, j), val in np.ndenumerate(D):
        assert val == nz.get((i, j), 0)
    rows = [i for i, _, _ in L.pivots]
    cols = [j for _, j, _ in L.pivots]
    assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)


@settings(max_examples=150, deadline=None)
@given(matrices_mod())
def test_local_diagonal_matches_integer_snf(data):
    p, s, M = data
    integer = sorted(min(valuation(d, p), s) for d in smith_normal_form(M).diagonal)
    assert [v for v in integer if v < s] == local_snf(M, p, s).diagonal()


@settings(max_examples=100, deadline=None)
@given(matrices_mod())
def test_cohomology_of_two_term_complex(data):
    # 0 -> C0 --M--> C1 -> 0: H^1 is coker M, H^0 is ker M; orders multiply to |C0|... via Euler
    p, s, M = data
    m, n = M.shape
    H0 = cohomology_from_matrices(np.zeros((n, 0), dtype=np.int64), M, 0, p, s)
    H1 = cohomology_from_matrices(M, np.zeros((0, m), dtype=np.int64), 1, p, s)
    assert H0.order_log - H1.order_log == s * (n - m)
    assert uct_cohomology_type(np.zeros((n, 0), dtype=np.int64), M, n, p, s) == H0.exponents
    assert uct_cohomology_type(M, np.zeros((0, m), dtype=np.int64), m, p, s) == H1.exponents


@settings(max_examples=40, deadline=None)
@given(a=st.lists(st.integers(-9, 9), min_size=2, max_size=2),
       b=st.lists(st.integers(-9, 9), min_size=2, max_size=2),
       r=st.integers(0, 2), s=st.integers(1, 2))
def test_shapiro_on_abelian_torus(a, b, r, s):
    t = build_builtin("torus")
    T = make_abelian_tower(2, 2, 2)
    c = [x + y for x, y in zip(a, b)]
    d = make_descriptor(t, T, {"a": a, "b": b, "c": c})
    tw = twisted_complex(d, None, r, s)
    cc = cellular_complex(cover_of(d, r).complex, 2, s)
    assert [cohomology(tw, n).exponents for n in range(3)] == [cohomology(cc, n).exponents for n in range(3)]


@settings(max_examples=30, deadline=None)
@given(x=st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(0, 7)),
       y=st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(0, 7)),
       z=st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(0, 7)))
def test_heisenberg_group_axioms(x, y, z):
    T = make_heisenberg_tower(2, 3)
    L = T.level(3)
    assert L.mul(L.mul(x, y), z) == L.mul(x, L.mul(y, z))
    assert L.mul(x, L.inv(x)) == L.identity
    assert T.projection(3, L.mul(x, y)) == T.level(2).mul(T.projection(3, x), T.projection(3, y))


@st.composite
def simplicial(draw):
    n = draw(st.integers(3, 6))
    tris = draw(st.lists(st.tuples(*[st.integers(0, n - 1)] * 3).filter(lambda t: len(set(t)) == 3),
                         min_size=1, max_size=6))
    return n, tris


@settings(max_examples=40, deadline=None)
@given(simplicial())
def test_text_roundtrip_and_euler(data):
    n, tris = data
    cx = complex_from_simplices(n, tris)
    back = parse_complex(format_complex(cx))
    assert back == cx
    # Euler characteristic equals the alternating sum of mod-p Betti numbers
    cc = cellular_complex(cx, 3, 1)
    betti = [len(cohomology(cc, k).exponents) for k in range(cx.dim + 1)]
    assert sum((-1) ** k * b for k, b in enumerate(betti)) == euler_characteristic(cx)
