import numpy as np
import pytest

from oracle import brute_complex_types
from towercoh.catalog import build_builtin
from towercoh.complexes import Subcomplex
from towercoh.groups import (TowerError, closure_of, make_abelian_tower, make_custom_tower,
                             make_heisenberg_tower, quotient_element, quotient_tower, trivial_subtower)
from towercoh.limits import (StabilizationError, algebraic_defect, assemble_colimit, colimit,
                             completed_cohomology, defect_estimate, excise_reduce, fundamental_cycle,
                             les_check, level_cohomology, nilpotent_collapse_check, top_degree_transfer,
                             transition_map)
from towercoh.local_systems import make_descriptor, trivial_descriptor, twisted_complex
from towercoh.smith import InducedMap, cohomology


def circle_desc(p=2, R=5, label=1):
    c = build_builtin("circle")
    return make_descriptor(c, make_abelian_tower(1, p, R), {"e": [label]})


def torus_desc(preset, R=2):
    t = build_builtin("torus")
    return make_descriptor(t, make_abelian_tower(2, 2, R), t.meta["labels"][preset])


def defect_torus(R=4):
    t = build_builtin("torus")
    return make_descriptor(t, make_abelian_tower(1, 2, R), {"a": [1], "b": [3], "c": [4]})


# -- colimits ---------------------------------------------------------------------

@pytest.mark.parametrize("s", [1, 2, 3])
def test_circle_degree1_transitions(s):
    d = circle_desc()
    c = colimit(d, None, 1, s, R=s + 2, check_maps=True)
    assert all(h.exponents == [s] for h in c.levels[1:])
    for f in c.maps[1:]:
        assert f.is_multiplication_by(2)
    assert c.certified and c.value == []


def test_circle_degree0_certified_at_zero():
    c = colimit(circle_desc(), None, 0, 2, R=3)
    assert c.certified and c.r0 == 0 and c.value == [2]
    assert c.iso_tail


def test_torus_full_degree1_s1_stabilizes_to_zero():
    c = colimit(torus_desc("full", R=3), None, 1, 1, R=3)
    assert c.certified and c.value == []


def test_not_stabilized_when_R_too_small():
    c = colimit(circle_desc(), None, 1, 2, R=2)
    assert not c.certified and c.value is None and c.flag == "not-stabilized"


def test_strict_mode_raises_on_disagreement():
    # images of sizes 0, 0, 1, 1 in H_R: r0 = 0 and r = 2 both certify with different types
    d = circle_desc()
    levels = [cohomology(twisted_complex(d, None, r, 1), 0) for r in range(2)]
    H = levels[1]
    zero = InducedMap(H, H, np.zeros((1, 1), dtype=np.int64))
    ident = InducedMap(H, H, np.eye(1, dtype=np.int64))
    chain = [H] * 5
    maps = [ident, zero, ident, ident]
    loose = assemble_colimit(chain, maps, strict=False)
    assert loose.certifying == [0, 2] and loose.value == []
    with pytest.raises(StabilizationError) as err:
        assemble_colimit(chain, maps, strict=True)
    assert err.value.dump["image_types"][2] == [1]


def test_transition_maps_checked():
    d = torus_desc("full")
    H0 = cohomology(twisted_complex(d, None, 0, 1), 1)
    H1 = cohomology(twisted_complex(d, None, 1, 1), 1)
    f = transition_map(d, None, H0, H1, 0, 1, 1, check=True)
    assert f.matrix.shape == (2, 2)


def test_level_grid_parallel_matches_serial():
    d = torus_desc("full")
    a = level_cohomology(d, None, [0, 1, 2], 2, 2, jobs=1)
    b = level_cohomology(d, None, [0, 1, 2], 2, 2, jobs=2)
    assert list(a) == list(b)
    for key in a:
        for n in a[key]:
            assert a[key][n].exponents == b[key][n].exponents
            assert (a[key][n].generators == b[key][n].generators).all()


# -- completed cohomology -------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3])
def test_circle_dense(p):
    rep = completed_cohomology(circle_desc(p), None, [0, 1], 3, 5)
    assert rep.degrees[0].reconstruction(p) == f"Z_{p}" and rep.degrees[0].certified
    assert rep.degrees[1].reconstruction(p) == "0" and rep.degrees[1].certified


def test_defect_torus_values():
    rep = completed_cohomology(defect_torus(), None, [0, 1, 2], 2, 4)
    assert [rep.degrees[n].reconstruction(2) for n in range(3)] == ["Z_2", "Z_2", "0"]
    assert all(rep.degrees[n].certified for n in range(3))
    assert rep.degrees[1].matches_levels and rep.degrees[1].matches_reductions


def test_trivial_tower_gives_ordinary_cohomology():
    k = build_builtin("klein_bottle")
    d = trivial_descriptor(k, make_abelian_tower(0, 2, 3))
    rep = completed_cohomology(d, None, [0, 1, 2], 3, 3)
    # H^*(K; Z_2) = Z_2, Z_2, Z/2
    assert rep.degrees[0].reconstruction(2) == "Z_2"
    assert rep.degrees[1].free_rank == 1
    assert rep.degrees[2].free_rank == 0 and rep.degrees[2].torsion == [1]
    assert rep.degrees[1].torsion == []


def test_trivial_tower_torus():
    t = build_builtin("torus")
    rep = completed_cohomology(trivial_descriptor(t, make_abelian_tower(0, 3, 2)), None, [0, 1, 2], 2, 2)
    assert [rep.degrees[n].qp_rank for n in range(3)] == [1, 2, 1]


def test_heisenberg_completed():
    cx = build_builtin("heisenberg_nilmanifold")
    d = make_descriptor(cx, make_heisenberg_tower(2, 2), cx.meta["labels"]["standard"])
    rep = completed_cohomology(d, None, [0, 1, 2, 3], 1, 2)
    assert rep.degrees[0].reconstruction(2) == "Z_2" and rep.degrees[0].precision_limited
    for n in (1, 2, 3):
        assert rep.degrees[n].is_zero() and rep.degrees[n].certified


def test_custom_tower_note():
    tables = [[[0]], [[0, 1], [1, 0]], [[(i + j) % 4 for j in range(4)] for i in range(4)]]
    T = make_custom_tower(2, tables, [[0, 0], [0, 1, 0, 1]])
    d = make_descriptor(build_builtin("circle"), T, {"e": 1})
    rep = completed_cohomology(d, None, [0, 1], 1, 2)
    assert rep.notes and "custom" in rep.notes[0]


def test_depth_guard():
    with pytest.raises(TowerError):
        completed_cohomology(circle_desc(R=2), None, [0], 1, 3)


# -- long exact sequence ----------------------------------------------------------------

def cylinder_desc(R=4):
    cyl = build_builtin("cylinder")
    Z = Subcomplex(cyl, cyl.meta["subcomplexes"]["boundary"])
    return make_descriptor(cyl, make_abelian_tower(1, 2, R), cyl.meta["labels"]["dense"]), Z


def test_cylinder_les_and_compact_supports():
    d, Z = cylinder_desc()
    rep = les_check(d, Z, [0, 1, 2], 2, 4)
    assert rep.exact
    assert [rep.relative.degrees[n].reconstruction(2) for n in range(3)] == ["0", "Z_2", "0"]
    assert [rep.absolute.degrees[n].reconstruction(2) for n in range(3)] == ["Z_2", "0", "0"]
    assert rep.boundary.degrees[0].reconstruction(2) == "Z_2^2"


def test_les_whole_and_empty_subcomplex():
    d, _ = cylinder_desc(R=2)
    cyl = d.complex
    full = Subcomplex.full(cyl)
    rep = les_check(d, full, [0, 1, 2], 1, 2)
    assert rep.exact
    assert all(rep.relative.degrees[n].is_zero() for n in range(3))
    empty = Subcomplex.empty(cyl)
    rep = les_check(d, empty, [0, 1, 2], 1, 2)
    assert rep.exact
    for n in range(3):
        assert rep.relative.degrees[n].reconstruction(2) == rep.absolute.degrees[n].reconstruction(2)


def test_relative_level_groups_by_enumeration():
    d, Z = cylinder_desc(R=1)
    tw = twisted_complex(d, Z, 1, 1)
    assert brute_complex_types(tw, 1) == [cohomology(tw, n).exponents for n in range(3)]


# -- excision, collapse, defect, transfer -----------------------------------------------

def test_excise_half_torus():
    d = torus_desc("half")
    rep = excise_reduce(d, [(n, r, 1) for n in range(3) for r in (1, 2)])
    assert rep.ok
    row = [c for c in rep.checks if c["n"] == 0 and c["r"] == 1][0]
    # oracle values: full H^0 = (Z/2)^2, reduced H^0 = Z/2, index 2
    assert row["full"] == [1, 1] and row["reduced"] == [1] and row["index"] == 2
    assert [len(h) for h in rep.subtower.subgroups] == [1, 2, 4]


def test_excise_dense_is_identity():
    d = torus_desc("full")
    rep = excise_reduce(d, [(1, 1, 1)])
    assert rep.subtower.is_full() and rep.ok and rep.checks[0]["index"] == 1


def test_excise_trivial_labels():
    t = build_builtin("torus")
    d = trivial_descriptor(t, make_abelian_tower(2, 2, 1))
    rep = excise_reduce(d, [(n, 1, 1) for n in range(3)])
    assert rep.ok and rep.checks[1]["full"] == [1] * 8 and rep.checks[1]["reduced"] == [1, 1]


def test_heisenberg_collapses_to_torus():
    cx = build_builtin("heisenberg_nilmanifold")
    T = make_heisenberg_tower(2, 2)
    d = make_descriptor(cx, T, cx.meta["labels"]["standard"])
    Z = closure_of([T.element((0, 0, 1))], T)
    Q = quotient_tower(T, Z)
    t = build_builtin("torus")
    labels = {k: quotient_element(Q, T.element(v)) for k, v in
              {"a": (1, 0, 0), "b": (0, 1, 0), "c": (1, 1, 0)}.items()}
    qd = make_descriptor(t, Q, labels)
    verdict = nilpotent_collapse_check(d, Z, qd, [0, 1, 2, 3], 1, 2)
    assert verdict.equal
    assert verdict.base.degrees[0].reconstruction(2) == "Z_2"


def test_collapse_with_trivial_normal_compares_with_itself():
    d = torus_desc("full")
    N = trivial_subtower(d.tower)
    Q = quotient_tower(d.tower, N)
    qd = make_descriptor(d.complex, Q, {e: quotient_element(Q, lab) for e, lab in enumerate(d.labels)})
    v = nilpotent_collapse_check(d, N, qd, [0, 1, 2], 1, 2)
    assert v.equal


def test_torus_mod_first_factor_is_circle():
    d = torus_desc("full", R=3)
    N = closure_of([d.tower.element([1, 0])], d.tower)
    Q = quotient_tower(d.tower, N)
    c = build_builtin("circle")
    qd = make_descriptor(c, Q, {"e": quotient_element(Q, d.tower.element([0, 1]))})
    v = nilpotent_collapse_check(d, N, qd, [0, 1], 2, 3)
    assert v.equal
    assert all(row["compared"] for row in v.comparisons)


def test_defects():
    full = defect_estimate(torus_desc("full"), 2, 2)
    assert full.defect == 0 and full.algebraic_rank == 0
    one = defect_estimate(defect_torus(), 2, 4)
    assert one.defect == 1 and one.algebraic_rank == 1 and one.consistent
    zero_label = defect_estimate(circle_desc(label=0, R=3), 2, 3)
    assert zero_label.defect == 1 and zero_label.consistent
    assert algebraic_defect(circle_desc(label=2, R=3), 3) == 0


def test_defect_non_abelian_skips_algebraic_check():
    cx = build_builtin("heisenberg_nilmanifold")
    d = make_descriptor(cx, make_heisenberg_tower(2, 2), cx.meta["labels"]["standard"])
    rep = defect_estimate(d, 1, 2)
    assert rep.algebraic_rank is None and rep.consistent is None and rep.defect == 0


def test_fundamental_cycles():
    assert abs(fundamental_cycle(build_builtin("circle"))).tolist() == [1]
    z = fundamental_cycle(build_builtin("torus"))
    assert sorted(abs(z).tolist()) == [1, 1]
    with pytest.raises(ValueError):
        fundamental_cycle(build_builtin("klein_bottle"))


@pytest.mark.parametrize("make,s,R", [
    (lambda: circle_desc(), 2, 4), (lambda: defect_torus(), 2, 3), (lambda: torus_desc("full", 2), 3, 2)])
def test_top_degree_transfer(make, s, R):
    rep = top_degree_transfer(make(), s, R)
    assert rep.ok
    assert [st["index"] for st in rep.steps] == [make().tower.order(r + 1) // make().tower.order(r)
                                                 for r in range(R)]


def test_top_degree_transfer_relative():
    d, Z = cylinder_desc(R=3)
    assert top_degree_transfer(d, 2, 3, rel=Z).ok


def test_heisenberg_transfer_index_eight():
    cx = build_builtin("heisenberg_nilmanifold")
    d = make_descriptor(cx, make_heisenberg_tower(2, 2), cx.meta["labels"]["standard"])
    rep = top_degree_transfer(d, 2, 2)
    assert rep.ok and rep.steps[1]["index"] == 8 and rep.steps[1]["normalized"] == 0
