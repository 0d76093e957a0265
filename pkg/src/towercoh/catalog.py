"""Small built-in Delta-complexes.

Each builder returns a validated DeltaComplex.  Named subcomplexes live in
``complex.meta["subcomplexes"]`` (cell indices per dimension) and preset edge
labels in ``complex.meta["labels"]`` (edge name -> integer vector).
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Sequence

from .complexes import ComplexError, DeltaComplex, complex_from_simplices


def circle() -> DeltaComplex:
    cx = DeltaComplex(1, [[(0, 0)]], [["v"], ["e"]])
    cx.meta["labels"] = {"dense": {"e": (1,)}, "trivial": {"e": (0,)}}
    return cx


def torus() -> DeltaComplex:
    """Square torus: corners 00 < 10 < 11 and 00 < 01 < 11, diagonal c = 00 -> 11.

    a = 00 -> 10, b = 00 -> 01; boundaries T1 = (b, c, a), T2 = (a, c, b).
    """
    cx = DeltaComplex(1, [[(0, 0)] * 3, [(1, 2, 0), (0, 2, 1)]],
                      [["v"], ["a", "b", "c"], ["T1", "T2"]])
    cx.meta["labels"] = {
        "full": {"a": (1, 0), "b": (0, 1), "c": (1, 1)},
        "half": {"a": (1, 0), "b": (0, 0), "c": (1, 0)},
    }
    return cx


def klein_bottle() -> DeltaComplex:
    """Square with the top edge glued to the bottom reversed; T2 = (a, b, c)."""
    return DeltaComplex(1, [[(0, 0)] * 3, [(1, 2, 0), (0, 1, 2)]],
                        [["v"], ["a", "b", "c"], ["T1", "T2"]])


def cylinder() -> DeltaComplex:
    """Annulus S^1 x [0, 1]: loops a (bottom, at v0) and b (top, at v1), rung e, diagonal d."""
    cx = DeltaComplex(2, [[(0, 0), (1, 1), (1, 0), (1, 0)], [(2, 3, 0), (1, 3, 2)]],
                      [["v0", "v1"], ["a", "b", "e", "d"], ["T1", "T2"]])
    cx.meta["subcomplexes"] = {"boundary": [[0, 1], [0, 1]], "bottom": [[0], [0]]}
    cx.meta["labels"] = {"dense": {"a": (1,), "b": (1,), "e": (0,), "d": (1,)}}
    return cx


def sphere() -> DeltaComplex:
    """Two triangles glued along their boundary."""
    return DeltaComplex(3, [[(1, 0), (2, 1), (2, 0)], [(1, 2, 0), (1, 2, 0)]],
                        [["v0", "v1", "v2"], ["e01", "e12", "e02"], ["U", "L"]])


def wedge_of_circles(k: int = 2) -> DeltaComplex:
    return DeltaComplex(1, [[(0, 0)] * k], [["v"], [f"e{i}" for i in range(k)]])


def interval() -> DeltaComplex:
    return DeltaComplex(2, [[(1, 0)]], [["v0", "v1"], ["e"]])


def hollow_triangle() -> DeltaComplex:
    return complex_from_simplices(3, [(0, 1), (1, 2), (0, 2)])


def solid_triangle() -> DeltaComplex:
    return complex_from_simplices(3, [(0, 1, 2)])


def tetrahedron_boundary() -> DeltaComplex:
    return complex_from_simplices(4, list(combinations(range(4), 3)))


def solid_tetrahedron() -> DeltaComplex:
    return complex_from_simplices(4, [(0, 1, 2, 3)])


def octahedron_boundary() -> DeltaComplex:
    # antipodal pairs (0, 5), (1, 3), (2, 4)
    tris = [(0, a, b) for a, b in [(1, 2), (2, 3), (3, 4), (1, 4)]]
    tris += [(5, a, b) for a, b in [(1, 2), (2, 3), (3, 4), (1, 4)]]
    return complex_from_simplices(6, tris)


def triangulated_annulus() -> DeltaComplex:
    """Strict annulus: inner triangle 0,1,2 and outer triangle 3,4,5."""
    tris = [(0, 1, 3), (1, 3, 4), (1, 2, 4), (2, 4, 5), (0, 2, 5), (0, 3, 5)]
    cx = complex_from_simplices(6, tris)
    inner = [[0, 1, 2], [_edge(cx, 0, 1), _edge(cx, 1, 2), _edge(cx, 0, 2)]]
    cx.meta["subcomplexes"] = {"inner": inner}
    return cx


def mobius_strip() -> DeltaComplex:
    """Five-vertex Moebius band."""
    tris = [(0, 1, 2), (1, 2, 3), (2, 3, 4), (0, 3, 4), (0, 1, 4)]
    return complex_from_simplices(5, tris)


def _edge(cx: DeltaComplex, u: int, v: int) -> int:
    for c in range(cx.count(1)):
        if set(cx.vertices(1, c)) == {u, v}:
            return c
    raise ComplexError(f"no edge between {u} and {v}")


# -- quotients of R^3 by lattices acting on the unit cube -------------------

# pulling triangulation of [0,1]^3 from the corner 100: cone over a triangulation
# of the three faces x=0, y=1, z=1 whose diagonals are chosen so that the
# Heisenberg gluings (a shear along x, translations along y and z) are face-to-face
_CUBE_TRIANGLES = [("000", "001", "010"), ("001", "010", "011"),
                   ("110", "011", "010"), ("110", "011", "111"),
                   ("101", "011", "001"), ("101", "011", "111")]


def _corner(s: str) -> tuple:
    return tuple(int(ch) for ch in s)


CUBE_TETRAHEDRA = [tuple(_corner(v) for v in ("100",) + t) for t in _CUBE_TRIANGLES]


def _kuhn_tetrahedra() -> list:
    """Staircase triangulation along the main diagonal; every face diagonal is increasing."""
    out = []
    for perm in permutations(range(3)):
        p, chain = [0, 0, 0], [(0, 0, 0)]
        for axis in perm:
            p[axis] = 1
            chain.append(tuple(p))
        out.append(tuple(chain))
    return out


def _heis_act(g, p):
    a, b, c = g
    x, y, z = p
    return (a + x, b + y, c + z + a * y)


def _heis_canon(p):
    x, y, z = p
    a = -math.floor(x)
    b = -math.floor(y)
    return (a, b, -math.floor(z + a * y))


def _heis_mul(g, h):
    return _heis_act(g, h)


def _heis_inv(g):
    a, b, c = g
    return (-a, -b, -c + a * b)


def _trans_act(g, p):
    return tuple(a + x for a, x in zip(g, p))


def _trans_canon(p):
    return tuple(-math.floor(x) for x in p)


def _trans_inv(g):
    return tuple(-a for a in g)


def lattice_quotient(tetrahedra: Sequence[Sequence[tuple]], act: Callable, canon: Callable,
                     mul: Callable, inv: Callable, key: Callable) -> tuple[DeltaComplex, dict]:
    """Delta-complex of R^3 / Gamma from a Gamma-invariant triangulation.

    ``tetrahedra`` triangulate a fundamental domain, ``act(g, p)`` is the
    action, ``canon(p)`` returns g moving p into [0,1)^3, and the vertex order
    of a simplex is the order of ``key`` on its canonical position (the
    position whose barycentre lies in [0,1)^3).  Lattice points must be the
    orbit of the origin with ``act(g, 0) = g``.  Returns the complex and the
    integer label ``g_P^-1 g_Q`` of every edge P -> Q.
    """
    cells: list[dict] = [{} for _ in range(4)]
    faces: list[dict] = [{} for _ in range(4)]

    def bary(pts):
        return tuple(sum(Fraction(q[i]) for q in pts) / len(pts) for i in range(3))

    def register(pts):
        g = canon(bary(pts))
        q = [act(g, p) for p in pts]
        if sorted(q, key=key) != q:
            raise ComplexError(f"vertex order of simplex {pts} is not preserved by the gluing")
        k = len(q) - 1
        name = tuple(q)
        if name not in cells[k]:
            cells[k][name] = len(cells[k])
            if k > 0:
                faces[k][name] = tuple(register(q[:i] + q[i + 1:]) for i in range(k + 1))
        return cells[k][name]

    for t in tetrahedra:
        g = canon(bary(t))
        register(sorted((act(g, p) for p in t), key=key))
    order = [sorted(c, key=c.get) for c in cells]
    face_lists = [[faces[k][s] for s in order[k]] for k in range(1, 4)]
    labels = {}
    for i, (P, Q) in enumerate(order[1]):
        labels[i] = mul(inv(P), Q)
    names = [[f"v{i}" for i in range(len(order[0]))],
             [f"e{i}" for i in range(len(order[1]))],
             [f"t{i}" for i in range(len(order[2]))],
             [f"T{i}" for i in range(len(order[3]))]]
    cx = DeltaComplex(len(order[0]), face_lists, names)
    return cx, labels


def heisenberg_nilmanifold() -> DeltaComplex:
    """Integer Heisenberg group acting on R^3 by (a,b,c).(x,y,z) = (a+x, b+y, c+z+ay).

    One vertex, seven edges, twelve triangles, six tetrahedra.  The preset
    ``standard`` labels each edge P -> Q by the group element P^-1 Q.
    """
    cx, labels = lattice_quotient(CUBE_TETRAHEDRA, _heis_act, _heis_canon, _heis_mul, _heis_inv,
                                  key=lambda p: 4 * p[0] + 2 * p[1] + p[2])
    cx.meta["labels"] = {"standard": {cx.name(1, e): g for e, g in labels.items()}}
    return cx


def torus3() -> DeltaComplex:
    """Three-torus from the staircase triangulation of the cube."""
    cx, labels = lattice_quotient(_kuhn_tetrahedra(), _trans_act, _trans_canon, _trans_act, _trans_inv,
                                  key=lambda p: (sum(p), p))
    cx.meta["labels"] = {"full": {cx.name(1, e): g for e, g in labels.items()}}
    return cx


BUILTIN_COMPLEXES: dict[str, Callable[[], DeltaComplex]] = {
    "circle": circle,
    "torus": torus,
    "klein_bottle": klein_bottle,
    "cylinder": cylinder,
    "sphere": sphere,
    "wedge2": wedge_of_circles,
    "interval": interval,
    "hollow_triangle": hollow_triangle,
    "solid_triangle": solid_triangle,
    "tetrahedron_boundary": tetrahedron_boundary,
    "solid_tetrahedron": solid_tetrahedron,
    "octahedron_boundary": octahedron_boundary,
    "annulus": triangulated_annulus,
    "mobius_strip": mobius_strip,
    "torus3": torus3,
    "heisenberg_nilmanifold": heisenberg_nilmanifold,
}


def build_builtin(name: str) -> DeltaComplex:
    try:
        return BUILTIN_COMPLEXES[name]()
    except KeyError:
        known = ", ".join(sorted(BUILTIN_COMPLEXES))
        raise ComplexError(f"unknown built-in complex {name!r} (known: {known})") from None
