"""Cech cohomology of the open-star cover with constant Z/p^s coefficients.

The cover has one open set per vertex, the union of the open cells having
that vertex.  For a vertex tuple the intersection is a union of open cells;
sections of the constant sheaf over it are functions on its connected
components, and the relative presheaf puts zero on any intersection meeting the
subcomplex.  Nothing here uses the face lists of the complex beyond building
the cover, so agreement with cellular cohomology is a genuine comparison.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import ComplexError, DeltaComplex, Subcomplex, is_strict_simplicial
from .smith import CohomologyResult, cohomology_from_matrices


@dataclass
class StarCover:
    complex: DeltaComplex
    stars: list  # vertex -> frozenset of (dim, cell)
    nerve: list  # k -> list of increasing vertex tuples with nonempty intersection
    intersections: dict  # tuple -> frozenset of (dim, cell)

    @classmethod
    def of(cls, cx: DeltaComplex) -> "StarCover":
        stars = [set() for _ in range(cx.n_vertices)]
        for n in range(len(cx.cells_per_dim)):
            for c in range(cx.count(n)):
                for v in set(cx.vertices(n, c)):
                    stars[v].add((n, c))
        stars = [frozenset(s) for s in stars]
        inter = {(v,): stars[v] for v in range(cx.n_vertices) if stars[v]}
        nerve = [sorted(inter)]
        while nerve[-1]:
            nxt = []
            for t in nerve[-1]:
                for v in range(t[-1] + 1, cx.n_vertices):
                    common = inter[t] & stars[v]
                    if common:
                        inter[t + (v,)] = common
                        nxt.append(t + (v,))
            nerve.append(nxt)
        nerve.pop()
        return cls(cx, stars, nerve, inter)

    def components(self, t: tuple) -> list[frozenset]:
        """Connected components of the intersection over the tuple t."""
        cells = self.intersections[t]
        cx = self.complex
        parent = {c: c for c in cells}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (n, c) in cells:
            for f in cx.cell_faces(n, c):
                if (n - 1, f) in parent:
                    a, b = find((n, c)), find((n - 1, f))
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        groups: dict = {}
        for x in cells:
            groups.setdefault(find(x), set()).add(x)
        return [frozenset(g) for _, g in sorted(groups.items())]


class CechComplex:
    """Alternating Cech cochains on a StarCover with values in Z/p^s."""

    def __init__(self, cover: StarCover, p: int, s: int, rel: Subcomplex | None = None):
        self.cover = cover
        self.p, self.s = p, s
        self.modulus = p ** s
        self.rel = rel
        zcells = set()
        if rel is not None:
            for n, sel in enumerate(rel.selected):
                zcells |= {(n, c) for c in sel}
        # (tuple, component) pairs carrying a copy of Z/p^s
        self.basis: list = []
        self.comp_of: dict = {}
        for k, tuples in enumerate(cover.nerve):
            rows = []
            for t in tuples:
                if zcells and cover.intersections[t] & zcells:
                    continue
                for ci, comp in enumerate(cover.components(t)):
                    self.comp_of[(t, ci)] = comp
                    rows.append((t, ci))
            self.basis.append(rows)

    @property
    def top(self) -> int:
        return len(self.basis) - 1

    def rank(self, k: int) -> int:
        return len(self.basis[k]) if 0 <= k < len(self.basis) else 0

    def matrix(self, k: int) -> np.ndarray:
        """Cech coboundary C^k -> C^{k+1}: restriction of sections along face tuples."""
        M = np.zeros((self.rank(k + 1), self.rank(k)), dtype=np.int64)
        if k < 0 or k + 1 >= len(self.basis):
            return M
        col = {b: i for i, b in enumerate(self.basis[k])}
        for i, (t, ci) in enumerate(self.basis[k + 1]):
            comp = self.comp_of[(t, ci)]
            for j in range(len(t)):
                face = t[:j] + t[j + 1:]
                # the component of the larger open set containing this component
                for (ft, fc), idx in ((b, col[b]) for b in col if b[0] == face):
                    if comp <= self.comp_of[(ft, fc)]:
                        M[i, idx] += (-1) ** j
        return M % self.modulus


def cech_cohomology(cx: DeltaComplex, p: int, s: int, rel: Subcomplex | None = None) -> list[CohomologyResult]:
    """Cech cohomology of the star cover in every degree up to the dimension."""
    strict = is_strict_simplicial(cx)
    if not strict.ok:
        raise ComplexError("Cech comparison needs a simplicial complex in the strict sense: "
                           f"{strict.message}; subdivide first (barycentric_subdivision)", strict.location)
    cover = StarCover.of(cx)
    C = CechComplex(cover, p, s, rel)
    out = []
    for k in range(cx.dim + 1):
        A = C.matrix(k - 1) if k >= 1 else np.zeros((C.rank(0), 0), dtype=np.int64)
        out.append(cohomology_from_matrices(A, C.matrix(k), k, p, s))
    return out
