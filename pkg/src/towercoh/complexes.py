"""Finite Delta-complexes, subcomplexes and covers built from edge labels.

Cells are dense integers per dimension.  An n-cell stores n+1 references to
(n-1)-cells; entry i is the face opposite vertex i.  Vertex k of a cell and the
edge between two of its vertices are recovered by iterating face maps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence


class ComplexError(ValueError):
    """Malformed complex or subcomplex data."""

    def __init__(self, message: str, location: tuple | None = None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = ""
    location: tuple | None = None  # (dim, cell, ...) of the first failure

    def __bool__(self) -> bool:
        return self.ok


class DeltaComplex:
    """A finite Delta-complex.

    ``faces[n]`` (n >= 1) is a list of tuples of length n+1 referring to cells of
    dimension n-1; ``faces[0]`` is unused and the vertex count is stored in
    ``n_vertices``.  ``names[n]`` optionally names the cells.
    """

    def __init__(self, n_vertices: int, faces: Sequence[Sequence[Sequence[int]]],
                 names: Sequence[Sequence[str]] | None = None, check: bool = True):
        self.n_vertices = int(n_vertices)
        self.faces: tuple = (None,) + tuple(tuple(tuple(int(i) for i in f) for f in block)
                                            for block in faces)
        # trailing empty dimensions carry no information
        while len(self.faces) > 1 and not self.faces[-1]:
            self.faces = self.faces[:-1]
        counts = [self.n_vertices] + [len(b) for b in self.faces[1:]]
        self.cells_per_dim = tuple(counts)
        if names is None:
            names = [[f"{'vetfq'[n] if n < 5 else 'c' + str(n)}{i}" for i in range(c)]
                     for n, c in enumerate(counts)]
        self.names = tuple(tuple(str(x) for x in block) for block in names)
        # free-form extras: named subcomplexes, preset edge labels
        self.meta: dict = {}
        if check:
            rep = validate_complex(self)
            if not rep.ok:
                raise ComplexError(rep.message, rep.location)

    @property
    def dim(self) -> int:
        return len(self.cells_per_dim) - 1 if self.n_vertices else -1

    def count(self, n: int) -> int:
        return self.cells_per_dim[n] if 0 <= n < len(self.cells_per_dim) else 0

    def face(self, n: int, cell: int, i: int) -> int:
        return self.faces[n][cell][i]

    def cell_faces(self, n: int, cell: int) -> tuple:
        return self.faces[n][cell] if n >= 1 else ()

    def vertex(self, n: int, cell: int, k: int) -> int:
        """Index of the k-th vertex of an n-cell."""
        while n > 0:
            if k < n:
                cell = self.faces[n][cell][n]
            else:
                cell = self.faces[n][cell][0]
                k -= 1
            n -= 1
        return cell

    def vertices(self, n: int, cell: int) -> tuple:
        return tuple(self.vertex(n, cell, k) for k in range(n + 1))

    def subface(self, n: int, cell: int, keep: Sequence[int]) -> int:
        """The face of an n-cell spanned by the vertex positions in ``keep``."""
        keep = sorted(keep)
        drop = [i for i in range(n + 1) if i not in keep]
        # removing the largest positions first keeps smaller positions valid
        for i in reversed(drop):
            cell = self.faces[n][cell][i]
            n -= 1
        return cell

    def edge(self, n: int, cell: int, i: int, j: int) -> int:
        """The edge of an n-cell from vertex i to vertex j (i < j)."""
        return self.subface(n, cell, (i, j))

    def edge01(self, n: int, cell: int) -> int:
        for m in range(n, 1, -1):
            cell = self.faces[m][cell][m]
        return cell

    def name(self, n: int, cell: int) -> str:
        return self.names[n][cell]

    def cell_index(self, n: int, name: str) -> int:
        try:
            return self.names[n].index(name)
        except ValueError:
            raise ComplexError(f"no {n}-cell named {name!r}") from None

    def __repr__(self) -> str:
        return f"DeltaComplex(cells={list(self.cells_per_dim)})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, DeltaComplex) and self.n_vertices == other.n_vertices
                and self.faces == other.faces)

    def __hash__(self) -> int:
        return hash((self.n_vertices, self.faces))


def validate_complex(cx: DeltaComplex) -> ValidationReport:
    """Check face references and the face identity d_{j-1} d_i = d_i d_j (i < j)."""
    if cx.n_vertices < 0:
        return ValidationReport(False, "negative vertex count", (0,))
    for n in range(1, len(cx.faces)):
        lower = cx.n_vertices if n == 1 else len(cx.faces[n - 1])
        for c, f in enumerate(cx.faces[n]):
            if len(f) != n + 1:
                return ValidationReport(False, f"{n}-cell {c} has {len(f)} faces, expected {n + 1}", (n, c))
            for i, x in enumerate(f):
                if not 0 <= x < lower:
                    return ValidationReport(
                        False, f"{n}-cell {c}: face {i} refers to missing {n - 1}-cell {x}", (n, c, i))
    for n in range(2, len(cx.faces)):
        prev = cx.faces[n - 1]
        for c, f in enumerate(cx.faces[n]):
            for i, j in combinations(range(n + 1), 2):
                a = prev[f[i]][j - 1]
                b = prev[f[j]][i]
                if a != b:
                    return ValidationReport(
                        False, f"{n}-cell {c}: face identity fails for (i={i}, j={j}): "
                               f"d{j - 1}d{i} = {a} but d{i}d{j} = {b}", (n, c, i, j))
    return ValidationReport(True, "valid")


def euler_characteristic(cx: DeltaComplex) -> int:
    return sum((-1) ** n * c for n, c in enumerate(cx.cells_per_dim))


class Subcomplex:
    """A face-closed selection of cells, stored per dimension."""

    def __init__(self, complex: DeltaComplex, selected: Sequence[Iterable[int]], check: bool = True):
        self.complex = complex
        sel = [frozenset(int(i) for i in s) for s in selected]
        sel += [frozenset()] * (len(complex.cells_per_dim) - len(sel))
        self.selected = tuple(sel)
        if check:
            for n, s in enumerate(self.selected):
                for c in s:
                    if not 0 <= c < complex.count(n):
                        raise ComplexError(f"subcomplex refers to missing {n}-cell {c}", (n, c))
                    for i, f in enumerate(complex.cell_faces(n, c)):
                        if f not in self.selected[n - 1]:
                            raise ComplexError(
                                f"subcomplex not closed: face {i} ({n - 1}-cell {f}) of {n}-cell {c} missing",
                                (n, c, i))

    @classmethod
    def closure(cls, complex: DeltaComplex, cells: Sequence[Iterable[int]]) -> "Subcomplex":
        sel = [set(s) for s in cells] + [set() for _ in range(len(complex.cells_per_dim) - len(cells))]
        for n in range(len(sel) - 1, 0, -1):
            for c in sel[n]:
                sel[n - 1].update(complex.cell_faces(n, c))
        return cls(complex, sel)

    @classmethod
    def empty(cls, complex: DeltaComplex) -> "Subcomplex":
        return cls(complex, [])

    @classmethod
    def full(cls, complex: DeltaComplex) -> "Subcomplex":
        return cls(complex, [range(c) for c in complex.cells_per_dim])

    def contains(self, n: int, cell: int) -> bool:
        return n < len(self.selected) and cell in self.selected[n]

    def outside(self, n: int) -> list[int]:
        """Cells of dimension n not in the subcomplex, in index order."""
        s = self.selected[n] if n < len(self.selected) else frozenset()
        return [c for c in range(self.complex.count(n)) if c not in s]

    def inside(self, n: int) -> list[int]:
        return sorted(self.selected[n]) if n < len(self.selected) else []

    def as_complex(self) -> tuple[DeltaComplex, list[dict]]:
        """The subcomplex as a DeltaComplex plus per-dimension old->new index maps."""
        cx = self.complex
        maps = [{c: k for k, c in enumerate(self.inside(n))} for n in range(len(cx.cells_per_dim))]
        faces = [[tuple(maps[n - 1][f] for f in cx.cell_faces(n, c)) for c in self.inside(n)]
                 for n in range(1, len(cx.cells_per_dim))]
        names = [[cx.name(n, c) for c in self.inside(n)] for n in range(len(cx.cells_per_dim))]
        return DeltaComplex(len(maps[0]), faces, names), maps

    def is_empty(self) -> bool:
        return not any(self.selected)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subcomplex) and self.selected == other.selected


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[max(a, b)] = min(a, b)


def connected_components(cx: DeltaComplex) -> list[int]:
    """Component label (smallest vertex index) of every vertex."""
    uf = _UnionFind(cx.n_vertices)
    for f in cx.faces[1] if len(cx.faces) > 1 else ():
        uf.union(f[0], f[1])
    return [uf.find(v) for v in range(cx.n_vertices)]


def n_components(cx: DeltaComplex) -> int:
    return len(set(connected_components(cx)))


def is_strict_simplicial(cx: DeltaComplex) -> ValidationReport:
    """Every cell has distinct vertices and no two cells share a vertex set."""
    for n in range(1, len(cx.cells_per_dim)):
        seen = {}
        for c in range(cx.count(n)):
            vs = cx.vertices(n, c)
            if len(set(vs)) != len(vs):
                return ValidationReport(False, f"{n}-cell {cx.name(n, c)} has repeated vertices {vs}", (n, c))
            key = frozenset(vs)
            if key in seen:
                return ValidationReport(
                    False, f"{n}-cells {cx.name(n, seen[key])} and {cx.name(n, c)} share vertices {sorted(key)}",
                    (n, c))
            seen[key] = c
    return ValidationReport(True, "strict simplicial")


@dataclass
class CoverComplex:
    """A finite cover of a base complex; cell (sigma, x) has index sigma * |L| + idx(x)."""

    base: DeltaComplex
    level: int
    order: int
    complex: DeltaComplex
    deck: list = field(default_factory=list)  # per dimension: list of index permutations

    def cell(self, n: int, sigma: int, x_index: int) -> int:
        return sigma * self.order + x_index

    def split(self, cell: int) -> tuple[int, int]:
        return divmod(cell, self.order)

    def projection(self, n: int, cell: int) -> int:
        return cell // self.order


def build_cover(cx: DeltaComplex, edge_perm: Callable[[int], Sequence[int]], order: int,
                level: int = 0) -> CoverComplex:
    """Cover whose face 0 of (sigma, x) is (d0 sigma, g^-1 x) with g the label of e01(sigma).

    ``edge_perm(e)`` returns the left translation index array of the label on
    edge ``e`` (entry i is the index of g^-1 x_i).  Local systems supplies it
    from a descriptor, see :func:`towercoh.local_systems.cover_of`.
    """
    perms = {}

    def perm(e):
        if e not in perms:
            perms[e] = list(edge_perm(e))
        return perms[e]

    faces = []
    for n in range(1, len(cx.cells_per_dim)):
        block = []
        for sigma in range(cx.count(n)):
            f = cx.cell_faces(n, sigma)
            pe = perm(cx.edge01(n, sigma))
            for xi in range(order):
                row = [f[0] * order + pe[xi]] + [f[i] * order + xi for i in range(1, n + 1)]
                block.append(tuple(row))
        faces.append(block)
    names = [[f"{cx.name(n, c)}.{x}" for c in range(cx.count(n)) for x in range(order)]
             for n in range(len(cx.cells_per_dim))]
    cover = DeltaComplex(cx.n_vertices * order, faces, names)
    return CoverComplex(cx, level, order, cover)


def complex_from_simplices(n_vertices: int, simplices: Iterable[Sequence[int]]) -> DeltaComplex:
    """Strict simplicial complex generated by vertex tuples (all faces added)."""
    tops = [tuple(sorted(s)) for s in simplices]
    dim = max((len(s) - 1 for s in tops), default=0)
    by_dim: list[set] = [set() for _ in range(dim + 1)]
    for s in tops:
        for k in range(1, len(s) + 1):
            by_dim[k - 1].update(combinations(s, k))
    return simplicial_complex(n_vertices, [sorted(b) for b in by_dim[1:]])


def simplicial_complex(n_vertices: int, simplices_by_dim: Sequence[Sequence[Sequence[int]]],
                       vertex_names: Sequence[str] | None = None) -> DeltaComplex:
    """Delta-complex of an ordered simplicial complex given by sorted vertex tuples per dimension >= 1."""
    index = [{(v,): v for v in range(n_vertices)}]
    faces = []
    for n, block in enumerate(simplices_by_dim, start=1):
        idx = {}
        rows = []
        for c, s in enumerate(block):
            s = tuple(s)
            if list(s) != sorted(set(s)) or len(s) != n + 1:
                raise ComplexError(f"simplex {s} is not an increasing {n + 1}-tuple", (n, c))
            try:
                rows.append(tuple(index[n - 1][s[:i] + s[i + 1:]] for i in range(n + 1)))
            except KeyError as exc:
                raise ComplexError(f"simplex {s} has a face {exc.args[0]} not listed", (n, c)) from None
            idx[s] = c
        index.append(idx)
        faces.append(rows)
    vnames = list(vertex_names) if vertex_names else [f"v{i}" for i in range(n_vertices)]
    names = [vnames] + [["".join(vnames[v] for v in s) if vertex_names else "s" + "_".join(map(str, s))
                         for s in block] for block in simplices_by_dim]
    return DeltaComplex(n_vertices, faces, names)


def barycentric_subdivision(cx: DeltaComplex, rel: Subcomplex | None = None
                            ) -> tuple[DeltaComplex, Subcomplex | None]:
    """First barycentric subdivision of a Delta-complex.

    A k-simplex of the subdivision is a cell tau together with a strictly
    increasing chain of vertex-position sets ending with all of tau's positions;
    its i-th vertex is the barycentre of the i-th set.  A chain ending in a
    proper face is identified with the chain in that face cell.  The image of
    ``rel`` is the subcomplex of simplices lying in cells of ``rel``.
    """
    D = len(cx.cells_per_dim) - 1

    def normalize(n, tau, chain):
        top = chain[-1]
        if len(top) == n + 1:
            return n, tau, chain
        face = cx.subface(n, tau, top)
        pos = {v: k for k, v in enumerate(sorted(top))}
        new = tuple(frozenset(pos[v] for v in s) for s in chain)
        return len(top) - 1, face, new

    def chains(n, k):
        full = frozenset(range(n + 1))
        # chains F_0 < ... < F_k = full, enumerated deterministically
        out = []

        def rec(prefix):
            if len(prefix) == k:
                out.append(tuple(prefix) + (full,))
                return
            last = prefix[-1] if prefix else frozenset()
            rest = sorted(full - last)
            for m in range(1, len(rest) + 1):
                for add in combinations(rest, m):
                    s = last | frozenset(add)
                    if s != full and len(s) + (k - len(prefix) - 1) <= n:
                        rec(prefix + [s])
        rec([])
        return out

    # vertices = barycentres of all cells
    keys: list[dict] = []
    vertex_names = []
    k0 = {}
    for n in range(D + 1):
        for tau in range(cx.count(n)):
            k0[(n, tau, (frozenset(range(n + 1)),))] = len(k0)
            vertex_names.append("b" + cx.name(n, tau))
    keys.append(k0)
    faces = []
    names = [vertex_names]
    for k in range(1, D + 1):
        kk = {}
        rows, nm = [], []
        for n in range(k, D + 1):
            for tau in range(cx.count(n)):
                for ch in chains(n, k):
                    row = []
                    for i in range(k + 1):
                        sub = ch[:i] + ch[i + 1:]
                        row.append(keys[k - 1][normalize(n, tau, sub)])
                    kk[(n, tau, ch)] = len(kk)
                    rows.append(tuple(row))
                    nm.append(cx.name(n, tau) + "[" + "<".join("".join(map(str, sorted(s))) for s in ch) + "]")
        keys.append(kk)
        faces.append(rows)
        names.append(nm)
    sd = DeltaComplex(len(k0), faces, names)
    sub = None
    if rel is not None:
        sel = [[i for key, i in keys[k].items() if rel.contains(key[0], key[1])] for k in range(D + 1)]
        sub = Subcomplex(sd, sel)
    return sd, sub
