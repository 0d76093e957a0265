"""Flat descriptors, coinduced coefficients and twisted cochain complexes.

A descriptor labels every edge with a tower element; at level r this gives a
local system with fibre Maps(L_r, Z/p^s), on which an edge label g acts by
(g.m)(x) = m(g^-1 x).  Cochains of degree n are stored cell-major: the block of
an n-cell sigma holds the |L_r| values of m_sigma in element order.

The coboundary is

    (dm)_sigma = g(e01 sigma) . m_{d0 sigma} + sum_{i >= 1} (-1)^i m_{di sigma},

which is exactly the constant-coefficient coboundary of the cover built by
:func:`towercoh.complexes.build_cover`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .complexes import (ComplexError, CoverComplex, DeltaComplex, Subcomplex, ValidationReport,
                        build_cover, connected_components)
from .groups import GroupTower, SubTower, TowerElement, TowerError, closure_of


class DescriptorError(ValueError):
    """Edge labels that do not define a flat bundle on the complex."""

    def __init__(self, message: str, location: tuple | None = None):
        super().__init__(message)
        self.location = location


class ChainMapError(ValueError):
    """A claimed cochain map does not commute with the coboundaries."""

    def __init__(self, message: str, degree: int | None = None, entry: tuple | None = None):
        super().__init__(message)
        self.degree = degree
        self.entry = entry


@dataclass
class FlatDescriptor:
    complex: DeltaComplex
    tower: GroupTower
    labels: tuple  # TowerElement per edge, in edge order

    def label(self, edge: int) -> TowerElement:
        return self.labels[edge]

    def level_label(self, edge: int, r: int):
        return self.labels[edge].images[r]

    def edge_perm(self, r: int, edge: int) -> np.ndarray:
        return self.tower.level(r).left_translation(self.labels[edge].images[r])

    def closure(self) -> SubTower:
        return closure_of(list(self.labels), self.tower)

    def is_dense(self, r: int | None = None) -> bool:
        sub = self.closure()
        levels = range(self.tower.depth + 1) if r is None else [r]
        return all(len(sub.subgroup(t)) == self.tower.order(t) for t in levels)

    def with_tower(self, tower: GroupTower, labels: Sequence[TowerElement] | None = None) -> "FlatDescriptor":
        return FlatDescriptor(self.complex, tower, tuple(labels if labels is not None else self.labels))


def make_descriptor(complex: DeltaComplex, tower: GroupTower, labels: Mapping | Sequence | None = None,
                    check: bool = True) -> FlatDescriptor:
    """Descriptor from edge data keyed by edge name or index; unlisted edges get the identity."""
    n_edges = complex.count(1)
    out = [tower.identity() for _ in range(n_edges)]
    if labels is None:
        labels = {}
    if not isinstance(labels, Mapping):
        labels = dict(enumerate(labels))
    for key, data in labels.items():
        if isinstance(key, str):
            try:
                e = complex.cell_index(1, key)
            except ComplexError:
                raise DescriptorError(f"label given for missing edge {key!r}", (1, key)) from None
        else:
            e = int(key)
            if not 0 <= e < n_edges:
                raise DescriptorError(f"label given for missing edge {e}", (1, e))
        try:
            out[e] = data if isinstance(data, TowerElement) else tower.element(data)
        except TowerError as exc:
            raise DescriptorError(f"edge {complex.name(1, e)}: {exc}", (1, e)) from None
        if not tower.contains(out[e]):
            raise DescriptorError(f"edge {complex.name(1, e)}: label does not belong to the tower", (1, e))
    desc = FlatDescriptor(complex, tower, tuple(out))
    if check:
        rep = validate_descriptor(desc)
        if not rep.ok:
            raise DescriptorError(rep.message, rep.location)
    return desc


def trivial_descriptor(complex: DeltaComplex, tower: GroupTower) -> FlatDescriptor:
    return make_descriptor(complex, tower, {})


def validate_descriptor(desc: FlatDescriptor) -> ValidationReport:
    """Check g(e02) = g(e01) g(e12) on every 2-cell at every level."""
    cx, tower = desc.complex, desc.tower
    if len(desc.labels) != cx.count(1):
        return ValidationReport(False, f"{len(desc.labels)} labels for {cx.count(1)} edges", (1,))
    for e, lab in enumerate(desc.labels):
        if not tower.contains(lab):
            return ValidationReport(False, f"label of edge {cx.name(1, e)} is not a tower element", (1, e))
    for c in range(cx.count(2)):
        d0, d1, d2 = cx.cell_faces(2, c)
        for r, L in enumerate(tower.levels):
            g01, g12, g02 = (desc.labels[e].images[r] for e in (d2, d0, d1))
            if L.mul(g01, g12) != g02:
                return ValidationReport(
                    False, f"cocycle condition fails on 2-cell {cx.name(2, c)} at level {r}: "
                           f"g(e01)={g01}, g(e12)={g12}, g(e02)={g02}", (2, c, r))
    return ValidationReport(True, "valid")


@dataclass(frozen=True)
class CoinducedModule:
    """Maps(L_r, Z/p^s) with basis the delta functions of the elements of L_r."""

    tower: GroupTower
    r: int
    s: int

    @property
    def rank(self) -> int:
        return self.tower.order(self.r)

    @property
    def modulus(self) -> int:
        return self.tower.p ** self.s

    def basis(self) -> tuple:
        return self.tower.level(self.r).elements

    def action(self, g) -> np.ndarray:
        """Permutation matrix of (g.m)(x) = m(g^-1 x)."""
        perm = self.tower.level(self.r).left_translation(g)
        P = np.zeros((self.rank, self.rank), dtype=np.int64)
        P[np.arange(self.rank), perm] = 1
        return P


def coefficient_inclusion(tower: GroupTower, r: int, r_next: int) -> np.ndarray:
    """Matrix of Maps(L_r) -> Maps(L_r_next), f -> f o projection (0/1 entries)."""
    if not 0 <= r <= r_next <= tower.depth:
        raise TowerError(f"inclusion {r} -> {r_next} outside tower depth {tower.depth}")
    proj = tower.projection_indices(r_next, r) if r_next > r else np.arange(tower.order(r))
    M = np.zeros((tower.order(r_next), tower.order(r)), dtype=np.int64)
    M[np.arange(tower.order(r_next)), proj] = 1
    return M


class TwistedCochainComplex:
    """Cochains supported on a chosen set of cells with coinduced coefficients.

    ``keep[n]`` lists the n-cells carrying a block; faces outside ``keep`` are
    dropped from the coboundary, which realises both relative cochains (keep
    the cells outside a subcomplex) and restriction to a subcomplex (keep the
    cells inside it).  Blocks are stored symbolically as
    (row cell position, column cell position, sign, permutation or None).
    """

    def __init__(self, complex: DeltaComplex, block_size: int, modulus: int,
                 keep: Sequence[Sequence[int]], edge_perm=None, p: int | None = None,
                 s: int | None = None, tag: str = ""):
        self.complex = complex
        self.m = int(block_size)
        self.modulus = int(modulus)
        self.p, self.s = p, s
        self.tag = tag
        dims = len(complex.cells_per_dim)
        self.keep = tuple(tuple(k) for k in keep) + ((),) * (dims - len(keep))
        self.position = [{c: i for i, c in enumerate(k)} for k in self.keep]
        self.blocks: list[list] = []
        for n in range(dims - 1):
            rows = []
            pos = self.position[n]
            for ri, sigma in enumerate(self.keep[n + 1]):
                f = complex.cell_faces(n + 1, sigma)
                for i, face in enumerate(f):
                    if face not in pos:
                        continue
                    perm = None
                    if i == 0 and edge_perm is not None:
                        perm = edge_perm(complex.edge01(n + 1, sigma))
                    rows.append((ri, pos[face], -1 if i % 2 else 1, perm))
            self.blocks.append(rows)
        self._cache: dict = {}

    @property
    def top(self) -> int:
        return len(self.keep) - 1

    def rank(self, n: int) -> int:
        if not 0 <= n < len(self.keep):
            return 0
        return len(self.keep[n]) * self.m

    def _assemble(self, n: int, dtype, reduce: bool) -> np.ndarray:
        M = np.zeros((self.rank(n + 1), self.rank(n)), dtype=dtype)
        if n < 0 or n >= len(self.blocks):
            return M
        m = self.m
        ar = np.arange(m)
        for ri, ci, sign, perm in self.blocks[n]:
            cols = ci * m + (ar if perm is None else np.asarray(perm))
            np.add.at(M, (ri * m + ar, cols), sign)
        if reduce:
            M %= self.modulus
        return M

    def matrix(self, n: int) -> np.ndarray:
        """The coboundary C^n -> C^{n+1}, entries in 0..p^s-1."""
        key = ("mod", n)
        if key not in self._cache:
            self._cache[key] = self._assemble(n, np.int64, True)
        return self._cache[key]

    def integer_matrix(self, n: int) -> np.ndarray:
        """The same coboundary over Z (entries in {-1, 0, 1} up to repeated faces)."""
        key = ("int", n)
        if key not in self._cache:
            self._cache[key] = self._assemble(n, np.int64, False)
        return self._cache[key]

    def check_square_zero(self) -> tuple[bool, int | None]:
        for n in range(len(self.blocks) - 1):
            if np.any((self.matrix(n + 1) @ self.matrix(n)) % self.modulus):
                return False, n
        return True, None

    def reduce(self, s: int) -> "TwistedCochainComplex":
        """Same complex over Z/p^s for a smaller s."""
        if self.p is None:
            raise ValueError("complex carries no prime")
        new = TwistedCochainComplex.__new__(TwistedCochainComplex)
        new.__dict__.update(self.__dict__)
        new.modulus = self.p ** s
        new.s = s
        new._cache = {}
        return new

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state


def _keep_cells(cx: DeltaComplex, rel: Subcomplex | None, inside: bool = False) -> list[list[int]]:
    dims = len(cx.cells_per_dim)
    if rel is None:
        return [list(range(cx.count(n))) if not inside else [] for n in range(dims)]
    return [rel.inside(n) if inside else rel.outside(n) for n in range(dims)]


def twisted_complex(desc: FlatDescriptor, rel: Subcomplex | None, r: int, s: int) -> TwistedCochainComplex:
    """Relative twisted cochains C^*(Y, rel; Maps(L_r, Z/p^s))."""
    tower = desc.tower
    tower.level(r)
    if s < 1:
        raise ValueError("precision s must be at least 1")
    rep = validate_descriptor(desc)
    if not rep.ok:
        raise DescriptorError(rep.message, rep.location)
    if rel is not None and rel.complex is not desc.complex and rel.complex != desc.complex:
        raise ComplexError("subcomplex belongs to a different complex")
    keep = _keep_cells(desc.complex, rel)
    return TwistedCochainComplex(desc.complex, tower.order(r), tower.p ** s, keep,
                                 edge_perm=lambda e: desc.edge_perm(r, e), p=tower.p, s=s,
                                 tag=f"rel r={r} s={s}" if rel is not None else f"r={r} s={s}")


def restricted_complex(desc: FlatDescriptor, Z: Subcomplex, r: int, s: int) -> TwistedCochainComplex:
    """Twisted cochains of the subcomplex Z itself."""
    keep = _keep_cells(desc.complex, Z, inside=True)
    return TwistedCochainComplex(desc.complex, desc.tower.order(r), desc.tower.p ** s, keep,
                                 edge_perm=lambda e: desc.edge_perm(r, e), p=desc.tower.p, s=s,
                                 tag=f"Z r={r} s={s}")


def cellular_complex(cx: DeltaComplex, p: int, s: int, rel: Subcomplex | None = None) -> TwistedCochainComplex:
    """Ordinary cochains with constant Z/p^s coefficients."""
    return TwistedCochainComplex(cx, 1, p ** s, _keep_cells(cx, rel), p=p, s=s, tag="cellular")


def cover_of(desc: FlatDescriptor, r: int) -> CoverComplex:
    return build_cover(desc.complex, lambda e: desc.edge_perm(r, e), desc.tower.order(r), level=r)


@dataclass
class CochainMap:
    """Degreewise matrices source C^n -> target C^n (or C^{n+shift})."""

    source: TwistedCochainComplex
    target: TwistedCochainComplex
    blocks: dict = field(default_factory=dict)  # degree -> dense matrix
    shift: int = 0

    def matrix(self, n: int) -> np.ndarray:
        if n in self.blocks:
            return self.blocks[n]
        return np.zeros((self.target.rank(n + self.shift), self.source.rank(n)), dtype=np.int64)

    def check(self, degrees: Sequence[int] | None = None) -> None:
        """Raise ChainMapError unless d_target f = f d_source in the given degrees."""
        if self.shift:
            return
        mod = self.target.modulus
        degrees = range(self.source.top + 1) if degrees is None else degrees
        for n in degrees:
            lhs = (self.target.matrix(n) @ self.matrix(n)) % mod
            rhs = (self.matrix(n + 1) @ self.source.matrix(n)) % mod
            diff = np.argwhere(lhs != rhs)
            if len(diff):
                i, j = (int(t) for t in diff[0])
                raise ChainMapError(f"not a cochain map in degree {n}: entry ({i}, {j}) "
                                    f"gives {int(lhs[i, j])} vs {int(rhs[i, j])}", n, (i, j))


def _block_diag(n_blocks: int, block: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(n_blocks, dtype=np.int64), block)


def tower_cochain_map(desc: FlatDescriptor, rel: Subcomplex | None, r: int, r_next: int, s: int,
                      source: TwistedCochainComplex | None = None,
                      target: TwistedCochainComplex | None = None) -> CochainMap:
    """Cochain map induced by Maps(L_r) -> Maps(L_r_next) on every cell block."""
    source = source or twisted_complex(desc, rel, r, s)
    target = target or twisted_complex(desc, rel, r_next, s)
    inc = coefficient_inclusion(desc.tower, r, r_next)
    blocks = {n: _block_diag(len(source.keep[n]), inc) for n in range(len(source.keep))}
    return CochainMap(source, target, blocks)


def reduction_map(source: TwistedCochainComplex, target: TwistedCochainComplex) -> CochainMap:
    """Reduction Z/p^S -> Z/p^s on identical cell/block layouts."""
    blocks = {n: np.eye(source.rank(n), dtype=np.int64) for n in range(len(source.keep))}
    return CochainMap(source, target, blocks)


def _selection_matrix(rows_keep: Sequence[int], cols_keep: Sequence[int], m: int) -> np.ndarray:
    """0/1 matrix sending the block of a cell in ``cols_keep`` to its position in ``rows_keep``."""
    pos = {c: i for i, c in enumerate(rows_keep)}
    M = np.zeros((len(rows_keep) * m, len(cols_keep) * m), dtype=np.int64)
    eye = np.eye(m, dtype=np.int64)
    for j, c in enumerate(cols_keep):
        if c in pos:
            i = pos[c]
            M[i * m:(i + 1) * m, j * m:(j + 1) * m] = eye
    return M


def extension_by_zero(rel_cx: TwistedCochainComplex, abs_cx: TwistedCochainComplex) -> CochainMap:
    blocks = {n: _selection_matrix(abs_cx.keep[n], rel_cx.keep[n], rel_cx.m) for n in range(len(rel_cx.keep))}
    return CochainMap(rel_cx, abs_cx, blocks)


def restriction(abs_cx: TwistedCochainComplex, sub_cx: TwistedCochainComplex) -> CochainMap:
    blocks = {n: _selection_matrix(sub_cx.keep[n], abs_cx.keep[n], abs_cx.m) for n in range(len(abs_cx.keep))}
    return CochainMap(abs_cx, sub_cx, blocks)


def connecting_map(sub_cx: TwistedCochainComplex, abs_cx: TwistedCochainComplex,
                   rel_cx: TwistedCochainComplex) -> CochainMap:
    """Cochain-level connecting map C^n(Z) -> C^{n+1}(Y, Z).

    A cocycle on Z is extended by zero, hit with the absolute coboundary and
    restricted to the cells outside Z; on Z-cocycles this lands in relative
    cocycles and induces the connecting homomorphism.
    """
    blocks = {}
    for n in range(len(sub_cx.keep) - 1):
        ext = _selection_matrix(abs_cx.keep[n], sub_cx.keep[n], sub_cx.m)
        res = _selection_matrix(rel_cx.keep[n + 1], abs_cx.keep[n + 1], abs_cx.m)
        blocks[n] = (res @ abs_cx.matrix(n) @ ext) % abs_cx.modulus
    return CochainMap(sub_cx, rel_cx, blocks, shift=1)


def component_count(desc: FlatDescriptor) -> int:
    return len(set(connected_components(desc.complex)))
