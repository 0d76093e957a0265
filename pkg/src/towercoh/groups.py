"""Pro-p groups presented as depth-bounded towers of finite p-groups.

A tower of depth R consists of finite groups L_0, ..., L_R with surjections
L_r -> L_{r-1}.  L_0 is always trivial.  Elements of each level are stored in a
per-tower normal form (tuples of integers for the built-in towers, integer
indices for custom towers) and enumerated in lexicographic order, so that
coefficient-module bases built from them are reproducible.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np


class TowerError(ValueError):
    """Raised for inconsistent tower data (non-normal subgroups, bad tables, ...)."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, int(p**0.5) + 1))


def _is_power_of(n: int, p: int) -> bool:
    while n > 1 and n % p == 0:
        n //= p
    return n == 1


# -- normal-form arithmetic (module level so levels stay picklable) ---------

def _abelian_mul(mod, x, y):
    return tuple((a + b) % mod for a, b in zip(x, y))


def _abelian_inv(mod, x):
    return tuple((-a) % mod for a in x)


def _heis_mul(mod, x, y):
    a, b, c = x
    a2, b2, c2 = y
    return ((a + a2) % mod, (b + b2) % mod, (c + c2 + a * b2) % mod)


def _heis_inv(mod, x):
    a, b, c = x
    return ((-a) % mod, (-b) % mod, (a * b - c) % mod)


def _table_mul(table, x, y):
    return int(table[x][y])


def _reduce_mod(mod, x):
    return tuple(a % mod for a in x)


def _table_project(tables, r, x):
    return int(tables[r - 1][x])


class LevelGroup:
    """A finite group with an explicit, ordered element list.

    ``mul`` and ``inv`` act on normal forms.  Left translations are returned as
    index arrays: ``left_translation(g)[i]`` is the index of ``g^-1 * x_i``,
    which is exactly the permutation needed for ``(g.m)(x) = m(g^-1 x)``.
    """

    def __init__(self, elements: Iterable[Hashable], mul: Callable, identity: Hashable,
                 inv: Callable | None = None):
        self.elements = tuple(elements)
        self._index = {x: i for i, x in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise TowerError("duplicate elements in level group")
        self._mul = mul
        self._inv = inv
        self.identity = identity
        if identity not in self._index:
            raise TowerError("identity is not among the elements")
        self._translations: dict = {}

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self._index

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise TowerError(f"{x!r} is not an element of this level") from None

    def mul(self, x, y):
        return self._mul(x, y)

    def inv(self, x):
        if self._inv is not None:
            return self._inv(x)
        # p-groups: x^(|G|-1) is the inverse
        y, e, base = self.identity, self.order - 1, x
        while e:
            if e & 1:
                y = self._mul(y, base)
            base = self._mul(base, base)
            e >>= 1
        return y

    def power(self, x, k: int):
        y = self.identity
        for _ in range(k):
            y = self._mul(y, x)
        return y

    def conj(self, g, h):
        """g h g^-1"""
        return self._mul(self._mul(g, h), self.inv(g))

    def left_translation(self, g) -> np.ndarray:
        # cache: the same edge label is translated once per cell and level
        key = g
        perm = self._translations.get(key)
        if perm is None:
            gi = self.inv(g)
            perm = np.fromiter((self._index[self._mul(gi, x)] for x in self.elements),
                               dtype=np.int64, count=self.order)
            self._translations[key] = perm
        return perm

    def generated(self, gens: Iterable) -> frozenset:
        """Subgroup generated by ``gens`` (breadth-first closure)."""
        gens = [g for g in gens if g != self.identity]
        seen = {self.identity}
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = self._mul(x, g)
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return frozenset(seen)

    def is_abelian(self) -> bool:
        els = self.elements
        return all(self._mul(x, y) == self._mul(y, x) for x in els for y in els)

    def exponent(self) -> int:
        e = 1
        for x in self.elements:
            k, y = 1, x
            while y != self.identity:
                y = self._mul(y, x)
                k += 1
            e = max(e, k)
        return e

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_translations"] = {}
        return state


@dataclass(frozen=True)
class TowerElement:
    """A compatible sequence of images, one per level 0..depth."""

    images: tuple

    def at(self, r: int):
        return self.images[r]

    @property
    def depth(self) -> int:
        return len(self.images) - 1


class GroupTower:
    """Finite levels L_0..L_R of a pro-p group with projections L_r -> L_{r-1}."""

    def __init__(self, kind: str, p: int, levels: Sequence[LevelGroup],
                 project: Callable, params: dict | None = None):
        if not is_prime(p):
            raise TowerError(f"p={p} is not prime")
        self.kind = kind
        self.p = p
        self.levels = tuple(levels)
        self._project = project
        self.params = dict(params or {})
        self._proj_arrays: dict = {}
        if self.levels[0].order != 1:
            raise TowerError("level 0 must be the trivial group")
        for r, L in enumerate(self.levels):
            if not _is_power_of(L.order, p):
                raise TowerError(f"level {r} has order {L.order}, not a power of {p}")

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level(self, r: int) -> LevelGroup:
        if not 0 <= r <= self.depth:
            raise TowerError(f"level {r} outside tower depth {self.depth}")
        return self.levels[r]

    def order(self, r: int) -> int:
        return self.level(r).order

    def projection(self, r: int, x):
        """Image of a level-r element in L_{r-1}."""
        if not 1 <= r <= self.depth:
            raise TowerError(f"no projection out of level {r}")
        return self._project(r, x)

    def project_to(self, r: int, r_low: int, x):
        for t in range(r, r_low, -1):
            x = self._project(t, x)
        return x

    def projection_indices(self, r: int, r_low: int | None = None) -> np.ndarray:
        """Index array sending each element of L_r to the index of its image in L_{r_low}."""
        r_low = r - 1 if r_low is None else r_low
        key = (r, r_low)
        arr = self._proj_arrays.get(key)
        if arr is None:
            lo = self.level(r_low)
            arr = np.fromiter((lo.index(self.project_to(r, r_low, x)) for x in self.level(r).elements),
                              dtype=np.int64, count=self.order(r))
            self._proj_arrays[key] = arr
        return arr

    def element(self, data) -> TowerElement:
        """Build a TowerElement from user data in this tower's normal form.

        Abelian towers take an integer vector, Heisenberg towers an integer
        triple (a, b, c) for the matrix [[1, a, c], [0, 1, b], [0, 0, 1]],
        other towers a level-depth normal form.
        """
        if self.kind in ("abelian", "heisenberg"):
            data = tuple(int(a) for a in np.atleast_1d(np.asarray(data, dtype=object)))
            width = self.params["rank"] if self.kind == "abelian" else 3
            if len(data) != width:
                raise TowerError(f"expected {width} integers for a {self.kind} element, got {data}")
            images = tuple(_reduce_mod(self.p**r, data) if r else (0,) * width
                           for r in range(self.depth + 1))
            if self.kind == "abelian":
                images = tuple(tuple(x) for x in images)
            return TowerElement(images)
        top = data
        if top not in self.level(self.depth):
            raise TowerError(f"{data!r} is not an element of level {self.depth}")
        images = [top]
        for r in range(self.depth, 0, -1):
            images.append(self.projection(r, images[-1]))
        return TowerElement(tuple(reversed(images)))

    def identity(self) -> TowerElement:
        return TowerElement(tuple(L.identity for L in self.levels))

    def mul(self, x: TowerElement, y: TowerElement) -> TowerElement:
        return TowerElement(tuple(L.mul(a, b) for L, a, b in zip(self.levels, x.images, y.images)))

    def inv(self, x: TowerElement) -> TowerElement:
        return TowerElement(tuple(L.inv(a) for L, a in zip(self.levels, x.images)))

    def contains(self, x: TowerElement) -> bool:
        if len(x.images) != len(self.levels):
            return False
        if not all(a in L for L, a in zip(self.levels, x.images)):
            return False
        return all(self._project(r, x.images[r]) == x.images[r - 1] for r in range(1, len(self.levels)))

    def truncate(self, depth: int) -> "GroupTower":
        if depth > self.depth:
            raise TowerError(f"cannot extend a depth-{self.depth} tower to {depth}")
        return GroupTower(self.kind, self.p, self.levels[:depth + 1], self._project, self.params)

    def describe(self) -> str:
        extra = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()) if k != "parent")
        return f"{self.kind}(p={self.p},depth={self.depth}{',' + extra if extra else ''})"

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_proj_arrays"] = {}
        return state


def make_abelian_tower(N: int, p: int, R: int) -> GroupTower:
    """Tower of Z_p^N with L_r = (Z/p^r)^N and componentwise reduction."""
    if N < 0 or R < 0:
        raise TowerError("rank and depth must be non-negative")
    levels = []
    for r in range(R + 1):
        mod = p**r
        els = itertools.product(range(mod), repeat=N)
        levels.append(LevelGroup(els, partial(_abelian_mul, max(mod, 1)), (0,) * N,
                                 partial(_abelian_inv, max(mod, 1))))
    return GroupTower("abelian", p, levels, _AbelianProject(p), {"rank": N})


class _AbelianProject:
    def __init__(self, p):
        self.p = p

    def __call__(self, r, x):
        return _reduce_mod(self.p ** (r - 1), x) if r > 1 else tuple(0 for _ in x)


class _HeisProject(_AbelianProject):
    pass


def make_heisenberg_tower(p: int, R: int) -> GroupTower:
    """Unipotent upper-triangular 3x3 matrices over Z/p^r, |L_r| = p^(3r)."""
    if R < 0:
        raise TowerError("depth must be non-negative")
    levels = []
    for r in range(R + 1):
        mod = p**r
        els = itertools.product(range(mod), repeat=3)
        levels.append(LevelGroup(els, partial(_heis_mul, max(mod, 1)), (0, 0, 0),
                                 partial(_heis_inv, max(mod, 1))))
    return GroupTower("heisenberg", p, levels, _HeisProject(p), {"rank": 3})


def make_custom_tower(p: int, tables: Sequence, projections: Sequence) -> GroupTower:
    """Tower from explicit multiplication tables (elements are 0..n-1, 0 the identity).

    ``tables[r]`` is the multiplication table of L_r and ``projections[r-1]``
    maps L_r to L_{r-1} for r >= 1.
    """
    tables = [np.asarray(t, dtype=np.int64) for t in tables]
    projections = [np.asarray(t, dtype=np.int64) for t in projections]
    if len(projections) != len(tables) - 1:
        raise TowerError("need one projection table per level above 0")
    levels = []
    for r, t in enumerate(tables):
        n = t.shape[0]
        if t.shape != (n, n) or t.min(initial=0) < 0 or t.max(initial=0) >= n:
            raise TowerError(f"level {r}: malformed multiplication table")
        if not (np.array_equal(t[0], np.arange(n)) and np.array_equal(t[:, 0], np.arange(n))):
            raise TowerError(f"level {r}: element 0 is not the identity")
        for row in t:
            if len(set(row.tolist())) != n:
                raise TowerError(f"level {r}: table is not a Latin square")
        # associativity on all triples is cheap at desk scale
        idx = np.arange(n)
        lhs = t[t[:, :, None], idx[None, None, :]]
        rhs = t[idx[:, None, None], t[None, :, :]]
        if not np.array_equal(lhs, rhs):
            raise TowerError(f"level {r}: multiplication is not associative")
        levels.append(LevelGroup(range(n), partial(_table_mul, t.tolist()), 0))
    tower = GroupTower("custom", p, levels, partial(_table_project, [q.tolist() for q in projections]),
                       {"levels": len(tables) - 1})
    for r in range(1, tower.depth + 1):
        pr = projections[r - 1]
        if pr.shape != (tables[r].shape[0],) or pr.min(initial=0) < 0 or pr.max(initial=0) >= tables[r - 1].shape[0]:
            raise TowerError(f"projection {r}: malformed table")
        if len(set(pr.tolist())) != tables[r - 1].shape[0]:
            raise TowerError(f"projection {r}: not surjective")
        t_hi, t_lo = tables[r], tables[r - 1]
        if not np.array_equal(pr[t_hi], t_lo[pr[:, None], pr[None, :]]):
            raise TowerError(f"projection {r}: not a homomorphism")
    return tower


@dataclass
class SubTower:
    """Subgroups H_r <= L_r with projection(H_r) = H_{r-1}."""

    parent: GroupTower
    subgroups: tuple  # frozensets of normal forms, one per level
    _tower: GroupTower | None = field(default=None, repr=False, compare=False)

    def subgroup(self, r: int) -> frozenset:
        return self.subgroups[r]

    def index(self, r: int) -> int:
        return self.parent.order(r) // len(self.subgroups[r])

    def contains(self, x: TowerElement) -> bool:
        return all(a in H for a, H in zip(x.images, self.subgroups))

    def is_full(self) -> bool:
        return all(len(H) == self.parent.order(r) for r, H in enumerate(self.subgroups))

    def as_tower(self) -> GroupTower:
        """The subgroups as a GroupTower in their own right (same normal forms)."""
        if self._tower is None:
            levels = []
            for L, H in zip(self.parent.levels, self.subgroups):
                els = [x for x in L.elements if x in H]
                levels.append(LevelGroup(els, L._mul, L.identity, L._inv))
            params = dict(self.parent.params)
            params["parent"] = self.parent.kind
            kind = self.parent.kind if self.is_full() else "sub-" + self.parent.kind
            self._tower = GroupTower(kind, self.parent.p, levels, self.parent._project, params)
        return self._tower

    def is_normal(self) -> tuple[bool, tuple | None]:
        """(True, None) or (False, (level, g, h)) with g h g^-1 outside H_r."""
        for r, (L, H) in enumerate(zip(self.parent.levels, self.subgroups)):
            for g in L.elements:
                for h in sorted(H, key=L.index):
                    if L.conj(g, h) not in H:
                        return False, (r, g, h)
        return True, None


def closure_of(elements: Sequence[TowerElement], tower: GroupTower) -> SubTower:
    """SubTower generated level-by-level by the images of ``elements``."""
    for x in elements:
        if not tower.contains(x):
            raise TowerError(f"{x} does not belong to {tower.describe()}")
    subgroups = tuple(L.generated(x.images[r] for x in elements) for r, L in enumerate(tower.levels))
    return SubTower(tower, subgroups)


def trivial_subtower(tower: GroupTower) -> SubTower:
    return SubTower(tower, tuple(frozenset([L.identity]) for L in tower.levels))


class _CosetMul:
    def __init__(self, mul, rep):
        self.mul, self.rep = mul, rep

    def __call__(self, x, y):
        return self.rep[self.mul(x, y)]


class _CosetInv:
    def __init__(self, level, rep):
        self.level, self.rep = level, rep

    def __call__(self, x):
        return self.rep[self.level.inv(x)]


class _CosetProject:
    def __init__(self, parent, reps):
        self.parent, self.reps = parent, reps

    def __call__(self, r, x):
        return self.reps[r - 1][self.parent.projection(r, x)]


def quotient_tower(tower: GroupTower, normal: SubTower) -> GroupTower:
    """Levels L_r / H_r; cosets are represented by their first element in L_r order."""
    ok, witness = normal.is_normal()
    if not ok:
        r, g, h = witness
        raise TowerError(f"subgroup is not normal at level {r}: "
                         f"{g!r} * {h!r} * {g!r}^-1 leaves the subgroup")
    levels, reps = [], []
    for L, H in zip(tower.levels, normal.subgroups):
        rep = {}
        for x in L.elements:
            if x in rep:
                continue
            for h in H:
                rep[L.mul(x, h)] = x
        reps.append(rep)
        els = [x for x in L.elements if rep[x] == x]
        levels.append(LevelGroup(els, _CosetMul(L._mul, rep), L.identity, _CosetInv(L, rep)))
    params = dict(tower.params)
    params["parent"] = tower.kind
    q = GroupTower("quotient", tower.p, levels, _CosetProject(tower, reps), params)
    q.coset_reps = reps
    return q


def quotient_element(quotient: GroupTower, x: TowerElement) -> TowerElement:
    """Image of a parent-tower element in a quotient tower."""
    return TowerElement(tuple(rep[a] for rep, a in zip(quotient.coset_reps, x.images)))
