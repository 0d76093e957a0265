"""Colimits over tower levels, reconstruction over precision, structural checks.

Stabilisation rule used throughout.  At fixed s the chain H_0 -> ... -> H_R is
pushed into H_R: A_r is the image of H_r there, an increasing family.  The
chain is *certified* at the first r0 with r0 + 2 <= R and |A_r0| = |A_r0+1|;
the reported colimit value is the cyclic type of A_r0.  This is a heuristic:
no effective bound on the stabilisation level is known, and every report says
which rule produced it.  Whether the last two transition maps are isomorphisms
is recorded separately (``iso_tail``).
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexes import Subcomplex
from .groups import SubTower, TowerError, quotient_tower
from .local_systems import (FlatDescriptor, cellular_complex, coefficient_inclusion, connecting_map,
                            extension_by_zero, make_descriptor, restricted_complex, restriction,
                            tower_cochain_map, twisted_complex)
from .smith import (CohomologyResult, InducedMap, cohomology, format_module, format_zp_module,
                    image_order_log, image_type, induced_map, matmul_mod, smith_normal_form,
                    submodule_type, valuation)

STABILIZATION_RULE = "stable-image: first r0 with r0+2 <= R and |im(H_r0 -> H_R)| = |im(H_r0+1 -> H_R)|"


class StabilizationError(RuntimeError):
    """Two certifying levels disagree about the colimit value."""

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}


# -- job grid -------------------------------------------------------------------

def _level_job(args):
    desc, rel, r, s, degrees = args
    cx = twisted_complex(desc, rel, r, s)
    return {n: cohomology(cx, n) for n in degrees}


def level_cohomology(desc: FlatDescriptor, rel: Subcomplex | None, degrees: Sequence[int],
                     S: int, R: int, jobs: int = 1) -> dict:
    """(s, r) -> {n: CohomologyResult} over the whole grid, assembled in grid order."""
    grid = [(s, r) for s in range(1, S + 1) for r in range(R + 1)]
    args = [(desc, rel, r, s, tuple(degrees)) for s, r in grid]
    if jobs and jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(grid), os.cpu_count() or 1)) as pool:
            results = list(pool.map(_level_job, args))
    else:
        results = [_level_job(a) for a in args]
    return dict(zip(grid, results))


def transition_map(desc: FlatDescriptor, rel: Subcomplex | None, H_lo: CohomologyResult,
                   H_hi: CohomologyResult, r: int, r_next: int, s: int, check: bool = False) -> InducedMap:
    """Map H^n(Y_r) -> H^n(Y_r_next) from Maps(L_r) -> Maps(L_r_next)."""
    inc = coefficient_inclusion(desc.tower, r, r_next)
    n = H_lo.degree
    src = twisted_complex(desc, rel, r, s)
    n_cells = len(src.keep[n])
    F = np.kron(np.eye(n_cells, dtype=np.int64), inc)
    tgt_next = None
    if check:
        tgt = twisted_complex(desc, rel, r_next, s)
        cmap = tower_cochain_map(desc, rel, r, r_next, s, src, tgt)
        cmap.check([n])
        tgt_next = tgt.matrix(n)
    return induced_map(F, H_lo, H_hi, tgt_next)


# -- colimit over r -------------------------------------------------------------

@dataclass
class ColimitApproximation:
    degree: int
    s: int
    R: int
    p: int
    levels: list  # CohomologyResult for r = 0..R
    maps: list  # InducedMap r -> r+1
    image_logs: list  # log_p |A_r|, r = 0..R
    image_types: list  # type of A_r
    r0: int | None
    flag: str  # "certified" or "not-stabilized"
    value: list | None  # exponents of the colimit value when certified
    estimate: list  # type of A_0 if not certified, else the value
    iso_tail: bool  # last two transition maps are isomorphisms
    rule: str = STABILIZATION_RULE
    certifying: list = field(default_factory=list)  # all r meeting the rule

    @property
    def certified(self) -> bool:
        return self.flag == "certified"

    def to_dict(self, matrices: bool = True) -> dict:
        out = {
            "degree": self.degree, "s": self.s, "R": self.R,
            "levels": [h.exponents for h in self.levels],
            "image_log_orders": self.image_logs,
            "image_types": self.image_types,
            "r0": self.r0, "flag": self.flag, "value": self.value,
            "estimate": self.estimate, "iso_tail": self.iso_tail, "rule": self.rule,
        }
        if matrices:
            out["transition_maps"] = [f.matrix.tolist() for f in self.maps]
        return out


def assemble_colimit(levels: Sequence[CohomologyResult], maps: Sequence[InducedMap],
                     strict: bool = False) -> ColimitApproximation:
    R = len(levels) - 1
    top = levels[-1]
    n, s, p = top.degree, top.s, top.p
    # composites H_r -> H_R
    comps: list = [None] * (R + 1)
    ident = InducedMap(top, top, np.eye(len(top.exponents), dtype=np.int64))
    comps[R] = ident
    for r in range(R - 1, -1, -1):
        comps[r] = comps[r + 1].compose(maps[r])
    logs = [image_order_log(c) for c in comps]
    types = [image_type(c) for c in comps]
    certifying = [r for r in range(R - 1) if logs[r] == logs[r + 1]]
    r0 = certifying[0] if certifying else None
    if r0 is not None:
        value = types[r0]
        distinct = {tuple(types[r]) for r in certifying}
        if len(distinct) > 1:
            msg = (f"degree {n}, s={s}: certifying levels {certifying} give different values "
                   f"{sorted(distinct)}")
            if strict:
                raise StabilizationError(msg, {"degree": n, "s": s, "image_types": types,
                                               "levels": [h.exponents for h in levels]})
        flag = "certified"
        estimate = value
    else:
        value, flag, estimate = None, "not-stabilized", types[0]
    iso_tail = R >= 2 and maps[R - 1].is_iso() and maps[R - 2].is_iso()
    return ColimitApproximation(n, s, R, p, list(levels), list(maps), logs, types, r0, flag, value,
                                estimate, iso_tail, certifying=certifying)


def colimit(desc: FlatDescriptor, rel: Subcomplex | None, n: int, s: int, R: int,
            strict: bool = False, check_maps: bool = True) -> ColimitApproximation:
    """Chain H^n(Y_0) -> ... -> H^n(Y_R) over Z/p^s with a stabilisation verdict."""
    if R > desc.tower.depth:
        raise TowerError(f"R={R} exceeds tower depth {desc.tower.depth}")
    levels = [cohomology(twisted_complex(desc, rel, r, s), n) for r in range(R + 1)]
    maps = [transition_map(desc, rel, levels[r], levels[r + 1], r, r + 1, s, check=check_maps)
            for r in range(R)]
    return assemble_colimit(levels, maps, strict)


# -- reconstruction over s ------------------------------------------------------

@dataclass
class DegreeReport:
    degree: int
    colimits: dict  # s -> ColimitApproximation
    free_rank: int | None
    torsion: list
    certified: bool
    precision_limited: bool
    matches_levels: bool
    matches_reductions: bool
    reductions: dict  # s -> type of the image of the top stabilised level
    used_S: int | None
    r_common: int | None

    @property
    def qp_rank(self) -> int | None:
        return self.free_rank

    def reconstruction(self, p: int) -> str:
        if self.free_rank is None:
            return "unknown"
        return format_zp_module(self.free_rank, self.torsion, p)

    def value_at(self, s: int) -> list | None:
        return self.colimits[s].value

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def to_dict(self, p: int, matrices: bool = True) -> dict:
        return {
            "degree": self.degree,
            "per_s": {str(s): c.to_dict(matrices) for s, c in sorted(self.colimits.items())},
            "reconstruction": {"free_rank": self.free_rank, "torsion": self.torsion,
                               "text": self.reconstruction(p)},
            "qp_rank": self.qp_rank,
            "certified": self.certified,
            "precision_limited": self.precision_limited,
            "matches_levels": self.matches_levels,
            "matches_reductions": self.matches_reductions,
            "reductions": {str(s): t for s, t in sorted(self.reductions.items())},
            "used_S": self.used_S, "r_common": self.r_common,
        }


@dataclass
class CompletedReport:
    p: int
    S: int
    R: int
    degrees: dict  # n -> DegreeReport
    rule: str = STABILIZATION_RULE
    notes: list = field(default_factory=list)

    def degree(self, n: int) -> DegreeReport:
        return self.degrees[n]

    def summary_rows(self) -> list[tuple]:
        rows = []
        for n, d in sorted(self.degrees.items()):
            per_s = [format_module(c.value, self.p) if c.certified else "?" for _, c in sorted(d.colimits.items())]
            rows.append((n, d.reconstruction(self.p), "yes" if d.certified else "no", per_s))
        return rows

    def to_dict(self, matrices: bool = True) -> dict:
        return {"p": self.p, "S": self.S, "R": self.R, "rule": self.rule, "notes": self.notes,
                "degrees": {str(n): d.to_dict(self.p, matrices) for n, d in sorted(self.degrees.items())}}


def _reduce_types(top_colims: dict, s_top: int, r_c: int, desc, rel, p: int) -> dict:
    """Type of the image of A_{r_c}(s_top) under reduction into H_R(s) for s < s_top."""
    c_top = top_colims[s_top]
    R = c_top.R
    comp = InducedMap(c_top.levels[R], c_top.levels[R], np.eye(len(c_top.levels[R].exponents), dtype=np.int64))
    for r in range(R - 1, r_c - 1, -1):
        comp = comp.compose(c_top.maps[r])
    out = {}
    for s, c in top_colims.items():
        if s >= s_top:
            continue
        red = induced_map(np.eye(c_top.levels[R].dim, dtype=np.int64), c_top.levels[R], c.levels[R])
        G = matmul_mod(red.matrix, comp.matrix, p ** s)
        out[s] = submodule_type(G, c.levels[R].exponents, p, s)
    return out


def reconstruct_degree(n: int, colims: dict, p: int, desc=None, rel=None) -> DegreeReport:
    """Assemble the per-s colimit values into a candidate Z_p-module."""
    S = max(colims)
    stab = [s for s in sorted(colims) if colims[s].certified]
    all_certified = len(stab) == len(colims)
    if not stab:
        return DegreeReport(n, colims, None, [], False, False, False, False, {}, None, None)
    s_top = stab[-1]
    r_c = max(colims[s].r0 for s in stab)
    reductions = _reduce_types(colims, s_top, r_c, desc, rel, p)
    top_type = submodule_type_at(colims[s_top], r_c)
    if s_top >= 2:
        below = reductions[s_top - 1]
        a = min(top_type.count(s_top), below.count(s_top - 1))
        torsion = list(below)
        for _ in range(a):
            torsion.remove(s_top - 1)
        torsion = sorted(torsion, reverse=True)
        precision_limited = bool(torsion) and max(torsion) >= s_top - 1
    else:
        a = top_type.count(1)
        torsion = []
        precision_limited = True

    def reduce_mod(s):
        return sorted([s] * a + [min(b, s) for b in torsion], reverse=True)

    matches_levels = all(reduce_mod(s) == colims[s].value for s in stab)
    matches_reductions = all(reduce_mod(s) == t for s, t in reductions.items())
    certified = all_certified and s_top == S
    return DegreeReport(n, colims, a, torsion, certified, precision_limited, matches_levels,
                        matches_reductions, reductions, s_top, r_c)


def submodule_type_at(c: ColimitApproximation, r: int) -> list:
    return c.image_types[r]


def completed_cohomology(desc: FlatDescriptor, rel: Subcomplex | None, degrees: Sequence[int],
                         S: int, R: int, jobs: int = 1, strict: bool = False,
                         check_maps: bool = False) -> CompletedReport:
    """Per-degree colimits for s = 1..S and the reconstructed Z_p-modules."""
    if S < 1 or R < 1:
        raise ValueError("S and R must be at least 1")
    if R > desc.tower.depth:
        raise TowerError(f"R={R} exceeds tower depth {desc.tower.depth}")
    degrees = sorted(set(degrees))
    grid = level_cohomology(desc, rel, degrees, S, R, jobs)
    p = desc.tower.p
    out = {}
    for n in degrees:
        colims = {}
        for s in range(1, S + 1):
            levels = [grid[(s, r)][n] for r in range(R + 1)]
            maps = [transition_map(desc, rel, levels[r], levels[r + 1], r, r + 1, s, check=check_maps)
                    for r in range(R)]
            colims[s] = assemble_colimit(levels, maps, strict)
        out[n] = reconstruct_degree(n, colims, p, desc, rel)
    notes = []
    if desc.tower.kind not in ("abelian", "heisenberg", "quotient") and not desc.tower.kind.startswith("sub-"):
        notes.append("custom tower: stabilisation is not backed by a structural result")
    return CompletedReport(p, S, R, out, notes=notes)


# -- long exact sequence -----------------------------------------------------------

@dataclass
class LesReport:
    degrees: list
    levels: dict  # (s, r) -> list of position dicts
    exact: bool
    relative: CompletedReport | None = None
    absolute: CompletedReport | None = None
    boundary: CompletedReport | None = None

    def to_dict(self, matrices: bool = True) -> dict:
        return {"exact": self.exact,
                "levels": {f"s={s},r={r}": v for (s, r), v in sorted(self.levels.items())},
                "relative": self.relative.to_dict(matrices) if self.relative else None,
                "absolute": self.absolute.to_dict(matrices) if self.absolute else None,
                "boundary": self.boundary.to_dict(matrices) if self.boundary else None}


def _exact_at(f: InducedMap, g: InducedMap) -> tuple[bool, str]:
    """Exactness at the middle of A -f-> B -g-> C: g f = 0 and |im f| |im g| = |B|."""
    comp = g.compose(f)
    if np.any(comp.matrix):
        return False, "composite is nonzero"
    if image_order_log(f) + image_order_log(g) != f.target.order_log:
        return False, f"|im| {image_order_log(f)} + {image_order_log(g)} != {f.target.order_log}"
    return True, ""


def les_level(desc: FlatDescriptor, Z: Subcomplex, r: int, s: int) -> list[dict]:
    """Exactness of ... H^n(Y,Z) -> H^n(Y) -> H^n(Z) -> H^{n+1}(Y,Z) ... at one level."""
    rel_cx = twisted_complex(desc, Z, r, s)
    abs_cx = twisted_complex(desc, None, r, s)
    sub_cx = restricted_complex(desc, Z, r, s)
    top = abs_cx.top
    H_rel = [cohomology(rel_cx, n) for n in range(top + 1)]
    H_abs = [cohomology(abs_cx, n) for n in range(top + 1)]
    H_sub = [cohomology(sub_cx, n) for n in range(top + 1)]
    ext = extension_by_zero(rel_cx, abs_cx)
    res = restriction(abs_cx, sub_cx)
    con = connecting_map(sub_cx, abs_cx, rel_cx)
    ext.check()
    res.check()
    f = [induced_map(ext.matrix(n), H_rel[n], H_abs[n], abs_cx.matrix(n)) for n in range(top + 1)]
    g = [induced_map(res.matrix(n), H_abs[n], H_sub[n], sub_cx.matrix(n)) for n in range(top + 1)]
    d = [induced_map(con.matrix(n), H_sub[n], H_rel[n + 1], rel_cx.matrix(n + 1)) for n in range(top)]
    # the sequence starts with 0 -> H^0(Y,Z) and ends with H^top(Z) -> 0
    zero_in = InducedMap(_zero_like(H_rel[0]), H_rel[0], np.zeros((len(H_rel[0].exponents), 0), dtype=np.int64))
    positions = []
    for n in range(top + 1):
        before = d[n - 1] if n >= 1 else zero_in
        ok, why = _exact_at(before, f[n])
        positions.append({"position": f"H^{n}(rel)", "exact": ok, "detail": why})
        ok, why = _exact_at(f[n], g[n])
        positions.append({"position": f"H^{n}(abs)", "exact": ok, "detail": why})
        if n < top:
            ok, why = _exact_at(g[n], d[n])
        else:
            zero_out = InducedMap(H_sub[n], _zero_like(H_sub[n]),
                                  np.zeros((0, len(H_sub[n].exponents)), dtype=np.int64))
            ok, why = _exact_at(g[n], zero_out)
        positions.append({"position": f"H^{n}(Z)", "exact": ok, "detail": why})
    return positions


def _zero_like(H: CohomologyResult) -> CohomologyResult:
    return CohomologyResult(H.degree, H.p, H.s, [], np.zeros((0, 0), dtype=np.int64),
                            np.zeros((0, 0), dtype=np.int64), np.zeros(0, dtype=np.int64),
                            np.zeros((0, 0), dtype=np.int64), 0)


def les_check(desc: FlatDescriptor, Z: Subcomplex, degrees: Sequence[int], s: int, R: int,
              S: int | None = None, jobs: int = 1) -> LesReport:
    """Level-wise exactness for r = 0..R (precisions 1..s) plus the three completed reports."""
    levels = {}
    exact = True
    for ss in range(1, s + 1):
        for r in range(R + 1):
            pos = les_level(desc, Z, r, ss)
            levels[(ss, r)] = pos
            exact &= all(q["exact"] for q in pos)
    S = S or s
    rel = completed_cohomology(desc, Z, degrees, S, R, jobs)
    absolute = completed_cohomology(desc, None, degrees, S, R, jobs)
    boundary = _completed_on_subcomplex(desc, Z, degrees, S, R)
    return LesReport(list(degrees), levels, exact, rel, absolute, boundary)


def _completed_on_subcomplex(desc: FlatDescriptor, Z: Subcomplex, degrees, S, R) -> CompletedReport:
    """Completed cohomology of Z with the restricted descriptor."""
    zc, maps = Z.as_complex()
    inv = {new: old for old, new in maps[1].items()} if len(maps) > 1 else {}
    labels = {k: desc.labels[inv[k]] for k in range(zc.count(1))}
    zdesc = make_descriptor(zc, desc.tower, labels)
    degs = [n for n in degrees if n <= max(zc.dim, 0)]
    return completed_cohomology(zdesc, None, degs, S, R)


# -- excision / coinduction ---------------------------------------------------------

@dataclass
class ExciseReport:
    subtower: SubTower
    reduced: FlatDescriptor
    checks: list  # dicts: n, r, s, full, reduced, index, ok
    ok: bool

    def to_dict(self) -> dict:
        return {"subgroup_orders": [len(h) for h in self.subtower.subgroups], "checks": self.checks,
                "ok": self.ok}


def excise_reduce(desc: FlatDescriptor, checks: Sequence[tuple] = ()) -> ExciseReport:
    """Restrict the descriptor to the closure H of its labels; certify at (n, r, s) triples.

    At each triple the full cohomology must be [L_r : H_r] copies of the
    cohomology computed with Maps(H_r, Z/p^s).
    """
    sub = desc.closure()
    tower = sub.as_tower()
    reduced = desc.with_tower(tower)
    rows, ok = [], True
    cache = {}
    for n, r, s in checks:
        key = (r, s)
        if key not in cache:
            cache[key] = (twisted_complex(desc, None, r, s), twisted_complex(reduced, None, r, s))
        full_cx, red_cx = cache[key]
        full = cohomology(full_cx, n).exponents
        red = cohomology(red_cx, n).exponents
        idx = sub.index(r)
        expect = sorted(red * idx, reverse=True)
        good = full == expect
        ok &= good
        rows.append({"n": n, "r": r, "s": s, "full": full, "reduced": red, "index": idx, "ok": good})
    return ExciseReport(sub, reduced, rows, ok)


# -- nilpotent collapse ---------------------------------------------------------------

@dataclass
class CollapseVerdict:
    equal: bool
    comparisons: list
    total: CompletedReport
    base: CompletedReport

    def to_dict(self, matrices: bool = True) -> dict:
        return {"equal": self.equal, "comparisons": self.comparisons,
                "total": self.total.to_dict(matrices), "base": self.base.to_dict(matrices)}


def nilpotent_collapse_check(desc: FlatDescriptor, normal: SubTower, quotient_desc: FlatDescriptor,
                             degrees: Sequence[int], S: int, R: int, jobs: int = 1) -> CollapseVerdict:
    """Compare completed cohomology of the total space with that of the base over G/N.

    Only values certified on both sides are compared; degrees beyond the
    base's dimension count as zero there.
    """
    quotient_tower(desc.tower, normal)  # raises for non-normal input
    total = completed_cohomology(desc, None, degrees, S, R, jobs)
    base_degs = [n for n in degrees if n <= quotient_desc.complex.dim]
    base = completed_cohomology(quotient_desc, None, base_degs, S, R, jobs)
    comps, equal = [], True
    for n in sorted(set(degrees)):
        for s in range(1, S + 1):
            a = total.degrees[n].colimits[s]
            b = base.degrees[n].colimits[s] if n in base.degrees else None
            va = a.value if a.certified else None
            vb = (b.value if b.certified else None) if b is not None else []
            if va is None or vb is None:
                comps.append({"n": n, "s": s, "total": va, "base": vb, "compared": False})
                continue
            same = va == vb
            equal &= same
            comps.append({"n": n, "s": s, "total": va, "base": vb, "compared": True, "equal": same})
    return CollapseVerdict(equal, comps, total, base)


# -- defect -------------------------------------------------------------------------

@dataclass
class DefectReport:
    defect: int
    lower_bound: bool
    algebraic_rank: int | None  # None when the tower is not abelian
    consistent: bool | None
    report: CompletedReport
    excise: ExciseReport

    def to_dict(self, matrices: bool = True) -> dict:
        return {"defect": self.defect, "lower_bound": self.lower_bound,
                "algebraic_kernel_rank": self.algebraic_rank, "consistent": self.consistent,
                "report": self.report.to_dict(matrices)}


def integral_cycle_basis(desc: FlatDescriptor) -> tuple[np.ndarray, int]:
    """Integer 1-cycles spanning Z_1 (columns) and the first Betti number."""
    cx = desc.complex
    n_e, n_v = cx.count(1), cx.count(0)
    d1 = np.zeros((n_v, n_e), dtype=object)
    for e in range(n_e):
        a, b = cx.cell_faces(1, e)
        d1[a, e] += 1
        d1[b, e] -= 1
    snf = smith_normal_form(d1)
    Zb = snf.V[:, len(snf.diagonal):]
    d2 = np.zeros((n_e, cx.count(2)), dtype=object)
    for c in range(cx.count(2)):
        for i, f in enumerate(cx.cell_faces(2, c)):
            d2[f, c] += (-1) ** i
    rank_b = len(smith_normal_form(d2).diagonal) if d2.size else 0
    return Zb, Zb.shape[1] - rank_b


def algebraic_defect(desc: FlatDescriptor, R: int) -> int:
    """rank H_1 minus the rank (mod p^R) of the label map on integral 1-cycles."""
    if desc.tower.kind not in ("abelian", "sub-abelian"):
        raise TowerError("the algebraic defect needs an abelian tower")
    Zb, b1 = integral_cycle_basis(desc)
    L = np.array([list(desc.labels[e].images[R]) for e in range(desc.complex.count(1))], dtype=object)
    if L.size == 0 or Zb.size == 0:
        return b1
    M = Zb.T.dot(L)
    snf = smith_normal_form(M)
    p = desc.tower.p
    rank = sum(1 for d in snf.diagonal if valuation(d, p) < R)
    return b1 - rank


def defect_estimate(desc: FlatDescriptor, S: int, R: int, jobs: int = 1) -> DefectReport:
    """Largest degree with nonzero completed cohomology, computed over the closure of the labels."""
    exc = excise_reduce(desc)
    degrees = list(range(desc.complex.dim + 1))
    rep = completed_cohomology(exc.reduced, None, degrees, S, R, jobs)
    nonzero = [n for n, d in rep.degrees.items() if d.free_rank or d.torsion]
    defect = max(nonzero) if nonzero else -1
    lower = not all(d.certified for d in rep.degrees.values())
    if desc.tower.kind in ("abelian", "sub-abelian"):
        alg = algebraic_defect(desc, R)
        return DefectReport(defect, lower, alg, alg == defect, rep, exc)
    return DefectReport(defect, lower, None, None, rep, exc)


# -- top degree -------------------------------------------------------------------

@dataclass
class TransferReport:
    degree: int
    s: int
    steps: list  # dicts r, index, normalized, ok
    ok: bool

    def to_dict(self) -> dict:
        return {"degree": self.degree, "s": self.s, "steps": self.steps, "ok": self.ok}


def fundamental_cycle(cx, rel: Subcomplex | None = None) -> np.ndarray:
    """Integer top-dimensional cycle (relative to ``rel``) spanning the left kernel of d^{top-1}."""
    C = cellular_complex(cx, 2, 1, rel)
    D = C.integer_matrix(C.top - 1).astype(object)
    snf = smith_normal_form(D.T)
    ker = snf.V[:, len(snf.diagonal):]
    if ker.shape[1] != 1:
        raise ValueError(f"top-degree cycle space has rank {ker.shape[1]}, expected 1")
    return ker[:, 0]


def top_degree_transfer(desc: FlatDescriptor, s: int, R: int, rel: Subcomplex | None = None) -> TransferReport:
    """Check that H^top(Y_r) -> H^top(Y_r+1) is multiplication by [L_r+1 : L_r].

    Generators are normalised to pair to 1 with the lifted fundamental cycle.
    """
    z = fundamental_cycle(desc.complex, rel)
    q = desc.tower.p ** s
    H = []
    for r in range(R + 1):
        cx = twisted_complex(desc, rel, r, s)
        H.append(cohomology(cx, cx.top))
    top = H[0].degree
    steps, ok = [], True
    for r in range(R):
        m_lo, m_hi = desc.tower.order(r), desc.tower.order(r + 1)
        index = m_hi // m_lo
        f = transition_map(desc, rel, H[r], H[r + 1], r, r + 1, s)
        if H[r].exponents != [s] or H[r + 1].exponents != [s]:
            steps.append({"r": r, "index": index, "ok": False,
                          "detail": f"top cohomology {H[r].exponents} -> {H[r + 1].exponents} is not Z/p^s"})
            ok = False
            continue
        ev_lo = _evaluate(z, H[r].generators[:, 0], m_lo, q)
        ev_hi = _evaluate(z, H[r + 1].generators[:, 0], m_hi, q)
        if ev_lo % desc.tower.p == 0 or ev_hi % desc.tower.p == 0:
            steps.append({"r": r, "index": index, "ok": False, "detail": "generator does not pair to a unit"})
            ok = False
            continue
        m = int(f.matrix[0, 0])
        normalized = m * ev_hi * pow(ev_lo, -1, q) % q
        good = normalized == index % q
        ok &= good
        steps.append({"r": r, "index": index, "map": m, "normalized": normalized, "ok": good})
    return TransferReport(top, s, steps, ok)


def _evaluate(z: np.ndarray, cochain: np.ndarray, m: int, q: int) -> int:
    """Pairing of a twisted top cochain with the lift of the cycle z to the cover."""
    blocks = np.asarray(cochain, dtype=np.int64).reshape(len(z), m).sum(axis=1) % q
    return int(sum(int(a) * int(b) for a, b in zip(z, blocks)) % q)
