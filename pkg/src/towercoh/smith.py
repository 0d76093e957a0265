"""Smith normal forms over Z and Z/p^s, cohomology with generators, induced maps.

Over Z/p^s (a local principal ideal ring) elimination pivots on an entry of
minimal p-valuation; ties go to the lowest row, then the lowest column.  With
that rule the minimal valuation never decreases, so the reduction proceeds in
one sweep over the rows for each valuation 0, 1, ..., s-1 and every row holds
at most one pivot.  Pivots stay in place (no swaps); transformations are
tracked as explicit matrices when requested.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_INT64_SAFE = 2**62


def valuation(x: int, p: int, cap: int | None = None) -> int:
    """p-adic valuation of an integer (``cap`` for zero, default a large sentinel)."""
    x = int(x)
    if x == 0:
        return cap if cap is not None else 10**9
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def matmul_mod(A: np.ndarray, B: np.ndarray, q: int) -> np.ndarray:
    """A @ B mod q without int64 overflow."""
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if A.shape[1] * (q - 1) ** 2 < _INT64_SAFE:
        return (A.astype(np.int64) @ B.astype(np.int64)) % q
    out = (A.astype(object) @ B.astype(object)) % q
    return out.astype(np.int64)


# -- sparse triplet format ---------------------------------------------------

@dataclass
class SparseMatrix:
    """Triplet matrix; ``modulus`` is 0 for integer matrices."""

    rows: int
    cols: int
    entries: dict = field(default_factory=dict)  # (i, j) -> value
    modulus: int = 0

    @classmethod
    def from_dense(cls, M: np.ndarray, modulus: int = 0) -> "SparseMatrix":
        M = np.asarray(M)
        out = cls(M.shape[0], M.shape[1], {}, modulus)
        for i, j in zip(*np.nonzero(M % modulus if modulus else M)):
            v = int(M[i, j])
            out.entries[(int(i), int(j))] = v % modulus if modulus else v
        return out

    def to_dense(self) -> np.ndarray:
        M = np.zeros((self.rows, self.cols), dtype=np.int64)
        for (i, j), v in self.entries.items():
            M[i, j] = v
        return M

    def dumps(self) -> str:
        """Text form: header ``rows cols modulus`` then one ``i j value`` line per entry."""
        lines = [f"{self.rows} {self.cols} {self.modulus}"]
        lines += [f"{i} {j} {v}" for (i, j), v in sorted(self.entries.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SparseMatrix":
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip() and not ln.startswith("#")]
        rows, cols, modulus = (int(t) for t in lines[0])
        out = cls(rows, cols, {}, modulus)
        for k, parts in enumerate(lines[1:], start=2):
            i, j, v = (int(t) for t in parts)
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"line {k}: entry ({i}, {j}) outside {rows}x{cols}")
            out.entries[(i, j)] = v % modulus if modulus else v
        return out


# -- Smith normal form over Z --------------------------------------------------

@dataclass
class IntegerSNF:
    """U M V = D with U, V unimodular; ``diagonal`` lists the nonzero d_1 | d_2 | ..."""

    diagonal: list
    U: np.ndarray
    V: np.ndarray

    def check(self, M) -> bool:
        M = np.asarray(M, dtype=object)
        D = self.U.dot(M).dot(self.V)
        expect = np.zeros(M.shape, dtype=object)
        for k, d in enumerate(self.diagonal):
            expect[k, k] = d
        return bool((D == expect).all())


def determinant(M: np.ndarray) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = [[int(x) for x in row] for row in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k]:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[-1][-1] if n else 1


def smith_normal_form(M) -> IntegerSNF:
    """Smith normal form over Z with unimodular certificates."""
    A = np.array(M, dtype=object)
    if A.ndim != 2:
        A = A.reshape(0, 0)
    m, n = A.shape
    U = np.eye(m, dtype=object)
    V = np.eye(n, dtype=object)
    diag = []
    t = 0
    while t < min(m, n):
        nz = np.argwhere(A[t:, t:] != 0)
        if len(nz) == 0:
            break
        while True:
            sub = A[t:, t:]
            nz = np.argwhere(sub != 0)
            vals = [abs(sub[i, j]) for i, j in nz]
            k = int(np.argmin(vals))
            i, j = (int(x) + t for x in nz[k])
            # move the smallest entry to (t, t)
            A[[t, i]] = A[[i, t]]
            U[[t, i]] = U[[i, t]]
            A[:, [t, j]] = A[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
            piv = A[t, t]
            done = True
            for r in range(t + 1, m):
                if A[r, t]:
                    q = A[r, t] // piv
                    A[r] -= q * A[t]
                    U[r] -= q * U[t]
                    if A[r, t]:
                        done = False
            for c in range(t + 1, n):
                if A[t, c]:
                    q = A[t, c] // piv
                    A[:, c] -= q * A[:, t]
                    V[:, c] -= q * V[:, t]
                    if A[t, c]:
                        done = False
            if not done:
                continue
            # divisibility: fold an offending row into row t
            bad = np.argwhere(A[t + 1:, t + 1:] % piv != 0)
            if len(bad):
                r = int(bad[0][0]) + t + 1
                A[t] += A[r]
                U[t] += U[r]
                continue
            break
        if A[t, t] < 0:
            A[t] = -A[t]
            U[t] = -U[t]
        diag.append(A[t, t])
        t += 1
    return IntegerSNF([int(d) for d in diag], U, V)


def integer_rank_and_torsion(M, p: int) -> tuple[int, list[int]]:
    """Rank of an integer matrix and the p-valuations of its non-unit invariant factors."""
    snf = smith_normal_form(M)
    return len(snf.diagonal), [valuation(d, p) for d in snf.diagonal if valuation(d, p) > 0]


def uct_cohomology_type(d_prev, d_next, dim_n: int, p: int, s: int) -> list[int]:
    """Exponents of H^n(C; Z/p^s) from integral coboundaries by universal coefficients.

    ``d_prev`` is C^{n-1} -> C^n, ``d_next`` is C^n -> C^{n+1} (integer matrices).
    """
    rk_prev, tors_prev = integer_rank_and_torsion(d_prev, p) if np.size(d_prev) else (0, [])
    rk_next, tors_next = integer_rank_and_torsion(d_next, p) if np.size(d_next) else (0, [])
    free = dim_n - rk_prev - rk_next
    out = [s] * free + [min(v, s) for v in tors_prev] + [min(v, s) for v in tors_next]
    return sorted(out, reverse=True)


# -- elimination over Z/p^s ---------------------------------------------------

@dataclass
class LocalSNF:
    """P M Q = D over Z/p^s with D having p^v at each pivot (row, col) and zeros elsewhere."""

    p: int
    s: int
    pivots: list  # (row, col, valuation) in pivot order
    P: np.ndarray | None = None
    Pinv: np.ndarray | None = None
    Q: np.ndarray | None = None
    Qinv: np.ndarray | None = None
    shape: tuple = (0, 0)

    @property
    def modulus(self) -> int:
        return self.p ** self.s

    def diagonal(self) -> list[int]:
        return sorted(v for _, _, v in self.pivots)

    def invariant_factors(self) -> list[int]:
        return [self.p ** v for v in self.diagonal()]


def _inverse_unit(u: int, q: int) -> int:
    return pow(int(u), -1, q)


def local_snf(M: np.ndarray, p: int, s: int, track_rows: bool = False,
              track_cols: bool = False) -> LocalSNF:
    """Minimal-valuation elimination of M over Z/p^s."""
    q = p ** s
    if q * q >= _INT64_SAFE:
        raise OverflowError(f"p^s = {q} too large for int64 elimination")
    A = np.array(M, dtype=np.int64) % q
    m, n = A.shape
    P = Pinv = Q = Qinv = None
    if track_rows:
        P = np.eye(m, dtype=np.int64)
        Pinv = np.eye(m, dtype=np.int64)
    if track_cols:
        Q = np.eye(n, dtype=np.int64)
        Qinv = np.eye(n, dtype=np.int64)
    pivots = []
    pivot_row = np.zeros(m, dtype=bool)
    pivot_col = np.zeros(n, dtype=bool)
    for v in range(s):
        pv, pv1 = p ** v, p ** (v + 1)
        for i in range(m):
            if pivot_row[i]:
                continue
            row = A[i]
            cand = np.nonzero((row % pv1 != 0) & ~pivot_col)[0]
            if len(cand) == 0:
                continue
            j = int(cand[0])
            u = int(row[j]) // pv
            if u % p == 0:
                raise AssertionError("pivot valuation bookkeeping failed")
            uinv = _inverse_unit(u, q)
            if uinv != 1:
                A[i] = (A[i] * uinv) % q
                if track_rows:
                    P[i] = (P[i] * uinv) % q
                    Pinv[:, i] = (Pinv[:, i] * (u % q)) % q
            # clear column j below/above the pivot
            col = A[:, j].copy()
            col[i] = 0
            nzr = np.nonzero(col)[0]
            if len(nzr):
                c = col // pv  # exact: valuations are >= v
                A[nzr] = (A[nzr] - np.outer(c[nzr], A[i])) % q
                if track_rows:
                    P[nzr] = (P[nzr] - np.outer(c[nzr], P[i])) % q
                    Pinv[:, i] = (Pinv[:, i] + matmul_mod(Pinv[:, nzr], c[nzr, None], q)[:, 0]) % q
            # clear row i
            w = A[i].copy()
            w[j] = 0
            nzc = np.nonzero(w)[0]
            if len(nzc):
                w = w // pv
                A[i, nzc] = 0
                if track_cols:
                    Q[:, nzc] = (Q[:, nzc] - np.outer(Q[:, j], w[nzc])) % q
                    Qinv[j] = (Qinv[j] + matmul_mod(w[None, nzc], Qinv[nzc], q)[0]) % q
            pivot_row[i] = True
            pivot_col[j] = True
            pivots.append((i, j, v))
    return LocalSNF(p, s, pivots, P, Pinv, Q, Qinv, (m, n))


def local_rank_profile(M: np.ndarray, p: int, s: int) -> list[int]:
    """Sorted pivot valuations of M over Z/p^s."""
    return local_snf(M, p, s).diagonal()


def cokernel_exponents(M: np.ndarray, p: int, s: int) -> list[int]:
    """Exponents of (Z/p^s)^rows / im M, descending."""
    snf = local_snf(M, p, s)
    out = [s - 0] * (M.shape[0] - len(snf.pivots)) + [v for _, _, v in snf.pivots if v > 0]
    return sorted(out, reverse=True)


# -- cohomology -----------------------------------------------------------------

@dataclass
class CohomologyResult:
    """H^n = ker d^n / im d^{n-1} over Z/p^s as a sum of cyclic groups.

    ``exponents[k]`` is b_k with factor Z/p^{b_k} (descending); ``generators``
    holds one cocycle per factor (columns, entries mod p^s).  ``project``
    sends a cocycle to its coordinates, coordinate k taken mod p^{b_k}.
    """

    degree: int
    p: int
    s: int
    exponents: list
    generators: np.ndarray  # (dim C^n, k)
    # projection data: t = (Qinv_J x) / p^(s - e_J); z = P2 t; coordinates z[rows]
    _qinv: np.ndarray = field(repr=False, default=None)
    _shift: np.ndarray = field(repr=False, default=None)
    _p2: np.ndarray = field(repr=False, default=None)
    dim: int = 0

    @property
    def modulus(self) -> int:
        return self.p ** self.s

    @property
    def order_log(self) -> int:
        return int(sum(self.exponents))

    def order(self) -> int:
        return self.p ** self.order_log

    def is_zero(self) -> bool:
        return not self.exponents

    def free_rank(self) -> int:
        """Number of factors of full order p^s."""
        return sum(1 for b in self.exponents if b == self.s)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of cocycle(s) x (vector or columns) in the cyclic decomposition."""
        q = self.modulus
        x = np.asarray(x, dtype=np.int64)
        if not self.exponents:
            cols = x.shape[1] if x.ndim > 1 else 1
            out = np.zeros((0, cols), dtype=np.int64)
            return out if x.ndim > 1 else out[:, 0]
        X = x.reshape(self.dim, -1) % q
        Y = matmul_mod(self._qinv, X, q)
        div = self.p ** self._shift
        if np.any(Y % div[:, None]):
            raise ValueError("vector is not a cocycle")
        T = Y // div[:, None]
        Z = matmul_mod(self._p2, T, q)
        mods = np.array([self.p ** b for b in self.exponents], dtype=np.int64)
        out = Z % mods[:, None]
        return out if np.ndim(x) > 1 else out[:, 0]

    def summary(self) -> str:
        return format_module(self.exponents, self.p)


def cohomology_from_matrices(A: np.ndarray, B: np.ndarray, n: int, p: int, s: int) -> CohomologyResult:
    """Cohomology at the middle of C^{n-1} --A--> C^n --B--> C^{n+1} over Z/p^s."""
    q = p ** s
    N = A.shape[0]
    if A.shape[0] != N or B.shape[1] != N:
        raise ValueError(f"incompatible coboundaries {A.shape} and {B.shape}")
    if A.shape[1] and B.shape[0] and matmul_mod(B % q, A % q, q).any():
        raise ValueError(f"d^{n} d^{n - 1} != 0")
    # 1. kernel of B: columns Q[:, j] * p^(s - e_j)
    kb = local_snf(B, p, s, track_cols=True)
    e = np.full(N, s, dtype=np.int64)
    for _, j, v in kb.pivots:
        e[j] = v
    J = np.nonzero(e > 0)[0]
    Qk, Qkinv = kb.Q, kb.Qinv
    shift = (s - e[J]).astype(np.int64)
    div = p ** shift
    # 2. image of A in kernel coordinates
    Y = matmul_mod(Qkinv[J], A % q, q) if A.shape[1] else np.zeros((len(J), 0), dtype=np.int64)
    if np.any(Y % div[:, None]):
        raise ValueError(f"d^{n} d^{n - 1} != 0 (image not inside kernel)")
    T = Y // div[:, None]
    # 3. cokernel of [T | diag(p^e_J)]
    rel = np.concatenate([T, np.diag(p ** e[J]) % q], axis=1) if len(J) else np.zeros((0, 0), dtype=np.int64)
    k2 = local_snf(rel, p, s, track_rows=True)
    w = {}
    for i, _, v in k2.pivots:
        w[i] = v
    rows, exps = [], []
    for i in range(len(J)):
        b = w.get(i, s)
        if b > 0:
            rows.append(i)
            exps.append(b)
    order = sorted(range(len(rows)), key=lambda k: (-exps[k], rows[k]))
    rows = [rows[k] for k in order]
    exps = [exps[k] for k in order]
    # 4. generators x = Q_J (p^shift * P2inv[:, rows])
    if rows:
        Tg = k2.Pinv[:, rows] * div[:, None] % q
        gens = matmul_mod(Qk[:, J], Tg, q)
        p2 = k2.P[rows]
    else:
        gens = np.zeros((N, 0), dtype=np.int64)
        p2 = np.zeros((0, len(J)), dtype=np.int64)
    return CohomologyResult(n, p, s, exps, gens, Qkinv[J], shift, p2, N)


def cohomology(complex, n: int) -> CohomologyResult:
    """H^n of a TwistedCochainComplex over its own Z/p^s."""
    if complex.p is None:
        raise ValueError("complex carries no prime")
    A = complex.matrix(n - 1) if n >= 1 else np.zeros((complex.rank(n), 0), dtype=np.int64)
    B = complex.matrix(n)
    return cohomology_from_matrices(A, B, n, complex.p, complex.s)


def all_cohomology(complex) -> list[CohomologyResult]:
    return [cohomology(complex, n) for n in range(complex.top + 1)]


# -- induced maps ---------------------------------------------------------------

@dataclass
class InducedMap:
    """Matrix of a map H -> H' in cyclic-decomposition coordinates (column k = image of gen k)."""

    source: CohomologyResult
    target: CohomologyResult
    matrix: np.ndarray

    def is_iso(self) -> bool:
        if sorted(self.source.exponents) != sorted(self.target.exponents):
            return False
        return image_order_log(self) == self.target.order_log

    def image_order_log(self) -> int:
        return image_order_log(self)

    def compose(self, first: "InducedMap") -> "InducedMap":
        """self o first."""
        q = self.target.modulus
        M = matmul_mod(self.matrix, first.matrix, q)
        mods = np.array([self.target.p ** b for b in self.target.exponents], dtype=np.int64)
        return InducedMap(first.source, self.target, M % mods[:, None] if len(mods) else M)

    def is_multiplication_by(self, c: int) -> bool:
        """True iff the map equals c times the identity (same decomposition on both sides)."""
        if self.source.exponents != self.target.exponents:
            return False
        k = len(self.source.exponents)
        mods = np.array([self.target.p ** b for b in self.target.exponents], dtype=np.int64)
        want = (c * np.eye(k, dtype=np.int64)) % mods[:, None] if k else np.zeros((0, 0), dtype=np.int64)
        return bool(np.array_equal(self.matrix % mods[:, None] if k else self.matrix, want))


def induced_map(fmat: np.ndarray, source: CohomologyResult, target: CohomologyResult,
                target_next: np.ndarray | None = None) -> InducedMap:
    """Induced map of a cochain-level matrix on cohomology.

    ``target_next`` (the target coboundary) enables a check that images of
    generators are cocycles.  Annihilator compatibility is always checked.
    """
    q = target.modulus
    if fmat.shape != (target.dim, source.dim):
        raise ValueError(f"map shape {fmat.shape} does not match ({target.dim}, {source.dim})")
    img = matmul_mod(fmat % q, source.generators, q)
    if target_next is not None and np.any(matmul_mod(target_next, img, q)):
        bad = int(np.argwhere(matmul_mod(target_next, img, q))[0][1])
        raise ValueError(f"image of generator {bad} is not a cocycle")
    M = target.project(img) if source.exponents else np.zeros((len(target.exponents), 0), dtype=np.int64)
    M = np.asarray(M).reshape(len(target.exponents), len(source.exponents))
    for k, b in enumerate(source.exponents):
        for i, bt in enumerate(target.exponents):
            if (M[i, k] * target.p ** b) % target.p ** bt:
                raise ValueError(f"induced map not well defined at ({i}, {k})")
    return InducedMap(source, target, M)


def map_on_cohomology(cmap, n: int, source: CohomologyResult, target: CohomologyResult,
                      check_chain: bool = True) -> InducedMap:
    """Induced map in degree n of a CochainMap (chain property checked exactly)."""
    if check_chain:
        cmap.check([n])
    tnext = cmap.target.matrix(n + cmap.shift)
    return induced_map(cmap.matrix(n), source, target, tnext)


# -- submodules of a cyclic decomposition --------------------------------------

def span_order_log(G: np.ndarray, exps: Sequence[int], p: int, s: int) -> int:
    """log_p of the order of the span of the columns of G inside sum Z/p^{exps}."""
    k = len(exps)
    if k == 0:
        return 0
    q = p ** s
    D = np.diag([p ** b % q for b in exps]).astype(np.int64)
    rel = np.concatenate([np.asarray(G, dtype=np.int64).reshape(k, -1) % q, D], axis=1)
    snf = local_snf(rel, p, s)
    coker = s * (k - len(snf.pivots)) + sum(v for _, _, v in snf.pivots)
    return int(sum(exps)) - coker


def submodule_type(G: np.ndarray, exps: Sequence[int], p: int, s: int) -> list[int]:
    """Cyclic type (descending exponents) of the span of G in sum Z/p^{exps}."""
    n = [span_order_log((p ** j) * np.asarray(G, dtype=np.int64), exps, p, s) for j in range(s + 2)]
    counts = [n[j] - n[j + 1] for j in range(s + 1)]  # #factors with exponent > j
    out = []
    for j in range(s):
        c = counts[j] - counts[j + 1]
        out += [j + 1] * c
    return sorted(out, reverse=True)


def image_order_log(f: InducedMap) -> int:
    return span_order_log(f.matrix, f.target.exponents, f.target.p, f.target.s)


def image_type(f: InducedMap) -> list[int]:
    return submodule_type(f.matrix, f.target.exponents, f.target.p, f.target.s)


def kernel_order_log(f: InducedMap) -> int:
    return f.source.order_log - image_order_log(f)


# -- formatting ------------------------------------------------------------------

def format_module(exps: Sequence[int], p: int) -> str:
    """'0', 'Z/4', 'Z/4 + (Z/2)^2' ..."""
    if not exps:
        return "0"
    parts = []
    for b in sorted(set(exps), reverse=True):
        c = list(exps).count(b)
        base = f"Z/{p ** b}"
        parts.append(base if c == 1 else f"({base})^{c}")
    return " + ".join(parts)


def format_zp_module(free: int, torsion: Sequence[int], p: int) -> str:
    parts = []
    if free:
        parts.append(f"Z_{p}" if free == 1 else f"Z_{p}^{free}")
    if torsion:
        parts.append(format_module(torsion, p))
    return " + ".join(parts) if parts else "0"
