"""Independent reference computations used to freeze expected values.

Nothing here calls the package's linear algebra: module types come from
exhaustive enumeration of cochains, integer Smith forms from sympy, group
facts from explicit unipotent matrices.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def _vectors(n: int, q: int):
    for t in itertools.product(range(q), repeat=n):
        yield np.array(t, dtype=np.int64)


def _image(A: np.ndarray, q: int) -> set:
    n_out, n_in = A.shape
    if n_in == 0:
        return {tuple([0] * n_out)}
    return {tuple(A.dot(v) % q) for v in _vectors(n_in, q)}


def _kernel(B: np.ndarray, n: int, q: int) -> list:
    if B.shape[0] == 0:
        return [v for v in _vectors(n, q)]
    return [v for v in _vectors(n, q) if not (B.dot(v) % q).any()]


def brute_type(A: np.ndarray, B: np.ndarray, n: int, p: int, s: int) -> list[int]:
    """Exponents of ker B / im A over Z/p^s, by enumerating all cochains.

    Uses |p^k H| = p^{sum max(e_i - k, 0)}: the number of factors with
    exponent > k is the drop in log order from p^k H to p^{k+1} H.
    """
    q = p ** s
    ker = _kernel(B % q, n, q)
    im = _image(A % q, q)
    logs = []
    for k in range(s + 1):
        mult = {tuple((p ** k) * v % q) for v in ker}
        span = {tuple((np.array(a) + np.array(b)) % q) for a in mult for b in im}
        logs.append(round(math.log(len(span) // len(im), p)))
    counts = [logs[k] - logs[k + 1] for k in range(s)]  # #factors with exponent > k
    exps = []
    for k in range(s - 1, -1, -1):
        more = counts[k] - (counts[k + 1] if k + 1 < s else 0)
        exps += [k + 1] * more
    return sorted(exps, reverse=True)


def brute_complex_types(cx, s: int) -> list[list[int]]:
    """Types of every cohomology group of a TwistedCochainComplex by enumeration."""
    out = []
    for n in range(cx.top + 1):
        A = cx.integer_matrix(n - 1) if n >= 1 else np.zeros((cx.rank(0), 0), dtype=np.int64)
        B = cx.integer_matrix(n) if n < cx.top else np.zeros((0, cx.rank(n)), dtype=np.int64)
        out.append(brute_type(np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64), cx.rank(n), cx.p, s))
    return out


def sympy_snf_diagonal(M) -> list[int]:
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import smith_normal_form

    M = Matrix(M)
    if M.rows == 0 or M.cols == 0:
        return []
    D = smith_normal_form(M, domain=ZZ)
    diag = [abs(int(D[i, i])) for i in range(min(D.shape))]
    return [d for d in diag if d != 0]


def heis_matrix(a: int, b: int, c: int, q: int) -> np.ndarray:
    return np.array([[1, a, c], [0, 1, b], [0, 0, 1]], dtype=np.int64) % q


def matrix_closure(gens: list[np.ndarray], q: int) -> set:
    """Subgroup generated by unipotent matrices mod q, by repeated multiplication."""
    ident = np.eye(3, dtype=np.int64)
    seen = {ident.tobytes(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x.dot(g) % q
                key = y.tobytes()
                if key not in seen:
                    seen[key] = y
                    nxt.append(y)
        frontier = nxt
    return {(int(m[0, 1]), int(m[1, 2]), int(m[0, 2])) for m in seen.values()}


def cover_vertex_components(cover) -> int:
    """Connected components of the 1-skeleton of a cover complex (via networkx)."""
    import networkx as nx

    cx = cover.complex
    G = nx.MultiGraph()
    G.add_nodes_from(range(cx.count(0)))
    for e in range(cx.count(1)):
        a, b = cx.cell_faces(1, e)
        G.add_edge(a, b)
    return nx.number_connected_components(G)
