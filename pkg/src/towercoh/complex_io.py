"""Plain-text complex descriptions.

Grammar (one statement per line, ``#`` starts a comment)::

    vertices 3              # or: vertices v0 v1 v2  (names)
    dim 1                   # cells of dimension 1 follow
    e01: v0 v1 ...          # optional "name:" then the n+1 faces, by index or name
    dim 2
    T: e12 e02 e01
    subcomplex boundary     # optional name, default "default"
    0: v0 v1                # cells of the subcomplex by dimension
    1: a b

Faces are listed opposite vertex 0, 1, ..., n as usual.  Dimension blocks must
appear in increasing order starting from 1.
"""
from __future__ import annotations

from pathlib import Path

from .complexes import ComplexError, DeltaComplex, Subcomplex


class ComplexParseError(ComplexError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}", (line,))
        self.line = line


def parse_complex(text: str) -> DeltaComplex:
    """Parse the text format; named subcomplexes go to ``meta['subcomplexes']``."""
    names: list[list[str]] = []
    faces: list[list[tuple]] = []
    subs: dict = {}
    mode, current_dim, current_sub = None, 0, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "vertices":
            if names:
                raise ComplexParseError("vertices declared twice", lineno)
            toks = rest.split()
            if len(toks) == 1 and toks[0].isdigit():
                names.append([f"v{i}" for i in range(int(toks[0]))])
            elif toks:
                names.append(toks)
            else:
                raise ComplexParseError("vertices needs a count or names", lineno)
            mode = "cells"
            continue
        if head == "dim":
            if not names:
                raise ComplexParseError("dim block before vertices", lineno)
            try:
                n = int(rest)
            except ValueError:
                raise ComplexParseError(f"bad dimension {rest!r}", lineno) from None
            if n != len(names):
                raise ComplexParseError(f"expected dim {len(names)}, got dim {n}", lineno)
            names.append([])
            faces.append([])
            current_dim, mode = n, "cells"
            continue
        if head == "subcomplex":
            current_sub = rest or "default"
            subs[current_sub] = []
            mode = "sub"
            continue
        if mode == "cells" and current_dim >= 1:
            label, sep, body = line.partition(":")
            if not sep:
                label, body = f"c{current_dim}_{len(names[current_dim])}", line
            label = label.strip()
            toks = body.split()
            if len(toks) != current_dim + 1:
                raise ComplexParseError(f"{current_dim}-cell {label!r} needs {current_dim + 1} faces, "
                                        f"got {len(toks)}", lineno)
            refs = tuple(_resolve(t, names[current_dim - 1], lineno) for t in toks)
            if label in names[current_dim]:
                raise ComplexParseError(f"duplicate cell name {label!r}", lineno)
            names[current_dim].append(label)
            faces[current_dim - 1].append(refs)
            continue
        if mode == "sub":
            d, sep, body = line.partition(":")
            if not sep or not d.strip().isdigit():
                raise ComplexParseError("subcomplex lines look like 'n: cells...'", lineno)
            n = int(d)
            if n >= len(names):
                raise ComplexParseError(f"subcomplex dimension {n} has no cells", lineno)
            sel = subs[current_sub]
            while len(sel) <= n:
                sel.append([])
            sel[n].extend(_resolve(t, names[n], lineno) for t in body.split())
            continue
        raise ComplexParseError(f"unexpected line {line!r}", lineno)
    if not names:
        raise ComplexParseError("no vertices declared", 1)
    cx = DeltaComplex(len(names[0]), faces, names)
    checked = {}
    for name, sel in subs.items():
        try:
            Subcomplex(cx, sel)
        except ComplexError as exc:
            raise ComplexError(f"subcomplex {name!r}: {exc}", exc.location) from None
        checked[name] = sel
    cx.meta["subcomplexes"] = checked
    return cx


def _resolve(token: str, names: list[str], lineno: int) -> int:
    if token in names:
        return names.index(token)
    if token.lstrip("-").isdigit():
        i = int(token)
        if not 0 <= i < len(names):
            raise ComplexParseError(f"face reference {i} out of range (have {len(names)} cells)", lineno)
        return i
    raise ComplexParseError(f"unknown cell {token!r}", lineno)


def load_complex(path: str | Path) -> DeltaComplex:
    return parse_complex(Path(path).read_text())


def format_complex(cx: DeltaComplex, subcomplexes: dict | None = None) -> str:
    """Inverse of :func:`parse_complex` (names are written out)."""
    lines = ["vertices " + " ".join(cx.names[0])]
    for n in range(1, len(cx.cells_per_dim)):
        lines.append(f"dim {n}")
        for c in range(cx.count(n)):
            lines.append(f"{cx.name(n, c)}: " + " ".join(cx.name(n - 1, f) for f in cx.cell_faces(n, c)))
    subs = subcomplexes if subcomplexes is not None else cx.meta.get("subcomplexes", {})
    for name, sel in subs.items():
        lines.append(f"subcomplex {name}")
        for n, cells in enumerate(sel):
            if cells:
                lines.append(f"{n}: " + " ".join(cx.name(n, c) for c in sorted(cells)))
    return "\n".join(lines) + "\n"
