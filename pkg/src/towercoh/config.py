"""Job configuration files.

A job file is INI-style (parsed with :mod:`configparser`)::

    [complex]
    builtin = torus            # or: file = shapes/annulus.txt, or: cells = <indented text>
    subcomplex = boundary      # named subcomplex of the complex, or inline "0: v0; 1: a"

    [tower]
    kind = abelian             # abelian | heisenberg | custom
    rank = 2
    p = 2
    depth = 4                  # defaults to [job] max_r
    tables = groups.json       # custom towers only

    [descriptor]
    preset = full              # preset labels shipped with a built-in complex
    a = 1 0                    # any other key names an edge; unlisted edges are the identity

    [job]
    degrees = 0 1 2
    max_s = 2
    max_r = 4
    checks = completed, les
    jobs = 1

Optional sections: [expect] (``degree.N = Z_2`` etc.), [excise], [nilpotent],
[cech], [shapiro], [transfer].  Errors carry the line and field involved.
"""
from __future__ import annotations

import configparser
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import BUILTIN_COMPLEXES, build_builtin
from .complex_io import parse_complex, load_complex
from .complexes import ComplexError, DeltaComplex, Subcomplex
from .groups import (GroupTower, TowerError, make_abelian_tower, make_custom_tower,
                     make_heisenberg_tower)
from .local_systems import DescriptorError, FlatDescriptor, make_descriptor

KNOWN_CHECKS = ("colimit", "completed", "les", "excise", "nilpotent_collapse", "defect", "cech",
                "shapiro", "transfer")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


@dataclass
class JobConfig:
    name: str
    complex: DeltaComplex
    subcomplex: Subcomplex | None
    tower: GroupTower
    descriptor: FlatDescriptor
    degrees: list
    max_s: int
    max_r: int
    checks: list
    jobs: int = 1
    out: str | None = None
    emit_matrices: str | None = None
    strict: bool = False
    sections: dict = field(default_factory=dict)  # raw optional sections
    source: str | None = None


def _line_index(text: str) -> dict:
    """(section, key) -> line number, for error messages."""
    out, section = {}, None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            out[(section, None)] = i
            continue
        if section and line and not line.startswith(("#", ";")) and not raw[:1].isspace():
            key = re.split(r"[=:]", line, 1)[0].strip()
            out[(section, key)] = i
    return out


def _ints(value: str) -> list[int]:
    return [int(t) for t in value.replace(",", " ").split()]


def parse_config(text: str, base_dir: str | Path = ".", name: str = "job") -> JobConfig:
    lines = _line_index(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str  # edge names are case sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None
    base_dir = Path(base_dir)

    def where(section, key=None):
        return lines.get((section, key), lines.get((section, None)))

    def get(section, key, default=None, required=False):
        if parser.has_option(section, key):
            return parser.get(section, key)
        if required:
            raise ConfigError(f"missing [{section}] {key}", where(section), f"{section}.{key}")
        return default

    def get_int(section, key, default=None, required=False):
        value = get(section, key, default, required)
        if value is None:
            return None
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"expected an integer, got {value!r}", where(section, key),
                              f"{section}.{key}") from None

    for sec in ("complex", "tower", "job"):
        if not parser.has_section(sec):
            raise ConfigError(f"missing section [{sec}]")

    # complex
    sources = [k for k in ("builtin", "file", "cells") if parser.has_option("complex", k)]
    if len(sources) != 1:
        raise ConfigError("give exactly one of builtin, file, cells", where("complex"), "complex")
    src = sources[0]
    try:
        if src == "builtin":
            key = get("complex", "builtin").strip()
            if key not in BUILTIN_COMPLEXES:
                raise ConfigError(f"unknown built-in complex {key!r}", where("complex", "builtin"),
                                  "complex.builtin")
            cx = build_builtin(key)
        elif src == "file":
            path = base_dir / get("complex", "file").strip()
            if not path.exists():
                raise ConfigError(f"complex file {path} not found", where("complex", "file"), "complex.file")
            cx = load_complex(path)
        else:
            cx = parse_complex(get("complex", "cells"))
    except ComplexError as exc:
        raise ConfigError(f"invalid complex: {exc}", where("complex", src), f"complex.{src}") from None

    sub = None
    sub_spec = get("complex", "subcomplex")
    if sub_spec:
        sub_spec = sub_spec.strip()
        named = cx.meta.get("subcomplexes", {})
        try:
            if sub_spec in named:
                sub = Subcomplex(cx, named[sub_spec])
            else:
                sel = []
                for part in sub_spec.split(";"):
                    d, sep, body = part.partition(":")
                    if not sep:
                        raise ConfigError(f"unknown subcomplex {sub_spec!r}", where("complex", "subcomplex"),
                                          "complex.subcomplex")
                    d = int(d)
                    while len(sel) <= d:
                        sel.append([])
                    for tok in body.split():
                        sel[d].append(int(tok) if tok.isdigit() else cx.cell_index(d, tok))
                sub = Subcomplex(cx, sel)
        except (ComplexError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid subcomplex: {exc}", where("complex", "subcomplex"),
                              "complex.subcomplex") from None

    # job
    max_s = get_int("job", "max_s", 1)
    max_r = get_int("job", "max_r", 1)
    if max_s < 1 or max_r < 1:
        raise ConfigError("max_s and max_r must be at least 1", where("job"), "job.max_s/max_r")
    deg_text = get("job", "degrees")
    degrees = _ints(deg_text) if deg_text else list(range(cx.dim + 1))
    for n in degrees:
        if not 0 <= n <= max(cx.dim, 0):
            raise ConfigError(f"degree {n} outside 0..{cx.dim}", where("job", "degrees"), "job.degrees")
    checks = [c.strip() for c in get("job", "checks", "completed").replace(",", " ").split()]
    for c in checks:
        if c not in KNOWN_CHECKS:
            raise ConfigError(f"unknown check {c!r} (known: {', '.join(KNOWN_CHECKS)})",
                              where("job", "checks"), "job.checks")
    jobs = get_int("job", "jobs", 1)
    strict = parser.getboolean("job", "strict", fallback=False)

    # tower
    kind = get("tower", "kind", required=True).strip()
    p = get_int("tower", "p", 2)
    depth = get_int("tower", "depth", max_r)
    try:
        if kind == "abelian":
            tower = make_abelian_tower(get_int("tower", "rank", 1), p, depth)
        elif kind == "heisenberg":
            tower = make_heisenberg_tower(p, depth)
        elif kind == "custom":
            tpath = base_dir / get("tower", "tables", required=True).strip()
            if not tpath.exists():
                raise ConfigError(f"tables file {tpath} not found", where("tower", "tables"), "tower.tables")
            data = json.loads(tpath.read_text())
            tower = make_custom_tower(int(data.get("p", p)), data["levels"], data["projections"])
        else:
            raise ConfigError(f"unknown tower kind {kind!r}", where("tower", "kind"), "tower.kind")
    except TowerError as exc:
        raise ConfigError(f"invalid tower: {exc}", where("tower"), "tower") from None
    if max_r > tower.depth:
        raise ConfigError(f"max_r={max_r} exceeds tower depth {tower.depth}", where("job", "max_r"), "job.max_r")

    # descriptor
    labels: dict = {}
    if parser.has_section("descriptor"):
        preset = get("descriptor", "preset")
        if preset:
            presets = cx.meta.get("labels", {})
            if preset.strip() not in presets:
                raise ConfigError(f"unknown preset {preset!r} (have {sorted(presets)})",
                                  where("descriptor", "preset"), "descriptor.preset")
            labels.update(presets[preset.strip()])
        for key in parser.options("descriptor"):
            if key == "preset":
                continue
            if cx.dim < 1 or key not in cx.names[1]:
                raise ConfigError(f"no edge named {key!r}", where("descriptor", key), f"descriptor.{key}")
            value = get("descriptor", key)
            try:
                labels[key] = _ints(value) if kind != "custom" else int(value)
            except ValueError:
                raise ConfigError(f"bad label {value!r}", where("descriptor", key), f"descriptor.{key}") from None
    try:
        desc = make_descriptor(cx, tower, labels)
    except DescriptorError as exc:
        raise ConfigError(f"invalid descriptor: {exc}", where("descriptor"), "descriptor") from None

    sections = {s: dict(parser.items(s)) for s in parser.sections()
                if s in ("expect", "excise", "nilpotent", "cech", "shapiro", "transfer")}
    return JobConfig(name=name, complex=cx, subcomplex=sub, tower=tower, descriptor=desc, degrees=degrees,
                     max_s=max_s, max_r=max_r, checks=checks, jobs=jobs, out=get("job", "out"),
                     strict=strict, sections=sections)


def load_config(path: str | Path) -> JobConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    cfg = parse_config(path.read_text(), path.parent, path.stem)
    cfg.source = str(path)
    return cfg
