"""Run the checks requested by a job config and collect a report.

Exit codes: 0 all checks passed, 1 some check failed, 2 invalid input.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import limits
from .cech import cech_cohomology
from .complexes import ComplexError, barycentric_subdivision, is_strict_simplicial
from .config import ConfigError, JobConfig, load_config, parse_config  # noqa: F401
from .catalog import build_builtin
from .groups import TowerError, closure_of, quotient_element, quotient_tower
from .local_systems import ChainMapError, DescriptorError, cellular_complex, cover_of, make_descriptor, twisted_complex
from .smith import SparseMatrix, cohomology, format_module

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID = 0, 1, 2
INPUT_ERRORS = (ConfigError, ComplexError, DescriptorError, TowerError)


@dataclass
class CheckResult:
    name: str
    ok: bool
    data: dict
    seconds: float = 0.0
    error: str | None = None


@dataclass
class RunReport:
    name: str
    checks: dict = field(default_factory=dict)  # name -> CheckResult
    digest: str = ""
    exit_code: int = EXIT_OK
    summary: list = field(default_factory=list)

    def numeric(self) -> dict:
        """Everything that enters the determinism hash (no timings)."""
        return {k: {"ok": c.ok, "data": c.data, "error": c.error} for k, c in sorted(self.checks.items())}

    def to_dict(self) -> dict:
        return {"name": self.name, "exit_code": self.exit_code, "hash": self.digest,
                "checks": self.numeric(),
                "timings": {k: round(c.seconds, 4) for k, c in sorted(self.checks.items())}}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def report_hash(numeric: dict) -> str:
    blob = json.dumps(_jsonable(numeric), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- individual checks --------------------------------------------------------------

def _expectations(cfg: JobConfig, rep: limits.CompletedReport, prefix: str = "degree") -> tuple[bool, list]:
    expect = cfg.sections.get("expect", {})
    problems = []
    for key, want in expect.items():
        if not key.startswith(prefix + "."):
            continue
        n = int(key.split(".", 1)[1])
        got = rep.degrees[n].reconstruction(rep.p) if n in rep.degrees else "missing"
        if got != want.strip():
            problems.append(f"degree {n}: expected {want.strip()}, got {got}")
    return not problems, problems


def check_colimit(cfg: JobConfig) -> tuple[bool, dict]:
    out = {}
    for n in cfg.degrees:
        c = limits.colimit(cfg.descriptor, cfg.subcomplex, n, cfg.max_s, cfg.max_r, strict=cfg.strict)
        out[str(n)] = c.to_dict()
    return True, out


def check_completed(cfg: JobConfig) -> tuple[bool, dict]:
    rep = limits.completed_cohomology(cfg.descriptor, cfg.subcomplex, cfg.degrees, cfg.max_s, cfg.max_r,
                                      jobs=cfg.jobs, strict=cfg.strict)
    ok, problems = _expectations(cfg, rep)
    data = rep.to_dict()
    data["expectation_failures"] = problems
    return ok, data


def check_les(cfg: JobConfig) -> tuple[bool, dict]:
    if cfg.subcomplex is None:
        raise ConfigError("the les check needs [complex] subcomplex", field="complex.subcomplex")
    rep = limits.les_check(cfg.descriptor, cfg.subcomplex, cfg.degrees, cfg.max_s, cfg.max_r, jobs=cfg.jobs)
    ok, problems = _expectations(cfg, rep.relative, "les")
    data = rep.to_dict()
    data["expectation_failures"] = problems
    return rep.exact and ok, data


def check_excise(cfg: JobConfig) -> tuple[bool, dict]:
    sec = cfg.sections.get("excise", {})
    levels = [int(t) for t in sec.get("levels", " ".join(map(str, range(1, cfg.max_r + 1)))).split()]
    precisions = [int(t) for t in sec.get("precisions", "1").split()]
    triples = [(n, r, s) for n in cfg.degrees for r in levels for s in precisions]
    rep = limits.excise_reduce(cfg.descriptor, triples)
    return rep.ok, rep.to_dict()


def _parse_elements(tower, text: str) -> list:
    return [tower.element([int(t) for t in part.split()]) for part in text.split(";") if part.strip()]


def check_nilpotent(cfg: JobConfig) -> tuple[bool, dict]:
    sec = cfg.sections.get("nilpotent", {})
    if "normal" not in sec or "base" not in sec:
        raise ConfigError("[nilpotent] needs normal and base", field="nilpotent")
    tower = cfg.tower
    normal = closure_of(_parse_elements(tower, sec["normal"]), tower)
    qt = quotient_tower(tower, normal)
    base = build_builtin(sec["base"].strip())
    labels = {}
    for part in sec.get("base_labels", "").split(";"):
        if part.strip():
            edge, _, vec = part.partition(":")
            labels[edge.strip()] = quotient_element(qt, tower.element([int(t) for t in vec.split()]))
    qdesc = make_descriptor(base, qt, labels)
    verdict = limits.nilpotent_collapse_check(cfg.descriptor, normal, qdesc, cfg.degrees, cfg.max_s,
                                              cfg.max_r, jobs=cfg.jobs)
    return verdict.equal, verdict.to_dict()


def check_defect(cfg: JobConfig) -> tuple[bool, dict]:
    rep = limits.defect_estimate(cfg.descriptor, cfg.max_s, cfg.max_r, jobs=cfg.jobs)
    ok = rep.consistent is not False or rep.lower_bound
    want = cfg.sections.get("expect", {}).get("defect")
    if want is not None and int(want) != rep.defect:
        ok = False
    return ok, rep.to_dict()


def check_cech(cfg: JobConfig) -> tuple[bool, dict]:
    sec = cfg.sections.get("cech", {})
    cx, rel = cfg.complex, cfg.subcomplex
    rounds = 0
    if not is_strict_simplicial(cx).ok:
        rounds = int(sec.get("subdivide", 2))
    sd, sd_rel = cx, rel
    for _ in range(rounds):
        sd, sd_rel = barycentric_subdivision(sd, sd_rel)
    rows, ok = [], True
    p = cfg.tower.p
    for s in range(1, cfg.max_s + 1):
        for label, r_orig, r_sd in (("absolute", None, None), ("relative", rel, sd_rel)):
            if label == "relative" and rel is None:
                continue
            cc = cellular_complex(cx, p, s, r_orig)
            cell = [cohomology(cc, n).exponents for n in range(cx.dim + 1)]
            cech = [h.exponents for h in cech_cohomology(sd, p, s, r_sd)]
            good = cell == cech
            ok &= good
            rows.append({"s": s, "kind": label, "cellular": cell, "cech": cech, "ok": good})
    return ok, {"subdivisions": rounds, "cells": list(sd.cells_per_dim), "comparisons": rows}


def check_shapiro(cfg: JobConfig) -> tuple[bool, dict]:
    sec = cfg.sections.get("shapiro", {})
    r_max = min(int(sec.get("max_r", 1)), cfg.max_r)
    rows, ok = [], True
    desc = cfg.descriptor
    p = cfg.tower.p
    for r in range(r_max + 1):
        cover = cover_of(desc, r).complex
        for s in range(1, cfg.max_s + 1):
            tw = twisted_complex(desc, None, r, s)
            cc = cellular_complex(cover, p, s)
            a = [cohomology(tw, n).exponents for n in range(tw.top + 1)]
            b = [cohomology(cc, n).exponents for n in range(cc.top + 1)]
            good = a == b
            ok &= good
            rows.append({"r": r, "s": s, "twisted": a, "cover": b, "ok": good})
    return ok, {"comparisons": rows}


def check_transfer(cfg: JobConfig) -> tuple[bool, dict]:
    sec = cfg.sections.get("transfer", {})
    s = int(sec.get("s", max(2, cfg.max_s)))
    R = int(sec.get("max_r", cfg.max_r))
    rep = limits.top_degree_transfer(cfg.descriptor, s, R, rel=cfg.subcomplex)
    return rep.ok, rep.to_dict()


CHECKS = {
    "colimit": check_colimit,
    "completed": check_completed,
    "les": check_les,
    "excise": check_excise,
    "nilpotent_collapse": check_nilpotent,
    "defect": check_defect,
    "cech": check_cech,
    "shapiro": check_shapiro,
    "transfer": check_transfer,
}


def emit_matrices(cfg: JobConfig, directory: str | Path) -> list[str]:
    """Write every coboundary of the (r, s) grid in the sparse triplet format."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for s in range(1, cfg.max_s + 1):
        for r in range(cfg.max_r + 1):
            cx = twisted_complex(cfg.descriptor, cfg.subcomplex, r, s)
            for n in range(cx.top):
                path = directory / f"d{n}_r{r}_s{s}.txt"
                path.write_text(SparseMatrix.from_dense(cx.matrix(n), cx.modulus).dumps())
                written.append(str(path))
    return written


def run(cfg: JobConfig) -> RunReport:
    report = RunReport(cfg.name)
    for name in cfg.checks:
        t0 = time.perf_counter()
        try:
            ok, data = CHECKS[name](cfg)
            res = CheckResult(name, bool(ok), _jsonable(data))
        except INPUT_ERRORS:
            raise
        except (limits.StabilizationError, ChainMapError, ValueError) as exc:
            dump = getattr(exc, "dump", None)
            res = CheckResult(name, False, _jsonable({"dump": dump} if dump else {}), error=str(exc))
        res.seconds = time.perf_counter() - t0
        report.checks[name] = res
    report.digest = report_hash(report.numeric())
    report.exit_code = EXIT_OK if all(c.ok for c in report.checks.values()) else EXIT_CHECK_FAILED
    report.summary = summarize(cfg, report)
    return report


def summarize(cfg: JobConfig, report: RunReport) -> list[str]:
    lines = [f"job {cfg.name}: complex cells {list(cfg.complex.cells_per_dim)}, "
             f"tower {cfg.tower.describe()}, S={cfg.max_s}, R={cfg.max_r}"]
    for name, c in report.checks.items():
        status = "ok" if c.ok else "FAILED"
        lines.append(f"  [{status}] {name} ({c.seconds:.2f}s)" + (f": {c.error}" if c.error else ""))
        data = c.data
        if name in ("completed",) and "degrees" in data:
            p = data["p"]
            for n, d in data["degrees"].items():
                per_s = ", ".join(
                    f"s={s}: {format_module(v['value'], p) if v['flag'] == 'certified' else 'not stabilized'}"
                    for s, v in d["per_s"].items())
                cert = "certified" if d["certified"] else "not certified"
                lines.append(f"      H^{n} = {d['reconstruction']['text']:<12} {cert:<14} ({per_s})")
        if name == "les":
            lines.append(f"      exact at every level: {data['exact']}")
            for n, d in data["relative"]["degrees"].items():
                lines.append(f"      H^{n}_c = {d['reconstruction']['text']}")
        if name == "defect":
            lines.append(f"      defect {data['defect']}{' (lower bound)' if data['lower_bound'] else ''}, "
                         f"algebraic kernel rank {data['algebraic_kernel_rank']}")
        for key in ("checks", "comparisons", "steps"):
            if key in data and isinstance(data[key], list):
                bad = [row for row in data[key] if isinstance(row, dict) and not row.get("ok", row.get("equal", True))]
                lines.append(f"      {len(data[key]) - len(bad)}/{len(data[key])} {key} passed")
    lines.append(f"  hash {report.digest}")
    return lines


# -- bundled examples ----------------------------------------------------------------

def _data_dir():
    return resources.files("towercoh") / "data"


def list_builtin_examples() -> dict:
    """Bundled config name -> one-line description (first comment line of the file)."""
    out = {}
    for entry in sorted(_data_dir().iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".job"):
            first = entry.read_text().splitlines()[0]
            out[entry.name[:-4]] = first.lstrip("# ").strip()
    return out


def builtin_config_path(name: str) -> Path:
    path = Path(str(_data_dir() / f"{name}.job"))
    if not path.exists():
        raise ConfigError(f"no bundled config named {name!r}")
    return path


def load_job(spec: str) -> JobConfig:
    """A path to a config file, or the name of a bundled config."""
    path = Path(spec)
    if path.exists():
        return load_config(path)
    if spec in list_builtin_examples():
        return load_config(builtin_config_path(spec))
    raise ConfigError(f"config {spec!r} is neither a file nor a bundled example")


__all__ = ["run", "RunReport", "CheckResult", "list_builtin_examples", "load_job", "parse_config",
           "report_hash", "emit_matrices", "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_INVALID"]
