"""Run configuration: JSON schema validation and suite dispatch.

A config is a single JSON document; unknown keys are rejected everywhere.
Determinism contract: identical config + seed produce byte-identical CSV
bodies, with timestamps confined to the manifest.
"""

from __future__ import annotations

import json
import math
import platform
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigInvalid, LabError
from .operators import Operator, operator_from_json
from .registry import make as registry_make
from .spaces import SpaceSpec
from .suites import (SuiteReport, g_function_experiment, g_function_sweep,
                     hinfty_bound_estimate, log_bridge_suite,
                     sector_equivalence_suite, square_function_comparison,
                     strip_group_suite, torus_laplacian)

_P_SCHEMA = {"oneOf": [{"type": "number", "minimum": 1},
                       {"type": "string", "enum": ["inf"]},
                       {"type": "null"}]}

_SPACE_SCHEMA = {"type": "object", "additionalProperties": False,
                 "properties": {"p": _P_SCHEMA, "n": {"type": "integer",
                                                      "minimum": 1}},
                 "required": ["p"]}

_HFUN_SCHEMA = {"type": "object", "additionalProperties": False,
                "properties": {"name": {"type": "string"},
                               "params": {"type": "object"}},
                "required": ["name"]}

_SUITE_PARAMS = {
    "sector_equivalence": {"omega": {"type": "number"}, "sigma": {"type": "number"},
                           "budget": {"type": "integer", "minimum": 100},
                           "pack_size": {"type": "integer", "minimum": 1},
                           "n_vectors": {"type": "integer", "minimum": 1},
                           "per_decade": {"type": "integer", "minimum": 8}},
    "strip_group": {"width": {"type": "number", "exclusiveMinimum": 0},
                    "hinf_width": {"type": "number", "exclusiveMinimum": 0},
                    "budget": {"type": "integer", "minimum": 100},
                    "pack_size": {"type": "integer", "minimum": 1},
                    "n_vectors": {"type": "integer", "minimum": 1},
                    "per_decade": {"type": "integer", "minimum": 8}},
    "square_function_comparison": {"psi": _HFUN_SCHEMA, "phi": _HFUN_SCHEMA,
                                   "budget": {"type": "integer", "minimum": 100},
                                   "n_vectors": {"type": "integer", "minimum": 1},
                                   "per_decade": {"type": "integer", "minimum": 8}},
    "g_function": {"size": {"type": "integer", "minimum": 2},
                   "sizes": {"type": "array",
                             "items": {"type": "integer", "minimum": 2}},
                   "p": _P_SCHEMA, "beta": {"type": "number",
                                            "exclusiveMinimum": 0},
                   "semigroup": {"type": "string", "enum": ["heat", "poisson"]},
                   "budget": {"type": "integer", "minimum": 100}},
    "log_bridge": {"width": {"type": "number", "exclusiveMinimum": 0},
                   "budget": {"type": "integer", "minimum": 100},
                   "per_decade": {"type": "integer", "minimum": 8}},
    "hinfty_bound": {"domain": {"type": "string", "enum": ["sector", "strip"]},
                     "domain_param": {"type": "number", "exclusiveMinimum": 0},
                     "pack_size": {"type": "integer", "minimum": 1},
                     "per_decade": {"type": "integer", "minimum": 8}},
}


def _suite_entry_schema(name: str, params: dict) -> dict:
    return {"type": "object", "additionalProperties": False,
            "properties": {"suite": {"const": name},
                           "operator": {"type": "string"},
                           "space": _SPACE_SCHEMA,
                           "params": {"type": "object",
                                      "additionalProperties": False,
                                      "properties": params}},
            "required": ["suite"]}


CONFIG_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "operators": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "properties": {"name": {"type": "string"},
                           "matrix": {"type": "object"},
                           "file": {"type": "string"},
                           "torus_laplacian": {"type": "integer", "minimum": 2}},
            "required": ["name"]}},
        "suites": {"type": "array", "items": {
            "oneOf": [_suite_entry_schema(k, v) for k, v in _SUITE_PARAMS.items()]}},
    },
    "required": ["suites"],
}


def validate_config(doc: dict) -> dict:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: "
                f"{e.message}" for e in errors[:8]]
        raise ConfigInvalid("configuration failed schema validation", msgs)
    names = [op["name"] for op in doc.get("operators", [])]
    if len(set(names)) != len(names):
        raise ConfigInvalid("duplicate operator names", names)
    for op in doc.get("operators", []):
        if sum(k in op for k in ("matrix", "file", "torus_laplacian")) != 1:
            raise ConfigInvalid(
                f"operator {op['name']!r} needs exactly one of "
                "matrix/file/torus_laplacian")
    return doc


def _space_from(doc: dict | None, default_n: int) -> SpaceSpec:
    if doc is None:
        return SpaceSpec(p=2, n=default_n)
    p = doc["p"]
    p = math.inf if p in (None, "inf") else float(p)
    return SpaceSpec(p=p, n=int(doc.get("n", default_n)))


def _build_operators(doc: dict, base_dir: Path) -> dict:
    ops = {}
    for entry in doc.get("operators", []):
        try:
            if "matrix" in entry:
                ops[entry["name"]] = operator_from_json(entry["matrix"])
            elif "torus_laplacian" in entry:
                ops[entry["name"]] = torus_laplacian(entry["torus_laplacian"])
            else:
                with open(base_dir / entry["file"]) as fh:
                    ops[entry["name"]] = operator_from_json(json.load(fh))
        except (ValueError, OSError, KeyError) as exc:
            raise ConfigInvalid(f"operator {entry['name']!r}: {exc}") from exc
    return ops


def _get_operator(ops: dict, entry: dict) -> Operator:
    name = entry.get("operator")
    if name is None:
        raise ConfigInvalid(f"suite {entry['suite']!r} needs an operator")
    if name not in ops:
        raise ConfigInvalid(f"unknown operator {name!r}")
    return ops[name]


def dispatch_suite(entry: dict, ops: dict, seed: int) -> SuiteReport:
    kind = entry["suite"]
    params = dict(entry.get("params", {}))
    if kind == "g_function":
        p = params.pop("p", 2)
        p = math.inf if p in (None, "inf") else float(p)
        beta = params.pop("beta", 1.0)
        semi = params.pop("semigroup", "heat")
        budget = params.pop("budget", 4000)
        if "sizes" in params:
            return g_function_sweep(params.pop("sizes"), p, beta, semi,
                                    seed=seed, budget=budget)
        return g_function_experiment(params.pop("size"), p, beta, semi,
                                     seed=seed, budget=budget)
    op = _get_operator(ops, entry)
    space = _space_from(entry.get("space"), op.dim)
    if space.n != op.dim:
        raise ConfigInvalid(f"space dimension {space.n} does not match "
                            f"operator dim {op.dim}")
    if kind == "sector_equivalence":
        omega = params.pop("omega", math.pi)
        sigma = params.pop("sigma", math.pi / 2)
        return sector_equivalence_suite(op, space, omega, sigma, seed=seed,
                                        **params)
    if kind == "strip_group":
        width = params.pop("width")
        return strip_group_suite(op, space, width, seed=seed, **params)
    if kind == "square_function_comparison":
        psi = registry_make(params.pop("psi")["name"],
                            **entry["params"]["psi"].get("params", {}))
        phi = registry_make(params.pop("phi")["name"],
                            **entry["params"]["phi"].get("params", {}))
        return square_function_comparison(op, psi, phi, space, seed=seed,
                                          **params)
    if kind == "log_bridge":
        return log_bridge_suite(op, space, params.pop("width", None),
                                seed=seed, **params)
    if kind == "hinfty_bound":
        domain = (params.pop("domain"), params.pop("domain_param"))
        est = hinfty_bound_estimate(op, domain, seed=seed, **params)
        rep = SuiteReport("hinfty_bound", op.to_json() if op.dim <= 8 else
                          {"dim": op.dim}, space.to_json(),
                          {"domain": list(domain)}, seed=seed)
        rep.add_constant("hinf_C", est)
        rep.add_check("finite", est.value, 1e9, 0.0)
        return rep
    raise ConfigInvalid(f"unknown suite {kind!r}")  # pragma: no cover


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_suite_outputs(report: SuiteReport, out_dir: Path, stem: str) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath = out_dir / f"{stem}.json"
    with open(jpath, "w") as fh:
        json.dump(report.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    cpath = out_dir / f"{stem}.csv"
    with open(cpath, "w", newline="") as fh:
        fh.write("suite,check_id,lhs,rhs,margin,pass\n")
        for row in report.csv_rows():
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return [jpath, cpath]


def run_config(doc: dict, out_dir: Path, base_dir: Path | None = None,
               seed_override: int | None = None, jobs: int = 1) -> dict:
    """Execute every suite in the config; returns the manifest dict.

    Reports are written as one JSON + CSV per suite; the manifest carries
    versions, seeds and wall-clock (the only place timestamps appear).
    Raises ConfigInvalid before any computation if the document is malformed.
    """
    validate_config(doc)
    base_dir = base_dir or Path.cwd()
    seed = seed_override if seed_override is not None else doc.get("seed", 0)
    ops = _build_operators(doc, base_dir)
    t0 = time.perf_counter()
    entries = list(enumerate(doc.get("suites", [])))

    def run_one(item):
        idx, entry = item
        report = dispatch_suite(entry, ops, seed)
        return idx, entry, report

    results = []
    if jobs > 1 and len(entries) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, entries))
    else:
        results = [run_one(it) for it in entries]
    results.sort(key=lambda r: r[0])

    suites_manifest, all_passed = [], True
    for idx, entry, report in results:
        stem = f"{idx:03d}_{report.suite}"
        paths = write_suite_outputs(report, out_dir, stem)
        suites_manifest.append({"index": idx, "suite": report.suite,
                                "passed": report.passed,
                                "files": [p.name for p in paths],
                                "runtime_s": report.runtime_s})
        all_passed = all_passed and report.passed
    manifest = {
        "versions": {"hinflab": __version__, "python": platform.python_version(),
                     "numpy": np.__version__},
        "seed": seed,
        "jobs": jobs,
        "wall_clock_s": time.perf_counter() - t0,
        "created_unix": time.time(),
        "suites": suites_manifest,
        "all_passed": all_passed,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest
