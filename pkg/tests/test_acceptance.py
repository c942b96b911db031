"""Acceptance gate: one test per shipped criterion, fixed tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one verdict line per
criterion.
"""

import json
import math
import time

import numpy as np
import pytest

from hinflab import (ContourSpec, Operator, SampledFunction, SpaceSpec,
                     bound_estimate, contraction_principle_check, dunford,
                     fourier, g_function_experiment, g_function_sweep,
                     gamma_norm, group, log_generator, log_operator,
                     log_resolvent_check, periodic_line_grid, power,
                     strip_group_suite, xa_norm)
from hinflab.calculus import HFunction
from hinflab.grids import interval_grid
from hinflab.registry import rational_bump
from hinflab.runconfig import run_config
from hinflab.suites import test_vectors as suite_test_vectors

from conftest import random_normal_sectorial, random_pd_diagonal


def verdict(name: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_A01_exact_square_function_identity():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for n in (4, 16):
        a = random_pd_diagonal(n, rng)
        sp = SpaceSpec(2, n)
        for _ in range(3):
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            est = xa_norm(a, x, sp)
            worst = max(worst, abs(est.value / float(sp.norm(x)) - 1.0))
    elapsed = time.perf_counter() - t0
    verdict("exact square-function identity (1e-6 rel, < 1 s)",
            worst <= 1e-6 and elapsed < 1.0,
            f"worst rel err {worst:.3g}, {elapsed:.2f} s")


def test_A02_plancherel_on_gamma():
    rng = np.random.default_rng(102)
    g = periodic_line_grid(40.0, 1024)
    t = g.points.real
    profile = np.exp(-t ** 2 / 6)

    sp2 = SpaceSpec(2, 3)
    vals = profile[:, None] * (rng.standard_normal(3)
                               + 1j * rng.standard_normal(3))[None, :]
    f2 = SampledFunction(g, vals, sp2)
    out2, rep2 = fourier(f2)
    exact_ok = rep2["isometry_defect"] <= 1e-8

    mc_ok = True
    details = [f"p=2 defect {rep2['isometry_defect']:.2g}"]
    for p in (1.5, 3.0):
        sp = SpaceSpec(p, 3)
        f = SampledFunction(g, vals, sp)
        before = gamma_norm(f, budget=20000, seed=int(10 * p))
        out, _ = fourier(f, budget=100, seed=0)
        after = gamma_norm(out, budget=20000, seed=int(10 * p) + 1)
        gap = abs(before.value - after.value)
        tol = 3.0 * math.hypot(before.stderr, after.stderr)
        mc_ok = mc_ok and gap <= tol
        details.append(f"p={p} gap {gap:.2g} vs 3sigma {tol:.2g}")
    verdict("Plancherel on gamma (p=2 exact, p in {1.5,3} within 3 stderr)",
            exact_ok and mc_ok, "; ".join(details))


def test_A03_dunford_vs_eigendecomposition():
    rng = np.random.default_rng(103)
    bump = rational_bump(1.0)
    bump_sq = HFunction("bump_sq", lambda lam: (lam / (1 + lam) ** 2) ** 2,
                        ("sector", bump.domain[1]), cls="H0", decay=(2.0, 2.0))
    worst_rel, worst_mult = 0.0, 0.0
    for k in range(100):
        n = int(rng.integers(2, 33))
        a = random_normal_sectorial(n, rng)
        contour = ContourSpec("sector",
                              0.5 * (a.omega_spec() + bump.domain[1]), 40)
        fa = dunford(bump, a, contour)
        ref = a.apply_function(lambda lam: lam / (1 + lam) ** 2)
        worst_rel = max(worst_rel, float(np.linalg.norm(fa - ref)
                                         / np.linalg.norm(ref)))
        if k % 10 == 0:
            both = dunford(bump_sq, a)
            worst_mult = max(worst_mult, float(
                np.linalg.norm(both - fa @ fa)
                / (1 + np.linalg.norm(fa) ** 2)))
    verdict("dunford vs eigendecomposition (100 ops, 1e-8; mult 1e-7)",
            worst_rel <= 1e-8 and worst_mult <= 1e-7,
            f"worst rel {worst_rel:.3g}, worst mult {worst_mult:.3g}")


def test_A04_power_path_agreement():
    rng = np.random.default_rng(104)
    worst = 0.0
    a = Operator(np.diag(np.exp(rng.uniform(-1.2, 1.5, 5))))
    for s in (1.0, -1.0):
        mats = {m: power(a, 1j * s, m)
                for m in ("balakrishnan", "dunford-regularized", "eig")}
        for m in ("balakrishnan", "dunford-regularized"):
            worst = max(worst, float(np.linalg.norm(mats[m] - mats["eig"])))
    ad = Operator(np.diag([0.5 * np.exp(0.3j), 3.0 * np.exp(-0.2j)]))
    sigma = ad.omega_spec()
    growth_ok = all(
        float(np.linalg.norm(power(ad, 1j * s, "eig"), 2))
        <= math.exp(sigma * abs(s)) * (1 + 1e-6) for s in (1.0, -1.0, 2.5))
    verdict("power-path agreement (1e-6 after scalar calibration; growth bound)",
            worst <= 1e-6 and growth_ok, f"worst path gap {worst:.3g}")


def test_A05_log_bridge():
    a = Operator(np.diag([0.7, 1.0, math.e]))
    b = log_generator(a)
    lhs = power(a, 1j, "eig")
    rhs = group(b, -1.0)
    r1 = float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
    r2 = log_resolvent_check(Operator(np.diag([1.0, math.e])), 4j)
    # half-power representation residual at t = 1, A = diag(1, 4), width 1
    from hinflab import log_bridge_suite
    rep = log_bridge_suite(Operator(np.diag([1.0, 4.0])), SpaceSpec(2, 2),
                           width=1.0, seed=5)
    r3 = rep.constants["half_power_residual"]["value"]
    verdict("log bridge (A^i = e^{-B} 1e-7; resolvent rep 1e-6; half-power 1e-5)",
            r1 <= 1e-7 and r2 <= 1e-6 and r3 <= 1e-5,
            f"residuals {r1:.2g}, {r2:.2g}, {r3:.2g}")


def test_A06_hilbert_space_r_bound_oracle():
    rng = np.random.default_rng(106)
    worst_exact, worst_search = 0.0, 0.0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 7))
        fam = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
               for _ in range(m)]
        sp = SpaceSpec(2, n)
        est = bound_estimate(fam, sp, kind="r", seed=int(rng.integers(1 << 30)))
        oracle = max(float(np.linalg.svd(t, compute_uv=False)[0]) for t in fam)
        worst_exact = max(worst_exact, abs(est.value / oracle - 1.0))
        worst_search = max(worst_search,
                           1.0 - est.witnesses[0]["search_value"] / oracle)
    verdict("Hilbert-space R-bound oracle (50 families within 5%)",
            worst_exact <= 0.05 and worst_search <= 0.05,
            f"returned dev {worst_exact:.3g}, search dev {worst_search:.3g}")


def test_A07_contraction_principle():
    rep = contraction_principle_check(SpaceSpec(1.5, 3), trials=1000, seed=107)
    rep2 = contraction_principle_check(SpaceSpec(2, 3), trials=1000, seed=108,
                                       scalar_mode="real-unit")
    verdict("contraction principle (1000 trials <= 2; real nonneg p=2 <= 1)",
            rep["max_ratio"] <= 2.0 and rep2["max_ratio"] <= 1.0 + 1e-12,
            f"max ratios {rep['max_ratio']:.4f}, {rep2['max_ratio']:.6f}")


def test_A08_g_function_constants():
    rep = g_function_experiment(128, 2.0, 1.0, "heat", seed=8, n_vectors=6)
    half_ok = rep.passed and abs(rep.constants["C_plus"]["value"] - 0.5) <= 1e-6
    t0 = time.perf_counter()
    spreads = []
    for p in (1.5, 4.0):
        sw = g_function_sweep([64, 128, 256], p, 1.0, "heat", seed=9,
                              budget=4000)
        spreads.append(max(sw.constants["C_plus_spread"]["value"],
                           sw.constants["C_minus_spread"]["value"]))
    elapsed = time.perf_counter() - t0
    verdict("g-function constants (p=2 exact 1/2; p in {1.5,4} stable 10%, < 60 s)",
            half_ok and max(spreads) <= 1.10 and elapsed < 60.0,
            f"spreads {spreads[0]:.4f}/{spreads[1]:.4f}, sweep {elapsed:.1f} s")


def test_A09_remark_63d_inequality():
    rng = np.random.default_rng(109)
    ok = True
    for k in range(3):
        theta = rng.uniform(-4.0, 4.0, 4)
        b = Operator(1j * np.diag(theta))
        rep = strip_group_suite(b, SpaceSpec(2, 4), width=1.0, seed=200 + k,
                                pack_size=50)
        row = next(c for c in rep.checks if c.check_id == "remark_63d")
        ok = ok and row.passed
    verdict("Remark-6.3d-shaped bound (diagonal groups, 50-function pack)",
            ok, "zero violations")


def test_A10_step_function_gamma_exactness():
    rng = np.random.default_rng(110)
    g = interval_grid(4.0, 513)
    sp = SpaceSpec(2, 4)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    vals = np.tile(x, (513, 1))
    est = gamma_norm(SampledFunction(g, vals, sp))
    err = abs(est.value - 2.0 * float(sp.norm(x)))
    verdict("step-function gamma-norm exactness (1e-12, p=2)",
            est.stderr == 0.0 and err <= 1e-12, f"err {err:.3g}")


def test_A11_determinism_byte_identical(tmp_path):
    doc = {
        "seed": 11,
        "operators": [{"name": "calib", "matrix": {"diag_re": [1.0, 4.0]}}],
        "suites": [
            {"suite": "sector_equivalence", "operator": "calib",
             "space": {"p": 2, "n": 2},
             "params": {"omega": math.pi, "sigma": math.pi / 3}},
            {"suite": "g_function",
             "params": {"size": 64, "p": 1.5, "beta": 1.0, "budget": 1500}},
        ],
    }
    run_config(doc, tmp_path / "a")
    run_config(doc, tmp_path / "b")
    same = all(
        (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in ("000_sector_equivalence.csv", "001_g_function.csv"))
    verdict("determinism (same seed, byte-identical CSV bodies)", same)
